#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "multires/errors.hpp"

namespace multires {

using Complex = std::complex<double>;

// Complex spectrum with the same dimensions as its source image, row-major,
// DC component at (0, 0) (unshifted layout).
struct ComplexGrid {
  int width = 0;
  int height = 0;
  std::vector<Complex> values;

  Complex& at(int row, int col) {
    return values[static_cast<std::size_t>(row) * width + col];
  }
  const Complex& at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
};

namespace fft_detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::vector<Complex> make_twiddles(std::size_t n) {
  std::vector<Complex> tw(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) /
                       static_cast<double>(n);
    tw[k] = Complex(std::cos(ang), std::sin(ang));
  }
  return tw;
}

// In-place iterative radix-2 Cooley-Tukey, forward (negative exponent).
// n must be a power of two; twiddles hold e^{-2*pi*i*k/n} for k < n/2.
inline void radix2_forward(Complex* data, std::size_t n,
                           const std::vector<Complex>& twiddles) {
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex w = twiddles[k * step];
        const Complex u = data[base + k];
        const Complex v = data[base + k + half] * w;
        data[base + k] = u + v;
        data[base + k + half] = u - v;
      }
    }
  }
}

// 1D DFT plan for arbitrary lengths: radix-2 directly for powers of two,
// otherwise Bluestein's chirp-z reduction to a power-of-two convolution.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n_ == 0) throw InvalidInputError("fft: length must be >= 1");
    if (is_pow2(n_)) {
      twiddles_ = make_twiddles(n_);
      return;
    }
    conv_size_ = 1;
    while (conv_size_ < 2 * n_ - 1) conv_size_ <<= 1;
    twiddles_ = make_twiddles(conv_size_);
    // chirp_[k] = e^{-i*pi*k^2/n}; k^2 is reduced mod 2n so the angle stays
    // in [-2*pi, 0] and keeps full precision for large k.
    chirp_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      const std::uint64_t q =
          static_cast<std::uint64_t>(k) * k % (2 * static_cast<std::uint64_t>(n_));
      const double ang =
          -std::numbers::pi * static_cast<double>(q) / static_cast<double>(n_);
      chirp_[k] = Complex(std::cos(ang), std::sin(ang));
    }
    kernel_fft_.assign(conv_size_, Complex(0.0, 0.0));
    kernel_fft_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n_; ++k)
      kernel_fft_[k] = kernel_fft_[conv_size_ - k] = std::conj(chirp_[k]);
    radix2_forward(kernel_fft_.data(), conv_size_, twiddles_);
  }

  std::size_t size() const { return n_; }

  // Unnormalized forward DFT of data[0..n).
  void forward(Complex* data) const {
    if (conv_size_ == 0) {
      radix2_forward(data, n_, twiddles_);
      return;
    }
    std::vector<Complex> work(conv_size_, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * chirp_[k];
    radix2_forward(work.data(), conv_size_, twiddles_);
    for (std::size_t k = 0; k < conv_size_; ++k) work[k] *= kernel_fft_[k];
    // inverse convolution FFT via conjugation
    for (auto& z : work) z = std::conj(z);
    radix2_forward(work.data(), conv_size_, twiddles_);
    const double scale = 1.0 / static_cast<double>(conv_size_);
    for (std::size_t k = 0; k < n_; ++k)
      data[k] = std::conj(work[k]) * scale * chirp_[k];
  }

  // Unnormalized inverse DFT (positive exponent); the caller applies 1/n.
  void backward(Complex* data) const {
    for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(data[k]);
    forward(data);
    for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(data[k]);
  }

 private:
  std::size_t n_ = 0;
  std::size_t conv_size_ = 0;  // 0 when n_ is a power of two
  std::vector<Complex> twiddles_;
  std::vector<Complex> chirp_;
  std::vector<Complex> kernel_fft_;
};

enum class Direction { Forward, Backward };

inline void transform_2d(ComplexGrid& grid, Direction dir) {
  const std::size_t w = static_cast<std::size_t>(grid.width);
  const std::size_t h = static_cast<std::size_t>(grid.height);
  const FftPlan row_plan(w);
  const FftPlan col_plan(h);
  for (std::size_t r = 0; r < h; ++r) {
    Complex* row = grid.values.data() + r * w;
    dir == Direction::Forward ? row_plan.forward(row) : row_plan.backward(row);
  }
  std::vector<Complex> column(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) column[r] = grid.values[r * w + c];
    dir == Direction::Forward ? col_plan.forward(column.data())
                              : col_plan.backward(column.data());
    for (std::size_t r = 0; r < h; ++r) grid.values[r * w + c] = column[r];
  }
}

}  // namespace fft_detail

// Unnormalized 2D DFT of a real row-major grid. Any dimensions >= 1.
inline ComplexGrid fft2d_forward(const std::vector<double>& grid, int width,
                                 int height) {
  if (width < 1 || height < 1)
    throw InvalidInputError("fft2d_forward: dimensions must be >= 1");
  if (grid.size() != static_cast<std::size_t>(width) * height)
    throw InvalidInputError("fft2d_forward: grid size does not match dimensions");
  ComplexGrid out;
  out.width = width;
  out.height = height;
  out.values.assign(grid.begin(), grid.end());
  fft_detail::transform_2d(out, fft_detail::Direction::Forward);
  return out;
}

// Normalized inverse 2D DFT; returns real parts, imaginary residue discarded.
inline std::vector<double> fft2d_inverse(const ComplexGrid& grid) {
  if (grid.width < 1 || grid.height < 1)
    throw InvalidInputError("fft2d_inverse: dimensions must be >= 1");
  if (grid.values.size() != static_cast<std::size_t>(grid.width) * grid.height)
    throw InvalidInputError("fft2d_inverse: grid size does not match dimensions");
  ComplexGrid work = grid;
  fft_detail::transform_2d(work, fft_detail::Direction::Backward);
  const double scale =
      1.0 / (static_cast<double>(grid.width) * static_cast<double>(grid.height));
  std::vector<double> out(work.values.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = work.values[i].real() * scale;
  return out;
}

}  // namespace multires
