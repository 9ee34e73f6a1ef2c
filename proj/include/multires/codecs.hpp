#pragma once

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "multires/errors.hpp"
#include "multires/image.hpp"

namespace multires {

enum class ImageFormat { PPM, PGM, PNG };

inline std::optional<ImageFormat> format_from_extension(
    const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (ext == ".ppm") return ImageFormat::PPM;
  if (ext == ".pgm") return ImageFormat::PGM;
  if (ext == ".png") return ImageFormat::PNG;
  return std::nullopt;
}

namespace codec_detail {

using Bytes = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// PNM (binary P5 / P6)
// ---------------------------------------------------------------------------

class PnmReader {
 public:
  explicit PnmReader(const Bytes& bytes) : bytes_(bytes) {}

  // Reads the next header token, skipping whitespace and '#' comments.
  std::string next_token() {
    skip_space_and_comments();
    std::string token;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]))
      token.push_back(static_cast<char>(bytes_[pos_++]));
    if (token.empty()) throw DecodeError("pnm: truncated header");
    return token;
  }

  int next_int(const char* what) {
    const std::string token = next_token();
    long value = 0;
    for (char ch : token) {
      if (ch < '0' || ch > '9')
        throw DecodeError(std::string("pnm: malformed ") + what);
      value = value * 10 + (ch - '0');
      if (value > 1000000000)
        throw DecodeError(std::string("pnm: ") + what + " out of range");
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates the header from the payload.
  void consume_payload_separator() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw DecodeError("pnm: missing separator before pixel data");
    ++pos_;
  }

  const std::uint8_t* payload(std::size_t needed) const {
    if (bytes_.size() - pos_ < needed)
      throw DecodeError("pnm: truncated pixel data");
    return bytes_.data() + pos_;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        return;
      }
    }
  }

  const Bytes& bytes_;
  std::size_t pos_ = 0;
};

inline PlanarImage decode_pnm(const Bytes& bytes, bool color) {
  PnmReader reader(bytes);
  const std::string magic = reader.next_token();
  const std::string expected = color ? "P6" : "P5";
  if (magic != expected)
    throw DecodeError("pnm: expected " + expected + " stream, got \"" + magic +
                      "\"");
  const int width = reader.next_int("width");
  const int height = reader.next_int("height");
  const int maxval = reader.next_int("maxval");
  if (width < 1 || height < 1) throw DecodeError("pnm: bad dimensions");
  if (maxval > 255)
    throw UnsupportedFormatError("pnm: only 8-bit depth is supported");
  if (maxval < 1) throw DecodeError("pnm: bad maxval");
  reader.consume_payload_separator();
  const int channels = color ? 3 : 1;
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  const std::uint8_t* data = reader.payload(pixels * channels);
  PlanarImage img = make_planar_image(width, height, channels);
  for (std::size_t i = 0; i < pixels; ++i)
    for (int c = 0; c < channels; ++c)
      img.planes[c][i] = data[i * channels + c];
  return img;
}

inline Bytes encode_pnm(const PlanarImage& img, bool color) {
  const std::string header = std::string(color ? "P6" : "P5") + "\n" +
                             std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  const int channels = color ? 3 : 1;
  const std::size_t pixels = static_cast<std::size_t>(img.width) * img.height;
  out.reserve(out.size() + pixels * channels);
  for (std::size_t i = 0; i < pixels; ++i)
    for (int c = 0; c < channels; ++c)
      out.push_back(img.planes[img.channels() == 1 ? 0 : c][i]);
  return out;
}

// ---------------------------------------------------------------------------
// PNG (8-bit grayscale / truecolor, non-interlaced)
// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kPngSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

inline std::uint32_t read_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) |
         (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

inline void append_be32(Bytes& out, std::uint32_t value) {
  out.push_back(static_cast<std::uint8_t>(value >> 24));
  out.push_back(static_cast<std::uint8_t>(value >> 16));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
  out.push_back(static_cast<std::uint8_t>(value));
}

inline std::uint8_t paeth_predictor(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

inline PlanarImage decode_png(const Bytes& bytes) {
  if (bytes.size() < 8 ||
      !std::equal(kPngSignature, kPngSignature + 8, bytes.data()))
    throw DecodeError("png: bad signature");
  std::size_t pos = 8;
  bool saw_ihdr = false;
  bool saw_iend = false;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int channels = 0;
  Bytes compressed;
  while (pos < bytes.size() && !saw_iend) {
    if (bytes.size() - pos < 12) throw DecodeError("png: truncated chunk");
    const std::uint32_t length = read_be32(&bytes[pos]);
    if (bytes.size() - pos - 12 < length)
      throw DecodeError("png: truncated chunk");
    const std::uint8_t* type = &bytes[pos + 4];
    const std::uint8_t* data = &bytes[pos + 8];
    const std::uint32_t stored_crc = read_be32(data + length);
    const std::uint32_t crc = static_cast<std::uint32_t>(
        ::crc32(::crc32(0L, type, 4), data, length));
    if (crc != stored_crc) throw DecodeError("png: chunk crc mismatch");
    const std::string name(reinterpret_cast<const char*>(type), 4);
    if (!saw_ihdr && name != "IHDR")
      throw DecodeError("png: first chunk must be IHDR");
    if (name == "IHDR") {
      if (saw_ihdr) throw DecodeError("png: duplicate IHDR");
      if (length != 13) throw DecodeError("png: bad IHDR length");
      saw_ihdr = true;
      width = read_be32(data);
      height = read_be32(data + 4);
      const int bit_depth = data[8];
      const int color_type = data[9];
      const int compression = data[10];
      const int filter_method = data[11];
      const int interlace = data[12];
      if (width == 0 || height == 0) throw DecodeError("png: zero dimension");
      if (bit_depth != 8)
        throw UnsupportedFormatError("png: only 8-bit depth is supported (got " +
                                     std::to_string(bit_depth) + "-bit)");
      if (color_type == 0) channels = 1;
      else if (color_type == 2) channels = 3;
      else
        throw UnsupportedFormatError(
            "png: only grayscale and truecolor are supported (color type " +
            std::to_string(color_type) + ")");
      if (compression != 0 || filter_method != 0)
        throw DecodeError("png: unknown compression or filter method");
      if (interlace == 1)
        throw UnsupportedFormatError("png: interlaced images are not supported");
      if (interlace != 0) throw DecodeError("png: bad interlace flag");
    } else if (name == "IDAT") {
      compressed.insert(compressed.end(), data, data + length);
    } else if (name == "IEND") {
      saw_iend = true;
    }
    pos += 12 + length;
  }
  if (!saw_ihdr) throw DecodeError("png: missing IHDR");
  if (!saw_iend) throw DecodeError("png: missing IEND");
  if (compressed.empty()) throw DecodeError("png: missing IDAT");

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  const std::size_t raw_size = (stride + 1) * height;
  Bytes raw(raw_size);
  uLongf dest_len = raw_size;
  const int zrc = ::uncompress(raw.data(), &dest_len, compressed.data(),
                               static_cast<uLong>(compressed.size()));
  if (zrc != Z_OK || dest_len != raw_size)
    throw DecodeError("png: corrupt compressed stream");

  PlanarImage img = make_planar_image(static_cast<int>(width),
                                      static_cast<int>(height), channels);
  const int bpp = channels;
  std::vector<std::uint8_t> current(stride, 0);
  std::vector<std::uint8_t> previous(stride, 0);
  for (std::uint32_t row = 0; row < height; ++row) {
    const std::uint8_t* src = raw.data() + static_cast<std::size_t>(row) * (stride + 1);
    const std::uint8_t filter = src[0];
    ++src;
    for (std::size_t i = 0; i < stride; ++i) {
      const int left = i >= static_cast<std::size_t>(bpp) ? current[i - bpp] : 0;
      const int up = previous[i];
      const int up_left = i >= static_cast<std::size_t>(bpp) ? previous[i - bpp] : 0;
      int value = src[i];
      switch (filter) {
        case 0: break;
        case 1: value += left; break;
        case 2: value += up; break;
        case 3: value += (left + up) / 2; break;
        case 4: value += paeth_predictor(left, up, up_left); break;
        default: throw DecodeError("png: bad row filter type");
      }
      current[i] = static_cast<std::uint8_t>(value & 0xFF);
    }
    for (std::uint32_t col = 0; col < width; ++col)
      for (int c = 0; c < channels; ++c)
        img.planes[c][static_cast<std::size_t>(row) * width + col] =
            current[static_cast<std::size_t>(col) * channels + c];
    std::swap(current, previous);
  }
  return img;
}

inline void append_chunk(Bytes& out, const char* type, const Bytes& data) {
  append_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_pos = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const std::uint32_t crc = static_cast<std::uint32_t>(
      ::crc32(0L, out.data() + type_pos, static_cast<uInt>(4 + data.size())));
  append_be32(out, crc);
}

inline Bytes encode_png(const PlanarImage& img, int channels) {
  const std::size_t stride = static_cast<std::size_t>(img.width) * channels;
  Bytes raw;
  raw.reserve((stride + 1) * img.height);
  for (int row = 0; row < img.height; ++row) {
    raw.push_back(0);  // filter type None
    for (int col = 0; col < img.width; ++col)
      for (int c = 0; c < channels; ++c)
        raw.push_back(img.planes[img.channels() == 1 ? 0 : c]
                                [static_cast<std::size_t>(row) * img.width + col]);
  }
  uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
  Bytes compressed(bound);
  // fixed compression level keeps re-encodes byte-identical
  const int zrc = ::compress2(compressed.data(), &bound, raw.data(),
                              static_cast<uLong>(raw.size()), 6);
  if (zrc != Z_OK) throw Error("png: deflate failed");
  compressed.resize(bound);

  Bytes out(kPngSignature, kPngSignature + 8);
  Bytes ihdr;
  append_be32(ihdr, static_cast<std::uint32_t>(img.width));
  append_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);                                   // bit depth
  ihdr.push_back(channels == 1 ? 0 : 2);               // color type
  ihdr.push_back(0);                                   // compression
  ihdr.push_back(0);                                   // filter method
  ihdr.push_back(0);                                   // no interlace
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", compressed);
  append_chunk(out, "IEND", Bytes{});
  return out;
}

}  // namespace codec_detail

// Decode bytes in the hinted format into a PlanarImage (1 channel for PGM or
// grayscale PNG, 3 for PPM or truecolor PNG).
inline PlanarImage decode_image(const std::vector<std::uint8_t>& bytes,
                                ImageFormat format) {
  switch (format) {
    case ImageFormat::PGM: return codec_detail::decode_pnm(bytes, false);
    case ImageFormat::PPM: return codec_detail::decode_pnm(bytes, true);
    case ImageFormat::PNG: return codec_detail::decode_png(bytes);
  }
  throw InvalidInputError("decode_image: unknown format");
}

// Encode an image. PGM takes 1 channel and PPM 3; a grayscale image may be
// replicated into PPM/truecolor-PNG channels only when gray_to_rgb is set.
inline std::vector<std::uint8_t> encode_image(const PlanarImage& img,
                                              ImageFormat format,
                                              bool gray_to_rgb = false) {
  validate(img);
  switch (format) {
    case ImageFormat::PGM:
      if (img.channels() != 1)
        throw InvalidInputError("encode_image: PGM requires a 1-channel image");
      return codec_detail::encode_pnm(img, false);
    case ImageFormat::PPM:
      if (img.channels() != 3 && !gray_to_rgb)
        throw InvalidInputError("encode_image: PPM requires a 3-channel image");
      return codec_detail::encode_pnm(img, true);
    case ImageFormat::PNG:
      return codec_detail::encode_png(img,
                                      img.channels() == 3 || gray_to_rgb ? 3 : 1);
  }
  throw InvalidInputError("encode_image: unknown format");
}

inline PlanarImage load_image(const std::filesystem::path& path) {
  const auto format = format_from_extension(path);
  if (!format)
    throw UnsupportedFormatError("unsupported image extension: " + path.string());
  std::ifstream file(path, std::ios::binary);
  if (!file) throw NotFoundError("cannot open image file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());
  return decode_image(bytes, *format);
}

inline void save_image(const PlanarImage& img,
                       const std::filesystem::path& path) {
  const auto format = format_from_extension(path);
  if (!format)
    throw UnsupportedFormatError("unsupported image extension: " + path.string());
  const std::vector<std::uint8_t> bytes = encode_image(img, *format);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write image file: " + path.string());
  file.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
}

}  // namespace multires
