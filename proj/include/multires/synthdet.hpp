#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iterator>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "multires/detections.hpp"
#include "multires/errors.hpp"
#include "multires/spectral.hpp"
#include "multires/voc.hpp"

namespace multires {

namespace rng_detail {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace rng_detail

// Counter-based deterministic generator: draw k of stream s under seed q is
// a pure function of (q, s, k), with no shared state. Streams keyed by
// stable identifiers make simulation output independent of iteration order
// and of any parallel schedule. A stream can be opened at a draw offset so
// distinct consumers of one stream read disjoint index blocks.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view stream,
             std::uint64_t start_index = 0)
      : key_(rng_detail::mix64(rng_detail::mix64(seed + 0x9E3779B97F4A7C15ull) ^
                               rng_detail::fnv1a64(stream))),
        counter_(start_index) {}

  std::uint64_t next_u64() {
    return rng_detail::mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ull);
  }

  // uniform in [0, 1)
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + next_unit() * (hi - lo);
  }

  int next_int(int lo, int hi) {  // inclusive bounds
    const double u = next_unit();
    return std::min(hi, lo + static_cast<int>(u * (static_cast<double>(hi) - lo + 1.0)));
  }

  // Box-Muller
  double next_normal(double mean, double stddev) {
    const double u1 = 1.0 - next_unit();  // (0, 1], keeps log finite
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Knuth's product method; fine for the small rates used here.
  int next_poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int count = 0;
    double product = 1.0;
    do {
      ++count;
      product *= next_unit();
    } while (product > limit);
    return count - 1;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

namespace rng_detail {

// Poisson count by inverting the CDF at a given uniform. Consuming exactly
// one uniform keeps the count comonotone in lambda for a shared draw: a
// larger rate can only push the same u to a larger count.
inline int poisson_from_unit(double u, double lambda) {
  if (lambda <= 0.0) return 0;
  double pmf = std::exp(-lambda);
  double cdf = pmf;
  int k = 0;
  while (u >= cdf && k < 100000) {
    ++k;
    pmf *= lambda / k;
    cdf += pmf;
  }
  return k;
}

}  // namespace rng_detail

// Behavioral stand-in for a detector trained at one resolution level. The
// functional form is synthetic: detection probability decays with the
// ordinal gap between training and evaluation levels and shrinks on very
// low-resolution inputs, localization jitter and false-positive pressure
// grow with the gap. Defaults are tuned so resolution-specialists beat
// mismatched models, not to imitate any particular trained network.
struct SynthModelSpec {
  ResolutionLevel train_level = ResolutionLevel::full();
  double p_max = 0.9;
  double sigma_mismatch = 6.0;  // in level ordinals
  double lowres_gamma = 2.0;
  double jitter_frac = 0.05;
  double fp_rate = 0.05;  // per image per class
  double score_noise = 0.1;
  std::uint64_t seed = 0;

  std::string model_tag() const {
    return train_level.is_full()
               ? "full-spectrum"
               : std::to_string(train_level.cutoff_index()) + "/20";
  }
};

inline void validate(const SynthModelSpec& spec) {
  if (!(spec.p_max > 0.0 && spec.p_max <= 1.0))
    throw InvalidInputError("synth model: p_max must lie in (0, 1]");
  if (!(spec.sigma_mismatch > 0.0))
    throw InvalidInputError("synth model: sigma_mismatch must be > 0");
  if (spec.lowres_gamma < 0.0)
    throw InvalidInputError("synth model: lowres_gamma must be >= 0");
  if (spec.jitter_frac < 0.0)
    throw InvalidInputError("synth model: jitter_frac must be >= 0");
  if (spec.fp_rate < 0.0)
    throw InvalidInputError("synth model: fp_rate must be >= 0");
  if (spec.score_noise < 0.0)
    throw InvalidInputError("synth model: score_noise must be >= 0");
}

// p = p_max * exp(-gap^2 / (2 sigma^2)) * e / (e + gamma), with gap the
// ordinal distance to the training level and e the evaluated ordinal.
inline double hit_probability(const SynthModelSpec& spec,
                              ResolutionLevel eval_level) {
  validate(spec);
  const double gap =
      std::abs(eval_level.ordinal() - spec.train_level.ordinal());
  const double e = static_cast<double>(eval_level.ordinal());
  const double p = spec.p_max *
                   std::exp(-(gap * gap) /
                            (2.0 * spec.sigma_mismatch * spec.sigma_mismatch)) *
                   (e / (e + spec.lowres_gamma));
  return std::clamp(p, 0.0, 1.0);
}

// Draws reserved per training level inside one object stream: 1 hit draw,
// 8 for the four jittered corners (Box-Muller), 2 for the score, plus slack.
inline constexpr std::uint64_t kDrawsPerTrainLevel = 16;

// Emit one model's detections for a scene evaluated at one level. Reads only
// geometry and labels, never pixels. Every random draw comes from a stream
// keyed by (seed, image id, class, object index), so the output is a pure
// function of (spec, scene, eval_level). Within an object's stream each
// training level reads its own block of draw indices: differently trained
// models miss independently, the way separately trained networks would. The
// false-positive streams are read at the same indices by every model, so the
// junk that mismatched models add is largely the same set of boxes and the
// fusion stage can suppress it as duplicates.
inline DetectionSet simulate(const SynthModelSpec& spec,
                             const DatasetManifest& scene,
                             ResolutionLevel eval_level) {
  validate(spec);
  const double p_hit = hit_probability(spec, eval_level);
  const double gap =
      std::abs(eval_level.ordinal() - spec.train_level.ordinal());
  const double jitter_scale =
      spec.jitter_frac * (1.0 + gap / spec.sigma_mismatch);
  const double fp_lambda = spec.fp_rate * (1.0 + gap / 10.0);
  const std::string tag = spec.model_tag();
  const std::uint64_t draw_base =
      static_cast<std::uint64_t>(spec.train_level.ordinal() - 1) *
      kDrawsPerTrainLevel;

  DetectionSet out;
  for (const ImageRecord& record : scene.records) {
    std::vector<Detection> image_dets;
    for (std::size_t i = 0; i < record.objects.size(); ++i) {
      const GroundTruthObject& obj = record.objects[i];
      if (obj.difficult) continue;
      CounterRng rng(spec.seed,
                     "det|" + record.image_id + "|" + obj.class_name + "|" +
                         std::to_string(i),
                     draw_base);
      if (rng.next_unit() >= p_hit) continue;
      const double box_w = obj.bbox.xmax - obj.bbox.xmin + 1.0;
      const double box_h = obj.bbox.ymax - obj.bbox.ymin + 1.0;
      BoundingBox box;
      box.xmin = obj.bbox.xmin + rng.next_normal(0.0, jitter_scale * box_w);
      box.ymin = obj.bbox.ymin + rng.next_normal(0.0, jitter_scale * box_h);
      box.xmax = obj.bbox.xmax + rng.next_normal(0.0, jitter_scale * box_w);
      box.ymax = obj.bbox.ymax + rng.next_normal(0.0, jitter_scale * box_h);
      box.xmin = std::clamp(box.xmin, 1.0, static_cast<double>(record.width));
      box.xmax = std::clamp(box.xmax, 1.0, static_cast<double>(record.width));
      box.ymin = std::clamp(box.ymin, 1.0, static_cast<double>(record.height));
      box.ymax = std::clamp(box.ymax, 1.0, static_cast<double>(record.height));
      if (box.xmax < box.xmin) std::swap(box.xmin, box.xmax);
      if (box.ymax < box.ymin) std::swap(box.ymin, box.ymax);
      Detection det;
      det.image_id = record.image_id;
      det.class_name = obj.class_name;
      det.bbox = box;
      det.score = std::clamp(rng.next_normal(p_hit, spec.score_noise), 0.0, 1.0);
      det.model_tag = tag;
      image_dets.push_back(std::move(det));
    }
    for (const auto& class_name : kVocClasses) {
      CounterRng count_rng(spec.seed, "fp|" + record.image_id + "|" +
                                          std::string(class_name));
      const int n_fp =
          rng_detail::poisson_from_unit(count_rng.next_unit(), fp_lambda);
      for (int k = 0; k < n_fp; ++k) {
        // each false positive draws from its own indexed stream, so FP #k is
        // the same box for every model that reaches it: fusion can then
        // collapse the shared junk the same way it collapses duplicate hits
        CounterRng rng(spec.seed, "fp|" + record.image_id + "|" +
                                      std::string(class_name) + "|" +
                                      std::to_string(k));
        double x1 = rng.next_uniform(1.0, record.width);
        double x2 = rng.next_uniform(1.0, record.width);
        double y1 = rng.next_uniform(1.0, record.height);
        double y2 = rng.next_uniform(1.0, record.height);
        if (x2 < x1) std::swap(x1, x2);
        if (y2 < y1) std::swap(y1, y2);
        Detection det;
        det.image_id = record.image_id;
        det.class_name = std::string(class_name);
        det.bbox = {x1, y1, x2, y2};
        det.score = rng.next_unit() * 0.5;
        det.model_tag = tag;
        image_dets.push_back(std::move(det));
      }
    }
    if (image_dets.size() > static_cast<std::size_t>(kMaxDetectionsPerImageModel)) {
      canonical_sort(image_dets);
      image_dets.resize(kMaxDetectionsPerImageModel);
    }
    out.detections.insert(out.detections.end(),
                          std::make_move_iterator(image_dets.begin()),
                          std::make_move_iterator(image_dets.end()));
  }
  return out;
}

// Procedural scene generator: random image sizes, boxes and classes, fully
// determined by the seed. The object-count default keeps per-class ground
// truth around 60 instances on a 200-image scene, enough for stable
// per-class AP estimates.
struct SceneConfig {
  int n_images = 200;
  std::uint64_t seed = 0;
  int min_dim = 240;
  int max_dim = 640;
  int min_objects = 3;
  int max_objects = 9;
  int min_box = 24;
  int max_box = 220;
  double difficult_rate = 0.05;
};

inline DatasetManifest generate_scene(const SceneConfig& cfg) {
  if (cfg.n_images < 0)
    throw InvalidInputError("scene: n_images must be >= 0");
  if (cfg.min_dim < 8 || cfg.max_dim < cfg.min_dim)
    throw InvalidInputError("scene: bad image dimension range");
  if (cfg.min_objects < 0 || cfg.max_objects < cfg.min_objects)
    throw InvalidInputError("scene: bad object count range");
  if (cfg.min_box < 1 || cfg.max_box < cfg.min_box || cfg.min_box > cfg.min_dim)
    throw InvalidInputError("scene: bad box size range");
  if (cfg.difficult_rate < 0.0 || cfg.difficult_rate > 1.0)
    throw InvalidInputError("scene: difficult_rate must lie in [0, 1]");

  DatasetManifest manifest;
  manifest.split_name = "synthetic";
  manifest.records.reserve(static_cast<std::size_t>(cfg.n_images));
  for (int idx = 0; idx < cfg.n_images; ++idx) {
    std::string id = std::to_string(idx);
    id.insert(0, 6 - std::min<std::size_t>(6, id.size()), '0');
    id.insert(0, "synth");
    CounterRng rng(cfg.seed, "scene|" + id);
    ImageRecord record;
    record.image_id = std::move(id);
    record.width = rng.next_int(cfg.min_dim, cfg.max_dim);
    record.height = rng.next_int(cfg.min_dim, cfg.max_dim);
    const int n_objects = rng.next_int(cfg.min_objects, cfg.max_objects);
    for (int j = 0; j < n_objects; ++j) {
      GroundTruthObject obj;
      obj.class_name = std::string(kVocClasses[rng.next_int(0, 19)]);
      const int bw = rng.next_int(cfg.min_box, std::min(cfg.max_box, record.width));
      const int bh = rng.next_int(cfg.min_box, std::min(cfg.max_box, record.height));
      const int x1 = rng.next_int(1, record.width - bw + 1);
      const int y1 = rng.next_int(1, record.height - bh + 1);
      obj.bbox = {static_cast<double>(x1), static_cast<double>(y1),
                  static_cast<double>(x1 + bw - 1),
                  static_cast<double>(y1 + bh - 1)};
      obj.difficult = rng.next_unit() < cfg.difficult_rate;
      record.objects.push_back(std::move(obj));
    }
    manifest.records.push_back(std::move(record));
  }
  return manifest;
}

}  // namespace multires
