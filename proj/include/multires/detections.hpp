#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "multires/errors.hpp"

namespace multires {

// Pixel box in the VOC convention: 1-based inclusive corners, so a box
// covering a single pixel has xmin == xmax and area 1.
struct BoundingBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double area() const { return (xmax - xmin + 1.0) * (ymax - ymin + 1.0); }

  auto operator<=>(const BoundingBox&) const = default;
};

inline void validate(const BoundingBox& box) {
  if (box.xmax < box.xmin || box.ymax < box.ymin)
    throw InvalidInputError("bounding box corners are inverted");
}

// Intersection-over-union with the inclusive (+1) area convention.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin) + 1.0;
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin) + 1.0;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

struct Detection {
  std::string image_id;
  std::string class_name;
  BoundingBox bbox;
  double score = 0.0;
  std::string model_tag;

  bool operator==(const Detection&) const = default;
};

// Canonical ordering used everywhere a detection list is sorted: score
// descending, then model tag, image id, box corners, class. The full key
// makes every sort a total order, so results never depend on input order
// or on the (unstable) sort implementation.
inline bool canonical_before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.model_tag, a.image_id, a.bbox.xmin, a.bbox.ymin,
                  a.bbox.xmax, a.bbox.ymax, a.class_name) <
         std::tie(b.model_tag, b.image_id, b.bbox.xmin, b.bbox.ymin,
                  b.bbox.xmax, b.bbox.ymax, b.class_name);
}

inline void canonical_sort(std::vector<Detection>& dets) {
  std::sort(dets.begin(), dets.end(), canonical_before);
}

// Hard per-(image, model) output cap of the detector stage.
inline constexpr int kMaxDetectionsPerImageModel = 300;

struct DetectionSet {
  std::vector<Detection> detections;

  bool operator==(const DetectionSet&) const = default;
};

// Throws CapViolationError naming the offending (image, model) pair.
inline void enforce_detection_cap(const DetectionSet& set) {
  std::map<std::pair<std::string, std::string>, int> counts;
  for (const Detection& det : set.detections) {
    int& n = counts[{det.image_id, det.model_tag}];
    if (++n > kMaxDetectionsPerImageModel)
      throw CapViolationError("more than " +
                              std::to_string(kMaxDetectionsPerImageModel) +
                              " detections for image \"" + det.image_id +
                              "\" from model \"" + det.model_tag + "\"");
  }
}

namespace detection_detail {

// Greedy suppression on an arbitrary pool: sort canonically, keep the top
// detection, drop everything overlapping it strictly above the threshold,
// repeat. IoU exactly equal to the threshold survives.
inline std::vector<Detection> greedy_suppress(std::vector<Detection> dets,
                                              double iou_threshold) {
  canonical_sort(dets);
  std::vector<bool> removed(dets.size(), false);
  std::vector<Detection> kept;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (removed[i]) continue;
    for (std::size_t j = i + 1; j < dets.size(); ++j) {
      if (!removed[j] && iou(dets[i].bbox, dets[j].bbox) > iou_threshold)
        removed[j] = true;
    }
    kept.push_back(std::move(dets[i]));
  }
  return kept;
}

inline void check_iou_threshold(double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
    throw InvalidInputError("iou threshold must lie in (0, 1)");
}

}  // namespace detection_detail

// Class-wise greedy non-maximum suppression for one image. The pool must be
// homogeneous; fuse() handles the grouping for the general case.
inline std::vector<Detection> nms(std::vector<Detection> dets,
                                  double iou_threshold) {
  detection_detail::check_iou_threshold(iou_threshold);
  for (std::size_t i = 1; i < dets.size(); ++i) {
    if (dets[i].image_id != dets[0].image_id ||
        dets[i].class_name != dets[0].class_name)
      throw InvalidInputError(
          "nms: detections must share one image_id and one class");
  }
  return detection_detail::greedy_suppress(std::move(dets), iou_threshold);
}

// Multi-model combination rule: pool every model's detections, then run NMS
// per (image, class) group and concatenate the survivors. With cross_class
// set, suppression runs per image across classes (the literal pooled-NMS
// reading); the default keeps overlapping boxes of different classes.
inline DetectionSet fuse(const std::vector<DetectionSet>& per_model,
                         double iou_threshold = 0.7,
                         bool cross_class = false) {
  detection_detail::check_iou_threshold(iou_threshold);
  std::map<std::string, std::size_t> tag_owner;
  for (std::size_t i = 0; i < per_model.size(); ++i) {
    enforce_detection_cap(per_model[i]);
    for (const Detection& det : per_model[i].detections) {
      auto [it, inserted] = tag_owner.emplace(det.model_tag, i);
      if (!inserted && it->second != i)
        throw InvalidInputError("fuse: model tag \"" + det.model_tag +
                                "\" appears in more than one input set");
    }
  }
  std::map<std::pair<std::string, std::string>, std::vector<Detection>> groups;
  for (const DetectionSet& set : per_model) {
    for (const Detection& det : set.detections) {
      const std::string group_class = cross_class ? std::string() : det.class_name;
      groups[{det.image_id, group_class}].push_back(det);
    }
  }
  DetectionSet fused;
  for (auto& [key, pool] : groups) {
    std::vector<Detection> kept =
        detection_detail::greedy_suppress(std::move(pool), iou_threshold);
    fused.detections.insert(fused.detections.end(),
                            std::make_move_iterator(kept.begin()),
                            std::make_move_iterator(kept.end()));
  }
  return fused;
}

}  // namespace multires
