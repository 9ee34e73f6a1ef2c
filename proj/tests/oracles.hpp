#pragma once

// Reference implementations used only by tests. Each one is written directly
// from the defining formula or rule, independent of the library code paths it
// checks, and deliberately favors clarity over speed.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "multires/detections.hpp"
#include "multires/evaluation.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// Direct O(N^2) 2D DFT: G(u,v) = sum_r sum_c x(r,c) e^{-2 pi i (ur/h + vc/w)}
// ---------------------------------------------------------------------------
inline std::vector<std::complex<double>> dft2d_direct(
    const std::vector<double>& x, int width, int height) {
  std::vector<std::complex<double>> out(
      static_cast<std::size_t>(width) * height);
  for (int u = 0; u < height; ++u) {
    for (int v = 0; v < width; ++v) {
      std::complex<double> sum = 0.0;
      for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
          const double angle =
              -2.0 * std::numbers::pi *
              (static_cast<double>(u) * r / height +
               static_cast<double>(v) * c / width);
          sum += x[static_cast<std::size_t>(r) * width + c] *
                 std::complex<double>(std::cos(angle), std::sin(angle));
        }
      }
      out[static_cast<std::size_t>(u) * width + v] = sum;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// IoU by counting integer pixel membership (boxes with integer corners only)
// ---------------------------------------------------------------------------
inline double iou_pixel_count(const multires::BoundingBox& a,
                              const multires::BoundingBox& b) {
  const int lo_x = static_cast<int>(std::min(a.xmin, b.xmin));
  const int hi_x = static_cast<int>(std::max(a.xmax, b.xmax));
  const int lo_y = static_cast<int>(std::min(a.ymin, b.ymin));
  const int hi_y = static_cast<int>(std::max(a.ymax, b.ymax));
  long inter = 0;
  long uni = 0;
  for (int y = lo_y; y <= hi_y; ++y) {
    for (int x = lo_x; x <= hi_x; ++x) {
      const bool in_a = x >= a.xmin && x <= a.xmax && y >= a.ymin && y <= a.ymax;
      const bool in_b = x >= b.xmin && x <= b.xmax && y >= b.ymin && y <= b.ymax;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// Greedy NMS and multi-model fusion, straight from the rule: order by score
// (ties: model tag, image id, box corners, class), keep the best remaining
// detection, discard everything overlapping it strictly above the threshold.
// ---------------------------------------------------------------------------
inline double iou_ref(const multires::BoundingBox& a,
                      const multires::BoundingBox& b) {
  const double x1 = std::max(a.xmin, b.xmin);
  const double y1 = std::max(a.ymin, b.ymin);
  const double x2 = std::min(a.xmax, b.xmax);
  const double y2 = std::min(a.ymax, b.ymax);
  const double w = x2 - x1 + 1.0;
  const double h = y2 - y1 + 1.0;
  if (w <= 0.0 || h <= 0.0) return 0.0;
  const double area_a = (a.xmax - a.xmin + 1.0) * (a.ymax - a.ymin + 1.0);
  const double area_b = (b.xmax - b.xmin + 1.0) * (b.ymax - b.ymin + 1.0);
  return w * h / (area_a + area_b - w * h);
}

inline bool score_before_ref(const multires::Detection& a,
                             const multires::Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.model_tag != b.model_tag) return a.model_tag < b.model_tag;
  if (a.image_id != b.image_id) return a.image_id < b.image_id;
  const auto ka = std::tuple(a.bbox.xmin, a.bbox.ymin, a.bbox.xmax, a.bbox.ymax,
                             a.class_name);
  const auto kb = std::tuple(b.bbox.xmin, b.bbox.ymin, b.bbox.xmax, b.bbox.ymax,
                             b.class_name);
  return ka < kb;
}

inline std::vector<multires::Detection> greedy_nms_ref(
    std::vector<multires::Detection> pool, double threshold) {
  std::stable_sort(pool.begin(), pool.end(), score_before_ref);
  std::vector<multires::Detection> kept;
  while (!pool.empty()) {
    multires::Detection top = pool.front();
    pool.erase(pool.begin());
    std::vector<multires::Detection> survivors;
    for (const multires::Detection& det : pool)
      if (!(iou_ref(top.bbox, det.bbox) > threshold)) survivors.push_back(det);
    pool = std::move(survivors);
    kept.push_back(std::move(top));
  }
  return kept;
}

inline multires::DetectionSet fuse_ref(
    const std::vector<multires::DetectionSet>& per_model, double threshold) {
  std::map<std::pair<std::string, std::string>, std::vector<multires::Detection>>
      groups;
  for (const multires::DetectionSet& set : per_model)
    for (const multires::Detection& det : set.detections)
      groups[{det.image_id, det.class_name}].push_back(det);
  multires::DetectionSet out;
  for (auto& [key, pool] : groups) {
    auto kept = greedy_nms_ref(std::move(pool), threshold);
    out.detections.insert(out.detections.end(), kept.begin(), kept.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force PR / AP from a TP-FP sequence ordered by descending score
// ---------------------------------------------------------------------------
struct PrPoint {
  double recall;
  double precision;
};

inline std::vector<PrPoint> pr_points_ref(const std::vector<bool>& is_tp,
                                          int n_positive) {
  std::vector<PrPoint> points;
  int tp = 0;
  int fp = 0;
  for (bool hit : is_tp) {
    hit ? ++tp : ++fp;
    PrPoint point;
    point.recall = n_positive > 0 ? static_cast<double>(tp) / n_positive : 0.0;
    point.precision = static_cast<double>(tp) / (tp + fp);
    points.push_back(point);
  }
  return points;
}

inline double ap_11pt_ref(const std::vector<bool>& is_tp, int n_positive) {
  if (n_positive == 0) return 0.0;
  const std::vector<PrPoint> points = pr_points_ref(is_tp, n_positive);
  double total = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double level = i / 10.0;
    double best = 0.0;
    for (const PrPoint& point : points)
      if (point.recall >= level && point.precision > best)
        best = point.precision;
    total += best;
  }
  return total / 11.0;
}

inline double ap_auc_ref(const std::vector<bool>& is_tp, int n_positive) {
  if (n_positive == 0) return 0.0;
  const std::vector<PrPoint> points = pr_points_ref(is_tp, n_positive);
  // distinct recall values in increasing order
  std::set<double> recall_set;
  for (const PrPoint& point : points) recall_set.insert(point.recall);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (double recall : recall_set) {
    double best = 0.0;
    for (const PrPoint& point : points)
      if (point.recall >= recall && point.precision > best)
        best = point.precision;
    ap += (recall - prev_recall) * best;
    prev_recall = recall;
  }
  return ap;
}

// Flatten a MatchOutcome into the TP/FP sequence the AP oracles consume.
inline std::vector<bool> tpfp_sequence(const multires::MatchOutcome& outcome) {
  std::vector<bool> seq;
  for (const multires::DetectionMatch& match : outcome.matches) {
    if (match.kind == multires::MatchKind::Ignored) continue;
    seq.push_back(match.kind == multires::MatchKind::TruePositive);
  }
  return seq;
}

}  // namespace oracles
