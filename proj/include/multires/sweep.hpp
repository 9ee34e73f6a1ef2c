#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "multires/detections.hpp"
#include "multires/errors.hpp"
#include "multires/evaluation.hpp"
#include "multires/spectral.hpp"
#include "multires/svg.hpp"
#include "multires/synthdet.hpp"

namespace multires {

inline constexpr const char* kFusedModelTag = "multi-resolution";

// The training resolutions the experiment grid defaults to.
inline std::vector<ResolutionLevel> default_train_levels() {
  return {ResolutionLevel::r(5), ResolutionLevel::r(10), ResolutionLevel::r(18),
          ResolutionLevel::r(20), ResolutionLevel::full()};
}

struct SweepConfig {
  std::vector<ResolutionLevel> train_levels = default_train_levels();
  std::vector<ResolutionLevel> eval_levels = all_levels();
  double fuse_iou = 0.7;
  double match_iou = 0.5;
  ApProtocol protocol = ApProtocol::Voc2007_11pt;
  std::uint64_t seed = 0;
  // shared model parameters; train_level and seed are set per model
  SynthModelSpec model_params;
};

struct SweepResult {
  EvalReport report;
  std::string csv;
  std::string svg;
};

namespace sweep_detail {

inline void check_levels(const std::vector<ResolutionLevel>& levels,
                         const char* what) {
  if (levels.empty())
    throw InvalidInputError(std::string("sweep: ") + what +
                            " must be non-empty");
  std::set<int> seen;
  for (const auto& level : levels)
    if (!seen.insert(level.ordinal()).second)
      throw InvalidInputError(std::string("sweep: duplicate ") + what + " " +
                              level.name());
}

}  // namespace sweep_detail

// Run the full experiment grid: simulate each training-level model at every
// evaluation level, fuse the per-level results across models, evaluate all
// cells, and render the report as CSV plus an mAP-vs-level SVG chart. All
// models share the sweep seed: random streams are keyed by (seed, image,
// class, object), so models agree on which objects are hard and produce
// near-coincident duplicates that fusion NMS can collapse.
inline SweepResult run_sweep(const SweepConfig& cfg,
                             const DatasetManifest& scene) {
  sweep_detail::check_levels(cfg.train_levels, "train level");
  sweep_detail::check_levels(cfg.eval_levels, "eval level");
  if (!(cfg.fuse_iou > 0.0 && cfg.fuse_iou < 1.0))
    throw InvalidInputError("sweep: fuse iou must lie in (0, 1)");
  if (!(cfg.match_iou > 0.0 && cfg.match_iou < 1.0))
    throw InvalidInputError("sweep: match iou must lie in (0, 1)");

  std::vector<SynthModelSpec> specs;
  specs.reserve(cfg.train_levels.size());
  for (const ResolutionLevel& train : cfg.train_levels) {
    SynthModelSpec spec = cfg.model_params;
    spec.train_level = train;
    spec.seed = cfg.seed;
    validate(spec);
    if (spec.model_tag() == kFusedModelTag)
      throw InvalidInputError("sweep: model tag collides with the fused tag");
    specs.push_back(spec);
  }

  std::vector<ReportRow> rows;
  for (const ResolutionLevel& eval_level : cfg.eval_levels) {
    std::vector<DetectionSet> per_model;
    per_model.reserve(specs.size());
    for (const SynthModelSpec& spec : specs)
      per_model.push_back(simulate(spec, scene, eval_level));
    for (std::size_t i = 0; i < specs.size(); ++i)
      rows.push_back({specs[i].model_tag(), eval_level,
                      evaluate_cell(per_model[i], scene, cfg.protocol,
                                    cfg.match_iou)});
    const DetectionSet fused = fuse(per_model, cfg.fuse_iou);
    rows.push_back({kFusedModelTag, eval_level,
                    evaluate_cell(fused, scene, cfg.protocol, cfg.match_iou)});
  }

  SweepResult result;
  result.report = build_report(std::move(rows));
  result.csv = report_to_csv(result.report);

  // chart series: models in the configured order, fused curve last
  std::map<std::string, std::map<int, double>> curves;
  for (const ReportRow& row : result.report.rows)
    curves[row.model_tag][row.level.ordinal()] = row.scores.map;
  std::vector<ChartSeries> series;
  int x_lo = cfg.eval_levels.front().ordinal();
  int x_hi = x_lo;
  for (const ResolutionLevel& level : cfg.eval_levels) {
    x_lo = std::min(x_lo, level.ordinal());
    x_hi = std::max(x_hi, level.ordinal());
  }
  const auto add_series = [&](const std::string& tag) {
    ChartSeries s;
    s.label = tag;
    for (const auto& [ordinal, map_value] : curves[tag])
      s.points.emplace_back(static_cast<double>(ordinal), map_value);
    series.push_back(std::move(s));
  };
  for (const SynthModelSpec& spec : specs) add_series(spec.model_tag());
  add_series(kFusedModelTag);

  ChartOptions opts;
  opts.x_min = static_cast<double>(x_lo);
  opts.x_max = static_cast<double>(x_hi == x_lo ? x_lo + 1 : x_hi);
  opts.y_min = 0.0;
  opts.y_max = 1.0;
  opts.title = "Detection quality across resolution levels";
  opts.x_label = "resolution level (ordinal; 21 = full spectrum)";
  opts.y_label = "mAP";
  result.svg = line_chart_svg(series, opts);
  return result;
}

}  // namespace multires
