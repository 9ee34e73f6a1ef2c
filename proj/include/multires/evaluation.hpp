#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "multires/detections.hpp"
#include "multires/errors.hpp"
#include "multires/spectral.hpp"
#include "multires/voc.hpp"

namespace multires {

enum class ApProtocol { Voc2007_11pt, AucAllPoints };

inline std::optional<ApProtocol> parse_protocol(std::string_view text) {
  if (text == "11pt" || text == "voc2007") return ApProtocol::Voc2007_11pt;
  if (text == "auc" || text == "all-points") return ApProtocol::AucAllPoints;
  return std::nullopt;
}

enum class MatchKind { TruePositive, FalsePositive, Ignored };

struct DetectionMatch {
  MatchKind kind = MatchKind::FalsePositive;
  double score = 0.0;
  std::string gt_id;  // "<image_id>#<object index>" when matched, else empty
};

// Per-class matching result, detections in canonical score order.
struct MatchOutcome {
  std::vector<DetectionMatch> matches;
  int n_positive = 0;  // non-difficult ground-truth count for the class
};

// VOC-style greedy matching for one class. Detections are visited in score
// order; each claims the unclaimed non-difficult ground-truth box with the
// highest overlap when that overlap reaches iou_match, and is a false
// positive otherwise. A detection whose best overlap is a difficult box at
// or above the threshold is ignored: it neither scores nor costs anything.
inline MatchOutcome match_detections(const DetectionSet& dets,
                                     const DatasetManifest& gt,
                                     const std::string& class_name,
                                     double iou_match = 0.5) {
  if (!is_voc_class(class_name))
    throw InvalidInputError("match_detections: unknown class \"" + class_name +
                            "\"");
  for (const Detection& det : dets.detections)
    if (det.class_name != class_name)
      throw InvalidInputError(
          "match_detections: detections must be restricted to one class");

  struct GtEntry {
    BoundingBox box;
    bool difficult = false;
    bool claimed = false;
    std::string id;
  };
  std::map<std::string, std::vector<GtEntry>> gt_by_image;
  MatchOutcome outcome;
  for (const ImageRecord& record : gt.records) {
    for (std::size_t i = 0; i < record.objects.size(); ++i) {
      const GroundTruthObject& obj = record.objects[i];
      if (obj.class_name != class_name) continue;
      gt_by_image[record.image_id].push_back(
          {obj.bbox, obj.difficult, false,
           record.image_id + "#" + std::to_string(i)});
      if (!obj.difficult) ++outcome.n_positive;
    }
  }

  std::vector<Detection> sorted = dets.detections;
  canonical_sort(sorted);
  outcome.matches.reserve(sorted.size());
  for (const Detection& det : sorted) {
    double best_open = 0.0;
    double best_difficult = 0.0;
    GtEntry* open_entry = nullptr;
    const GtEntry* difficult_entry = nullptr;
    if (const auto it = gt_by_image.find(det.image_id); it != gt_by_image.end()) {
      for (GtEntry& entry : it->second) {
        const double overlap = iou(det.bbox, entry.box);
        if (entry.difficult) {
          if (overlap > best_difficult) {
            best_difficult = overlap;
            difficult_entry = &entry;
          }
        } else if (!entry.claimed && overlap > best_open) {
          best_open = overlap;
          open_entry = &entry;
        }
      }
    }
    DetectionMatch match;
    match.score = det.score;
    if (best_difficult >= iou_match && best_difficult > best_open) {
      match.kind = MatchKind::Ignored;
      match.gt_id = difficult_entry->id;
    } else if (open_entry != nullptr && best_open >= iou_match) {
      match.kind = MatchKind::TruePositive;
      match.gt_id = open_entry->id;
      open_entry->claimed = true;
    } else {
      match.kind = MatchKind::FalsePositive;
    }
    outcome.matches.push_back(std::move(match));
  }
  return outcome;
}

// Recall / precision after each counted detection (ignored ones are skipped).
struct PRCurve {
  std::vector<double> recall;
  std::vector<double> precision;
};

inline PRCurve pr_curve(const MatchOutcome& outcome, int n_positive) {
  PRCurve curve;
  int tp = 0;
  int fp = 0;
  for (const DetectionMatch& match : outcome.matches) {
    if (match.kind == MatchKind::Ignored) continue;
    match.kind == MatchKind::TruePositive ? ++tp : ++fp;
    curve.recall.push_back(
        n_positive > 0 ? static_cast<double>(tp) / n_positive : 0.0);
    curve.precision.push_back(static_cast<double>(tp) /
                              static_cast<double>(tp + fp));
  }
  return curve;
}

// Average precision. The 11-point protocol averages, over the recall grid
// r = i/10 for i = 0..10, the best precision among points whose recall
// reaches r. The all-points protocol integrates the right-envelope of the
// PR curve exactly. A class with no positives has AP defined as 0.
inline double average_precision(const MatchOutcome& outcome, int n_positive,
                                ApProtocol protocol) {
  if (n_positive < 0)
    throw InvalidInputError("average_precision: n_positive must be >= 0");
  if (n_positive == 0) return 0.0;
  const PRCurve curve = pr_curve(outcome, n_positive);
  if (protocol == ApProtocol::Voc2007_11pt) {
    double sum = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const double level = i / 10.0;
      double best = 0.0;
      for (std::size_t j = 0; j < curve.recall.size(); ++j)
        if (curve.recall[j] >= level) best = std::max(best, curve.precision[j]);
      sum += best;
    }
    return sum / 11.0;
  }
  std::vector<double> mrec{0.0};
  mrec.insert(mrec.end(), curve.recall.begin(), curve.recall.end());
  mrec.push_back(1.0);
  std::vector<double> mpre{0.0};
  mpre.insert(mpre.end(), curve.precision.begin(), curve.precision.end());
  mpre.push_back(0.0);
  for (std::size_t i = mpre.size() - 1; i-- > 0;)
    mpre[i] = std::max(mpre[i], mpre[i + 1]);
  double ap = 0.0;
  for (std::size_t i = 0; i + 1 < mrec.size(); ++i)
    if (mrec[i + 1] != mrec[i]) ap += (mrec[i + 1] - mrec[i]) * mpre[i + 1];
  return ap;
}

// Per-class APs over the full 20-class vocabulary plus their mean. Classes
// with no ground truth in the slice keep AP 0 and are listed so reports can
// flag them instead of silently shrinking the mean.
struct CellScores {
  std::array<double, 20> class_ap{};
  double map = 0.0;
  std::vector<std::string> zero_gt_classes;
};

inline CellScores evaluate_cell(const DetectionSet& dets,
                                const DatasetManifest& gt, ApProtocol protocol,
                                double iou_match = 0.5) {
  for (const Detection& det : dets.detections)
    if (!is_voc_class(det.class_name))
      throw InvalidInputError("evaluate_cell: unknown class \"" +
                              det.class_name + "\"");
  CellScores scores;
  double total = 0.0;
  for (std::size_t k = 0; k < kVocClasses.size(); ++k) {
    const std::string class_name(kVocClasses[k]);
    DetectionSet slice;
    for (const Detection& det : dets.detections)
      if (det.class_name == class_name) slice.detections.push_back(det);
    const MatchOutcome outcome =
        match_detections(slice, gt, class_name, iou_match);
    if (outcome.n_positive == 0) {
      scores.zero_gt_classes.push_back(class_name);
      scores.class_ap[k] = 0.0;
    } else {
      scores.class_ap[k] =
          average_precision(outcome, outcome.n_positive, protocol);
    }
    total += scores.class_ap[k];
  }
  scores.map = total / static_cast<double>(kVocClasses.size());
  return scores;
}

// ---------------------------------------------------------------------------
// Report grid: one row per (model, level) cell
// ---------------------------------------------------------------------------

struct ReportRow {
  std::string model_tag;
  ResolutionLevel level = ResolutionLevel::full();
  CellScores scores;
};

struct EvalReport {
  std::vector<ReportRow> rows;  // sorted by (model_tag, level ordinal)
};

inline EvalReport build_report(std::vector<ReportRow> rows) {
  if (rows.empty())
    throw InvalidInputError("build_report: at least one cell is required");
  for (const ReportRow& row : rows)
    if (row.model_tag.find(',') != std::string::npos ||
        row.model_tag.find('\n') != std::string::npos)
      throw InvalidInputError("build_report: model tag must not contain ',' or newline");
  std::sort(rows.begin(), rows.end(),
            [](const ReportRow& a, const ReportRow& b) {
              if (a.model_tag != b.model_tag) return a.model_tag < b.model_tag;
              return a.level.ordinal() < b.level.ordinal();
            });
  return EvalReport{std::move(rows)};
}

namespace report_detail {

inline std::string format4(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

}  // namespace report_detail

inline std::string report_csv_header() {
  std::string header = "model,level,ordinal,mAP";
  for (const auto& class_name : kVocClasses) {
    header += ",ap_";
    header += class_name;
  }
  return header;
}

// CSV emission: header then one row per cell, metrics with 4 fractional
// digits, rows already sorted by build_report.
inline std::string report_to_csv(const EvalReport& report) {
  std::string out = report_csv_header();
  out += '\n';
  for (const ReportRow& row : report.rows) {
    out += row.model_tag;
    out += ',';
    out += row.level.name();
    out += ',';
    out += std::to_string(row.level.ordinal());
    out += ',';
    out += report_detail::format4(row.scores.map);
    for (double ap : row.scores.class_ap) {
      out += ',';
      out += report_detail::format4(ap);
    }
    out += '\n';
  }
  return out;
}

inline EvalReport parse_report_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    if (nl > start) lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.empty() || lines[0] != report_csv_header())
    throw SchemaError("report csv: missing or malformed header");
  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : lines[i]) {
      if (ch == ',') {
        fields.push_back(current);
        current.clear();
      } else if (ch != '\r') {
        current.push_back(ch);
      }
    }
    fields.push_back(current);
    if (fields.size() != 4 + kVocClasses.size())
      throw SchemaError("report csv: line " + std::to_string(i + 1) +
                        ": wrong field count");
    ReportRow row;
    row.model_tag = fields[0];
    const auto level = ResolutionLevel::parse(fields[1]);
    if (!level)
      throw SchemaError("report csv: line " + std::to_string(i + 1) +
                        ": bad level \"" + fields[1] + "\"");
    row.level = *level;
    if (fields[2] != std::to_string(row.level.ordinal()))
      throw SchemaError("report csv: line " + std::to_string(i + 1) +
                        ": ordinal does not match level");
    try {
      row.scores.map = std::stod(fields[3]);
      for (std::size_t k = 0; k < kVocClasses.size(); ++k)
        row.scores.class_ap[k] = std::stod(fields[4 + k]);
    } catch (const std::exception&) {
      throw SchemaError("report csv: line " + std::to_string(i + 1) +
                        ": malformed number");
    }
    rows.push_back(std::move(row));
  }
  return build_report(std::move(rows));
}

inline void write_report_csv(const EvalReport& report,
                             const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write report file: " + path.string());
  file << report_to_csv(report);
}

// ---------------------------------------------------------------------------
// Ground-truth-aware combination (evaluation-only)
// ---------------------------------------------------------------------------

// Keeps, for every ground-truth box, the pooled detection of the same class
// with the highest positive overlap. This leaks test labels into inference,
// so it is never part of the default pipeline; it exists to quantify an
// upper bound on what label-free fusion could select.
inline DetectionSet fuse_oracle(const std::vector<DetectionSet>& per_model,
                                const DatasetManifest& gt) {
  std::map<std::string, std::size_t> tag_owner;
  for (std::size_t i = 0; i < per_model.size(); ++i) {
    enforce_detection_cap(per_model[i]);
    for (const Detection& det : per_model[i].detections) {
      auto [it, inserted] = tag_owner.emplace(det.model_tag, i);
      if (!inserted && it->second != i)
        throw InvalidInputError("fuse_oracle: model tag \"" + det.model_tag +
                                "\" appears in more than one input set");
    }
  }
  std::map<std::pair<std::string, std::string>, std::vector<Detection>> pool;
  for (const DetectionSet& set : per_model)
    for (const Detection& det : set.detections)
      pool[{det.image_id, det.class_name}].push_back(det);
  for (auto& [key, dets] : pool) canonical_sort(dets);

  DetectionSet kept;
  std::set<const Detection*> emitted;  // one output per pooled detection
  for (const ImageRecord& record : gt.records) {
    for (const GroundTruthObject& obj : record.objects) {
      const auto it = pool.find({record.image_id, obj.class_name});
      if (it == pool.end()) continue;
      const Detection* best = nullptr;
      double best_overlap = 0.0;
      for (const Detection& det : it->second) {
        const double overlap = iou(det.bbox, obj.bbox);
        if (overlap > best_overlap) {
          best_overlap = overlap;
          best = &det;
        }
      }
      if (best != nullptr && emitted.insert(best).second)
        kept.detections.push_back(*best);
    }
  }
  return kept;
}

}  // namespace multires
