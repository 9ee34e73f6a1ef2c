#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "multires/evaluation.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using multires::ApProtocol;
using multires::BoundingBox;
using multires::DatasetManifest;
using multires::Detection;
using multires::DetectionSet;
using multires::ImageRecord;
using multires::MatchKind;
using multires::MatchOutcome;

namespace {

DatasetManifest one_image_gt(
    const std::vector<multires::GroundTruthObject>& objects, int w = 100,
    int h = 100) {
  DatasetManifest gt;
  ImageRecord rec;
  rec.image_id = "img";
  rec.width = w;
  rec.height = h;
  rec.objects = objects;
  gt.records.push_back(rec);
  return gt;
}

Detection det(const std::string& image, const std::string& cls,
              BoundingBox box, double score) {
  return Detection{image, cls, box, score, "m"};
}

MatchOutcome outcome_from(const std::vector<MatchKind>& kinds, int n_positive) {
  MatchOutcome outcome;
  outcome.n_positive = n_positive;
  double score = 1.0;
  for (MatchKind kind : kinds) {
    outcome.matches.push_back({kind, score, ""});
    score -= 0.01;
  }
  return outcome;
}

}  // namespace

TEST_CASE("single exact detection is a true positive") {
  const auto gt = one_image_gt({{"dog", {10, 10, 50, 50}, false}});
  DetectionSet dets;
  dets.detections = {det("img", "dog", {10, 10, 50, 50}, 0.8)};
  const MatchOutcome outcome = multires::match_detections(dets, gt, "dog");
  REQUIRE(outcome.matches.size() == 1);
  CHECK(outcome.matches[0].kind == MatchKind::TruePositive);
  CHECK(outcome.matches[0].gt_id == "img#0");
  CHECK(outcome.n_positive == 1);
}

TEST_CASE("a ground truth box is claimed once; later hits become FP") {
  const auto gt = one_image_gt({{"dog", {10, 10, 50, 50}, false}});
  DetectionSet dets;
  dets.detections = {det("img", "dog", {11, 11, 51, 51}, 0.8),
                     det("img", "dog", {10, 10, 50, 50}, 0.9)};
  const MatchOutcome outcome = multires::match_detections(dets, gt, "dog");
  REQUIRE(outcome.matches.size() == 2);
  CHECK(outcome.matches[0].score == 0.9);
  CHECK(outcome.matches[0].kind == MatchKind::TruePositive);
  CHECK(outcome.matches[1].kind == MatchKind::FalsePositive);
}

TEST_CASE("overlap below the matching threshold is a false positive") {
  const auto gt = one_image_gt({{"dog", {10, 10, 50, 50}, false}});
  DetectionSet dets;
  dets.detections = {det("img", "dog", {40, 40, 80, 80}, 0.8)};
  REQUIRE(multires::iou(dets.detections[0].bbox, {10, 10, 50, 50}) < 0.5);
  const MatchOutcome outcome = multires::match_detections(dets, gt, "dog");
  CHECK(outcome.matches[0].kind == MatchKind::FalsePositive);
}

TEST_CASE("detections falling on difficult ground truth are ignored") {
  const auto gt = one_image_gt({{"dog", {10, 10, 50, 50}, true}});
  DetectionSet dets;
  dets.detections = {det("img", "dog", {10, 10, 50, 50}, 0.8)};
  const MatchOutcome outcome = multires::match_detections(dets, gt, "dog");
  CHECK(outcome.matches[0].kind == MatchKind::Ignored);
  CHECK(outcome.n_positive == 0);
}

TEST_CASE("unknown or mixed classes are rejected") {
  const auto gt = one_image_gt({{"dog", {10, 10, 50, 50}, false}});
  DetectionSet dets;
  CHECK_THROWS_AS(multires::match_detections(dets, gt, "unicorn"),
                  multires::InvalidInputError);
  dets.detections = {det("img", "cat", {1, 1, 5, 5}, 0.5)};
  CHECK_THROWS_AS(multires::match_detections(dets, gt, "dog"),
                  multires::InvalidInputError);
}

TEST_CASE("AP of a single covering TP is 1 under both protocols") {
  const MatchOutcome outcome = outcome_from({MatchKind::TruePositive}, 1);
  CHECK(multires::average_precision(outcome, 1, ApProtocol::Voc2007_11pt) == 1.0);
  CHECK(multires::average_precision(outcome, 1, ApProtocol::AucAllPoints) == 1.0);
}

TEST_CASE("AP worked example: [TP, FP, TP] with two positives") {
  const MatchOutcome outcome = outcome_from(
      {MatchKind::TruePositive, MatchKind::FalsePositive,
       MatchKind::TruePositive},
      2);
  const double ap =
      multires::average_precision(outcome, 2, ApProtocol::Voc2007_11pt);
  // 6 grid points see precision 1.0, the remaining 5 see 2/3
  CHECK(ap == Catch::Approx((6.0 + 5.0 * (2.0 / 3.0)) / 11.0).margin(1e-9));
  CHECK(ap == Catch::Approx(28.0 / 33.0).margin(1e-9));
}

TEST_CASE("all-FP outcomes score zero") {
  const MatchOutcome outcome = outcome_from(
      {MatchKind::FalsePositive, MatchKind::FalsePositive}, 3);
  CHECK(multires::average_precision(outcome, 3, ApProtocol::Voc2007_11pt) == 0.0);
  CHECK(multires::average_precision(outcome, 3, ApProtocol::AucAllPoints) == 0.0);
}

TEST_CASE("zero positives pin AP to zero") {
  const MatchOutcome outcome = outcome_from({MatchKind::FalsePositive}, 0);
  CHECK(multires::average_precision(outcome, 0, ApProtocol::Voc2007_11pt) == 0.0);
}

TEST_CASE("ignored entries do not enter the PR curve") {
  const MatchOutcome with_ignored = outcome_from(
      {MatchKind::TruePositive, MatchKind::Ignored, MatchKind::TruePositive},
      2);
  const MatchOutcome without = outcome_from(
      {MatchKind::TruePositive, MatchKind::TruePositive}, 2);
  for (ApProtocol proto : {ApProtocol::Voc2007_11pt, ApProtocol::AucAllPoints})
    CHECK(multires::average_precision(with_ignored, 2, proto) ==
          multires::average_precision(without, 2, proto));
}

TEST_CASE("11-pt AP matches the brute-force oracle on random outcomes") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> n_det(0, 8);
  std::uniform_int_distribution<int> n_pos(1, 4);
  std::uniform_int_distribution<int> coin(0, 2);
  for (int trial = 0; trial < 500; ++trial) {
    const int positives = n_pos(rng);
    const int dets = n_det(rng);
    std::vector<MatchKind> kinds;
    int tp_budget = positives;
    for (int i = 0; i < dets; ++i) {
      const int c = coin(rng);
      if (c == 0 && tp_budget > 0) {
        kinds.push_back(MatchKind::TruePositive);
        --tp_budget;
      } else if (c == 1) {
        kinds.push_back(MatchKind::Ignored);
      } else {
        kinds.push_back(MatchKind::FalsePositive);
      }
    }
    const MatchOutcome outcome = outcome_from(kinds, positives);
    const multires::PRCurve curve = multires::pr_curve(outcome, positives);
    REQUIRE(curve.recall.size() == curve.precision.size());
    CHECK(std::is_sorted(curve.recall.begin(), curve.recall.end()));
    const auto seq = oracles::tpfp_sequence(outcome);
    CHECK(multires::average_precision(outcome, positives,
                                      ApProtocol::Voc2007_11pt) ==
          oracles::ap_11pt_ref(seq, positives));
    CHECK(multires::average_precision(outcome, positives,
                                      ApProtocol::AucAllPoints) ==
          Catch::Approx(oracles::ap_auc_ref(seq, positives)).margin(1e-12));
  }
}

TEST_CASE("AP monotonicity under prepended TP and appended FP") {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> n_det(0, 6);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int positives = 3;
    std::vector<MatchKind> kinds;
    int tp_budget = positives - 1;  // leave headroom for the prepended TP
    const int dets = n_det(rng);
    for (int i = 0; i < dets; ++i) {
      if (coin(rng) && tp_budget > 0) {
        kinds.push_back(MatchKind::TruePositive);
        --tp_budget;
      } else {
        kinds.push_back(MatchKind::FalsePositive);
      }
    }
    const double base = multires::average_precision(
        outcome_from(kinds, positives), positives, ApProtocol::Voc2007_11pt);
    std::vector<MatchKind> with_tp = kinds;
    with_tp.insert(with_tp.begin(), MatchKind::TruePositive);
    CHECK(multires::average_precision(outcome_from(with_tp, positives),
                                      positives,
                                      ApProtocol::Voc2007_11pt) >= base);
    std::vector<MatchKind> with_fp = kinds;
    with_fp.push_back(MatchKind::FalsePositive);
    CHECK(multires::average_precision(outcome_from(with_fp, positives),
                                      positives,
                                      ApProtocol::Voc2007_11pt) <= base);
  }
}

TEST_CASE("matching is invariant to detection input order") {
  std::mt19937_64 rng(107);
  const auto gt = one_image_gt({{"dog", {10, 10, 40, 40}, false},
                                {"dog", {50, 50, 90, 90}, false},
                                {"dog", {20, 60, 45, 95}, true}});
  DetectionSet dets;
  for (int i = 0; i < 12; ++i)
    dets.detections.push_back(helpers::random_detection(rng, "img", "dog", "m"));
  const MatchOutcome base = multires::match_detections(dets, gt, "dog");
  for (int shuffle = 0; shuffle < 5; ++shuffle) {
    std::shuffle(dets.detections.begin(), dets.detections.end(), rng);
    const MatchOutcome again = multires::match_detections(dets, gt, "dog");
    REQUIRE(again.matches.size() == base.matches.size());
    for (std::size_t i = 0; i < base.matches.size(); ++i) {
      CHECK(again.matches[i].kind == base.matches[i].kind);
      CHECK(again.matches[i].gt_id == base.matches[i].gt_id);
    }
  }
}

TEST_CASE("marking a matched ground truth difficult ignores it, never FPs it") {
  const std::vector<multires::GroundTruthObject> plain{
      {"dog", {10, 10, 50, 50}, false}};
  const std::vector<multires::GroundTruthObject> difficult{
      {"dog", {10, 10, 50, 50}, true}};
  DetectionSet dets;
  dets.detections = {det("img", "dog", {10, 10, 50, 50}, 0.9)};
  const MatchOutcome before =
      multires::match_detections(dets, one_image_gt(plain), "dog");
  const MatchOutcome after =
      multires::match_detections(dets, one_image_gt(difficult), "dog");
  CHECK(before.matches[0].kind == MatchKind::TruePositive);
  CHECK(before.n_positive == 1);
  CHECK(after.matches[0].kind == MatchKind::Ignored);
  CHECK(after.n_positive == 0);
}

// ---------------------------------------------------------------------------
// evaluate_cell and report emission
// ---------------------------------------------------------------------------

TEST_CASE("perfect detections give mAP 1 on covered classes") {
  DatasetManifest gt;
  for (int i = 0; i < 3; ++i) {
    ImageRecord rec;
    rec.image_id = "img" + std::to_string(i);
    rec.width = 200;
    rec.height = 200;
    for (std::size_t k = 0; k < multires::kVocClasses.size(); ++k)
      rec.objects.push_back({std::string(multires::kVocClasses[k]),
                             {10.0 + k, 10.0, 60.0 + k, 60.0},
                             false});
    gt.records.push_back(rec);
  }
  DetectionSet dets;
  for (const ImageRecord& rec : gt.records)
    for (const auto& obj : rec.objects)
      dets.detections.push_back(
          Detection{rec.image_id, obj.class_name, obj.bbox, 1.0, "m"});
  const multires::CellScores scores =
      multires::evaluate_cell(dets, gt, ApProtocol::Voc2007_11pt);
  CHECK(scores.map == 1.0);
  CHECK(scores.zero_gt_classes.empty());
}

TEST_CASE("empty detections give mAP 0") {
  const auto gt = one_image_gt({{"dog", {10, 10, 50, 50}, false}});
  const multires::CellScores scores =
      multires::evaluate_cell(DetectionSet{}, gt, ApProtocol::Voc2007_11pt);
  CHECK(scores.map == 0.0);
  // 19 classes carry no ground truth in this slice
  CHECK(scores.zero_gt_classes.size() == 19);
}

TEST_CASE("evaluate_cell equals the per-class hand computation") {
  DatasetManifest gt = one_image_gt({{"dog", {10, 10, 50, 50}, false},
                                     {"dog", {60, 60, 90, 90}, false},
                                     {"cat", {10, 60, 40, 95}, false}});
  DetectionSet dets;
  // dog: TP at 0.9, FP at 0.85, TP at 0.8  -> AP = 28/33
  dets.detections = {det("img", "dog", {10, 10, 50, 50}, 0.9),
                     det("img", "dog", {10, 30, 50, 70}, 0.85),
                     det("img", "dog", {60, 60, 90, 90}, 0.8),
                     // cat: one exact hit -> AP = 1
                     det("img", "cat", {10, 60, 40, 95}, 0.7)};
  const multires::CellScores scores =
      multires::evaluate_cell(dets, gt, ApProtocol::Voc2007_11pt);
  const double expected_map = (28.0 / 33.0 + 1.0) / 20.0;
  CHECK(scores.map == Catch::Approx(expected_map).margin(1e-12));
  CHECK(scores.class_ap[multires::voc_class_index("dog")] ==
        Catch::Approx(28.0 / 33.0).margin(1e-12));
  CHECK(scores.class_ap[multires::voc_class_index("cat")] == 1.0);

  DetectionSet bad;
  bad.detections = {det("img", "unicorn", {1, 1, 5, 5}, 0.5)};
  CHECK_THROWS_AS(multires::evaluate_cell(bad, gt, ApProtocol::Voc2007_11pt),
                  multires::InvalidInputError);
}

TEST_CASE("report CSV layout and round trip") {
  multires::CellScores scores;
  scores.map = 0.482193;
  for (std::size_t k = 0; k < scores.class_ap.size(); ++k)
    scores.class_ap[k] = k / 20.0;
  multires::ReportRow row{"full-spectrum", multires::ResolutionLevel::full(),
                          scores};
  const multires::EvalReport single = multires::build_report({row});
  const std::string csv = multires::report_to_csv(single);
  const std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 2);  // header + one row
  CHECK(csv.find("model,level,ordinal,mAP,ap_aeroplane") == 0);
  CHECK(csv.find("full-spectrum,full,21,0.4822") != std::string::npos);

  // 5 models x 21 levels
  std::vector<multires::ReportRow> rows;
  for (const char* tag : {"5/20", "10/20", "18/20", "20/20", "full-spectrum"})
    for (const auto& level : multires::all_levels())
      rows.push_back({tag, level, scores});
  const multires::EvalReport grid = multires::build_report(rows);
  const std::string grid_csv = multires::report_to_csv(grid);
  CHECK(std::count(grid_csv.begin(), grid_csv.end(), '\n') == 106);

  const multires::EvalReport parsed = multires::parse_report_csv(grid_csv);
  REQUIRE(parsed.rows.size() == grid.rows.size());
  for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
    CHECK(parsed.rows[i].model_tag == grid.rows[i].model_tag);
    CHECK(parsed.rows[i].level == grid.rows[i].level);
    // values survive exactly at 4-digit precision
    CHECK(multires::report_detail::format4(parsed.rows[i].scores.map) ==
          multires::report_detail::format4(grid.rows[i].scores.map));
  }
  CHECK(multires::report_to_csv(parsed) == grid_csv);

  CHECK_THROWS_AS(multires::build_report({}), multires::InvalidInputError);
  CHECK_THROWS_AS(multires::parse_report_csv("nonsense"), multires::SchemaError);
}

TEST_CASE("report rows are sorted by model tag then ordinal") {
  multires::CellScores scores;
  std::vector<multires::ReportRow> rows{
      {"b", multires::ResolutionLevel::r(5), scores},
      {"a", multires::ResolutionLevel::full(), scores},
      {"a", multires::ResolutionLevel::r(2), scores}};
  const multires::EvalReport report = multires::build_report(rows);
  CHECK(report.rows[0].model_tag == "a");
  CHECK(report.rows[0].level.ordinal() == 2);
  CHECK(report.rows[1].model_tag == "a");
  CHECK(report.rows[1].level.ordinal() == 21);
  CHECK(report.rows[2].model_tag == "b");
}

TEST_CASE("fuse_oracle keeps the best-overlap detection per ground truth") {
  const auto gt = one_image_gt({{"dog", {10, 10, 50, 50}, false}});
  DetectionSet m1;
  m1.detections = {Detection{"img", "dog", {12, 12, 52, 52}, 0.4, "m1"},
                   Detection{"img", "dog", {70, 70, 90, 90}, 0.9, "m1"}};
  DetectionSet m2;
  m2.detections = {Detection{"img", "dog", {10, 10, 50, 50}, 0.2, "m2"}};
  const DetectionSet kept = multires::fuse_oracle({m1, m2}, gt);
  // the exact-overlap box wins despite its low score; the stray box is dropped
  REQUIRE(kept.detections.size() == 1);
  CHECK(kept.detections[0].model_tag == "m2");
}
