#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <string>

#include "multires/sweep.hpp"
#include "multires/xml.hpp"

using multires::DatasetManifest;
using multires::ResolutionLevel;
using multires::SweepConfig;
using multires::SweepResult;

namespace {

DatasetManifest small_scene(int n_images, std::uint64_t seed) {
  multires::SceneConfig cfg;
  cfg.n_images = n_images;
  cfg.seed = seed;
  return multires::generate_scene(cfg);
}

}  // namespace

TEST_CASE("default sweep covers the full grid: 126 cells") {
  SweepConfig cfg;
  cfg.seed = 42;
  const SweepResult result = run_sweep(cfg, small_scene(12, 42));
  // 5 models x 21 levels plus 21 fused cells
  CHECK(result.report.rows.size() == 126);
  CHECK(std::count(result.csv.begin(), result.csv.end(), '\n') == 127);
  // every model contributes one row per eval level
  std::map<std::string, int> rows_per_tag;
  for (const auto& row : result.report.rows) ++rows_per_tag[row.model_tag];
  CHECK(rows_per_tag[multires::kFusedModelTag] == 21);
  CHECK(rows_per_tag["5/20"] == 21);
  CHECK(rows_per_tag["full-spectrum"] == 21);
}

TEST_CASE("sweep restricted to the full-spectrum level has 6 cells") {
  SweepConfig cfg;
  cfg.seed = 42;
  cfg.eval_levels = {ResolutionLevel::full()};
  const SweepResult result = run_sweep(cfg, small_scene(12, 42));
  CHECK(result.report.rows.size() == 6);
  CHECK(std::count(result.csv.begin(), result.csv.end(), '\n') == 7);
}

TEST_CASE("sweep output is deterministic") {
  SweepConfig cfg;
  cfg.seed = 7;
  cfg.eval_levels = {ResolutionLevel::r(4), ResolutionLevel::r(12),
                     ResolutionLevel::full()};
  const DatasetManifest scene = small_scene(10, 7);
  const SweepResult a = run_sweep(cfg, scene);
  const SweepResult b = run_sweep(cfg, scene);
  CHECK(a.csv == b.csv);
  CHECK(a.svg == b.svg);
}

TEST_CASE("sweep SVG is well-formed XML with one curve per model plus fusion") {
  SweepConfig cfg;
  cfg.seed = 3;
  cfg.eval_levels = {ResolutionLevel::r(5), ResolutionLevel::r(15),
                     ResolutionLevel::full()};
  const SweepResult result = run_sweep(cfg, small_scene(8, 3));
  const multires::xml::Node root = multires::xml::parse(result.svg);
  CHECK(root.name == "svg");
  int polylines = 0;
  for (const auto& child : root.children)
    if (child.name == "polyline") ++polylines;
  CHECK(polylines == 6);
  // legend mentions the fused model
  CHECK(result.svg.find(multires::kFusedModelTag) != std::string::npos);
}

TEST_CASE("sweep validates its configuration") {
  const DatasetManifest scene = small_scene(4, 1);
  SweepConfig cfg;
  cfg.eval_levels = {};
  CHECK_THROWS_AS(run_sweep(cfg, scene), multires::InvalidInputError);
  cfg = SweepConfig{};
  cfg.eval_levels = {ResolutionLevel::r(3), ResolutionLevel::r(3)};
  CHECK_THROWS_AS(run_sweep(cfg, scene), multires::InvalidInputError);
  cfg = SweepConfig{};
  cfg.fuse_iou = 1.0;
  CHECK_THROWS_AS(run_sweep(cfg, scene), multires::InvalidInputError);
  cfg = SweepConfig{};
  cfg.match_iou = 0.0;
  CHECK_THROWS_AS(run_sweep(cfg, scene), multires::InvalidInputError);
}
