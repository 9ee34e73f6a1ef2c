// multires -- command-line front end for the multi-resolution detection
// toolkit: frequency-domain blurring, synthetic detection runs, multi-model
// fusion, VOC-style evaluation and the full sweep experiment.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "multires/multires.hpp"

namespace fs = std::filesystem;
using namespace multires;

namespace {

// flag-value problems that should exit with the usage code (1)
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t env_default_seed() {
  const char* env = std::getenv("MULTIRES_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw UsageError("MULTIRES_SEED must be an unsigned integer");
  return value;
}

ResolutionLevel parse_level_or_fail(const std::string& text) {
  const auto level = ResolutionLevel::parse(text);
  if (!level)
    throw UsageError("unknown resolution level \"" + text +
                     "\" (expected \"full\", \"R<c>\" or an integer 1..20)");
  return *level;
}

// Comma-separated level list; tokens are levels, numeric ranges ("3-7") or
// the keyword "all".
std::vector<ResolutionLevel> parse_level_list(const std::string& text) {
  std::vector<ResolutionLevel> levels;
  std::string token;
  std::vector<std::string> tokens;
  for (char ch : text) {
    if (ch == ',') {
      tokens.push_back(token);
      token.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      token.push_back(ch);
    }
  }
  tokens.push_back(token);
  for (const std::string& tok : tokens) {
    if (tok.empty()) continue;
    if (tok == "all") {
      for (const auto& level : all_levels()) levels.push_back(level);
      continue;
    }
    const std::size_t dash = tok.find('-');
    if (dash != std::string::npos && dash > 0) {
      try {
        const int lo = std::stoi(tok.substr(0, dash));
        const int hi = std::stoi(tok.substr(dash + 1));
        if (lo < 1 || hi > kNumCutoffLevels || lo > hi)
          throw UsageError("bad level range \"" + tok + "\"");
        for (int c = lo; c <= hi; ++c) levels.push_back(ResolutionLevel::r(c));
        continue;
      } catch (const UsageError&) {
        throw;
      } catch (const std::exception&) {
        throw UsageError("bad level range \"" + tok + "\"");
      }
    }
    levels.push_back(parse_level_or_fail(tok));
  }
  if (levels.empty()) throw UsageError("level list is empty");
  return levels;
}

ApProtocol parse_protocol_or_fail(const std::string& text) {
  const auto protocol = parse_protocol(text);
  if (!protocol)
    throw UsageError("unknown AP protocol \"" + text +
                     "\" (expected \"11pt\" or \"auc\")");
  return *protocol;
}

struct ModelFlags {
  double p_max = 0.9;
  double sigma_mismatch = 6.0;
  double lowres_gamma = 2.0;
  double jitter_frac = 0.05;
  double fp_rate = 0.05;
  double score_noise = 0.1;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--p-max", p_max, "peak detection probability");
    cmd.add_option("--sigma-mismatch", sigma_mismatch,
                   "tolerance to train/eval level mismatch, in ordinals");
    cmd.add_option("--lowres-gamma", lowres_gamma,
                   "low-resolution difficulty penalty");
    cmd.add_option("--jitter-frac", jitter_frac,
                   "box corner jitter as a fraction of the side length");
    cmd.add_option("--fp-rate", fp_rate,
                   "expected false positives per image per class");
    cmd.add_option("--score-noise", score_noise, "score noise std deviation");
  }

  SynthModelSpec to_spec() const {
    SynthModelSpec spec;
    spec.p_max = p_max;
    spec.sigma_mismatch = sigma_mismatch;
    spec.lowres_gamma = lowres_gamma;
    spec.jitter_frac = jitter_frac;
    spec.fp_rate = fp_rate;
    spec.score_noise = score_noise;
    return spec;
  }
};

DatasetManifest load_scene(const std::string& manifest_path, int synth_images,
                           std::uint64_t seed) {
  if (!manifest_path.empty() && synth_images > 0)
    throw UsageError("--manifest and --synth are mutually exclusive");
  if (manifest_path.empty() && synth_images <= 0)
    throw UsageError("one of --manifest or --synth is required");
  if (!manifest_path.empty()) return read_manifest(manifest_path);
  SceneConfig cfg;
  cfg.n_images = synth_images;
  cfg.seed = seed;
  return generate_scene(cfg);
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int run_ingest(const std::string& annotations, const std::string& ids_file,
               const std::string& split, const std::string& out) {
  std::vector<std::string> ids;
  if (!ids_file.empty()) {
    std::ifstream file(ids_file);
    if (!file) throw NotFoundError("cannot open ids file: " + ids_file);
    std::string line;
    while (std::getline(file, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
        line.pop_back();
      if (!line.empty()) ids.push_back(line);
    }
  } else {
    for (const auto& entry : fs::directory_iterator(annotations))
      if (entry.is_regular_file() && entry.path().extension() == ".xml")
        ids.push_back(entry.path().stem().string());
    std::sort(ids.begin(), ids.end());
  }
  const DatasetManifest manifest = load_manifest(annotations, ids, split);
  write_manifest(manifest, out);
  std::cout << "wrote " << manifest.records.size() << " records to " << out
            << "\n";
  return 0;
}

int run_blur(const std::string& in_dir, const std::string& out_dir,
             const std::string& levels_text) {
  const std::vector<ResolutionLevel> levels = parse_level_list(levels_text);
  if (!fs::is_directory(in_dir))
    throw NotFoundError("input directory not found: " + in_dir);
  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(in_dir))
    if (entry.is_regular_file() && format_from_extension(entry.path()))
      inputs.push_back(entry.path());
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) {
    std::cerr << "warning: no decodable images in " << in_dir << "\n";
    return 0;
  }
  bool any_failed = false;
  for (const fs::path& input : inputs) {
    try {
      const PlanarImage img = load_image(input);
      const auto pyramid = generate_pyramid(img, levels);
      for (const auto& [level, filtered] : pyramid) {
        const fs::path dir = fs::path(out_dir) / level.name();
        fs::create_directories(dir);
        save_image(filtered, dir / input.filename());
      }
    } catch (const Error& e) {
      std::cerr << "error: " << input.string() << ": " << e.what() << "\n";
      any_failed = true;
    }
  }
  return any_failed ? 2 : 0;
}

int run_simulate(const std::string& manifest_path, int synth_images,
                 const std::string& train_text, const std::string& eval_text,
                 std::uint64_t seed, const ModelFlags& flags,
                 const std::string& out) {
  const DatasetManifest scene = load_scene(manifest_path, synth_images, seed);
  SynthModelSpec spec = flags.to_spec();
  spec.train_level = parse_level_or_fail(train_text);
  spec.seed = seed;
  const DetectionSet dets =
      simulate(spec, scene, parse_level_or_fail(eval_text));
  write_detections(dets, out);
  std::cout << "wrote " << dets.detections.size() << " detections to " << out
            << "\n";
  return 0;
}

int run_fuse(const std::vector<std::string>& inputs, double iou_threshold,
             bool cross_class, const std::string& out) {
  std::vector<DetectionSet> sets;
  sets.reserve(inputs.size());
  for (const std::string& path : inputs) sets.push_back(read_detections(path));
  const DetectionSet fused = fuse(sets, iou_threshold, cross_class);
  write_detections(fused, out);
  std::cout << "wrote " << fused.detections.size() << " detections to " << out
            << "\n";
  return 0;
}

int run_eval(const std::string& dets_path, const std::string& manifest_path,
             int synth_images, std::uint64_t seed,
             const std::string& protocol_text, double match_iou,
             const std::string& level_text, const std::string& out) {
  const DatasetManifest gt = load_scene(manifest_path, synth_images, seed);
  const ApProtocol protocol = parse_protocol_or_fail(protocol_text);
  const ResolutionLevel level = parse_level_or_fail(level_text);
  const DetectionSet dets = read_detections(dets_path);
  std::map<std::string, DetectionSet> by_model;
  for (const Detection& det : dets.detections)
    by_model[det.model_tag].detections.push_back(det);
  if (by_model.empty()) by_model.emplace("none", DetectionSet{});
  std::vector<ReportRow> rows;
  for (const auto& [tag, subset] : by_model) {
    ReportRow row;
    row.model_tag = tag;
    row.level = level;
    row.scores = evaluate_cell(subset, gt, protocol, match_iou);
    for (const std::string& cls : row.scores.zero_gt_classes)
      std::cerr << "warning: class " << cls
                << " has no ground truth; its AP is pinned to 0\n";
    rows.push_back(std::move(row));
  }
  const EvalReport report = build_report(std::move(rows));
  write_report_csv(report, out);
  for (const ReportRow& row : report.rows)
    std::cout << "model=" << row.model_tag << " level=" << row.level.name()
              << " mAP=" << report_detail::format4(row.scores.map) << "\n";
  return 0;
}

int run_sweep_cmd(const std::string& manifest_path, int synth_images,
                  const std::string& train_text, const std::string& eval_text,
                  double fuse_iou, double match_iou,
                  const std::string& protocol_text, std::uint64_t seed,
                  const ModelFlags& flags, const std::string& out_csv,
                  const std::string& out_svg) {
  const DatasetManifest scene = load_scene(manifest_path, synth_images, seed);
  SweepConfig cfg;
  cfg.train_levels = parse_level_list(train_text);
  cfg.eval_levels = parse_level_list(eval_text);
  cfg.fuse_iou = fuse_iou;
  cfg.match_iou = match_iou;
  cfg.protocol = parse_protocol_or_fail(protocol_text);
  cfg.seed = seed;
  cfg.model_params = flags.to_spec();
  const SweepResult result = run_sweep(cfg, scene);
  {
    std::ofstream csv(out_csv, std::ios::binary);
    if (!csv) throw Error("cannot write " + out_csv);
    csv << result.csv;
  }
  {
    std::ofstream svg(out_svg, std::ios::binary);
    if (!svg) throw Error("cannot write " + out_svg);
    svg << result.svg;
  }
  std::cout << "wrote " << result.report.rows.size() << " report rows to "
            << out_csv << " (chart: " << out_svg << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-resolution object detection toolkit"};
  app.set_config("--config", "",
                 "INI config file; keys live in a [subcommand] section and "
                 "command-line flags take precedence");
  app.require_subcommand(1);
  int exit_code = 0;

  std::uint64_t seed = 0;

  // ingest
  auto* ingest = app.add_subcommand(
      "ingest", "parse VOC annotation XML into a manifest (JSONL)");
  std::string ingest_annotations, ingest_ids, ingest_split = "test", ingest_out;
  ingest->add_option("--annotations", ingest_annotations,
                     "directory holding <id>.xml files")->required();
  ingest->add_option("--ids", ingest_ids,
                     "file with one image id per line (default: every .xml)");
  ingest->add_option("--split", ingest_split, "split name stored in memory");
  ingest->add_option("--out", ingest_out, "output manifest JSONL")->required();
  ingest->callback([&] {
    exit_code = run_ingest(ingest_annotations, ingest_ids, ingest_split,
                           ingest_out);
  });

  // blur
  auto* blur = app.add_subcommand(
      "blur", "write band-limited copies of every image, one tree per level");
  std::string blur_in, blur_out, blur_levels = "all";
  blur->add_option("--in", blur_in, "input image directory (ppm/pgm/png)")
      ->required();
  blur->add_option("--out", blur_out, "output directory root")->required();
  blur->add_option("--levels", blur_levels,
                   "comma-separated levels, e.g. \"5,20,full\" or \"all\"");
  blur->callback([&] { exit_code = run_blur(blur_in, blur_out, blur_levels); });

  // simulate
  auto* simulate_cmd = app.add_subcommand(
      "simulate", "run the synthetic detector over a scene");
  std::string sim_manifest, sim_train, sim_eval = "full", sim_out;
  int sim_synth = 0;
  ModelFlags sim_flags;
  simulate_cmd->add_option("--manifest", sim_manifest, "scene manifest JSONL");
  simulate_cmd->add_option("--synth", sim_synth,
                           "generate a procedural scene with N images");
  simulate_cmd->add_option("--train-level", sim_train,
                           "the model's training level")->required();
  simulate_cmd->add_option("--eval-level", sim_eval,
                           "level the input images are presented at");
  simulate_cmd->add_option("--seed", seed, "random seed (env MULTIRES_SEED)");
  sim_flags.add_to(*simulate_cmd);
  simulate_cmd->add_option("--out", sim_out, "output detections JSONL")
      ->required();
  simulate_cmd->callback([&] {
    exit_code = run_simulate(sim_manifest, sim_synth, sim_train, sim_eval,
                             seed, sim_flags, sim_out);
  });

  // fuse
  auto* fuse_cmd = app.add_subcommand(
      "fuse", "pool detection files and apply non-maximum suppression");
  std::vector<std::string> fuse_inputs;
  double fuse_iou = 0.7;
  bool fuse_cross = false;
  std::string fuse_out;
  fuse_cmd->add_option("inputs", fuse_inputs, "detection JSONL files")
      ->required()
      ->expected(-1);
  fuse_cmd->add_option("--iou", fuse_iou, "suppression IoU threshold");
  fuse_cmd->add_flag("--cross-class", fuse_cross,
                     "suppress across classes instead of per class");
  fuse_cmd->add_option("--out", fuse_out, "output detections JSONL")
      ->required();
  fuse_cmd->callback(
      [&] { exit_code = run_fuse(fuse_inputs, fuse_iou, fuse_cross, fuse_out); });

  // eval
  auto* eval_cmd = app.add_subcommand(
      "eval", "score detections against ground truth (per-class AP, mAP)");
  std::string eval_dets, eval_manifest, eval_protocol = "11pt",
              eval_level = "full", eval_out;
  int eval_synth = 0;
  double eval_match_iou = 0.5;
  eval_cmd->add_option("--detections", eval_dets, "detections JSONL")
      ->required();
  eval_cmd->add_option("--manifest", eval_manifest, "ground-truth manifest");
  eval_cmd->add_option("--synth", eval_synth,
                       "evaluate against a procedural scene with N images");
  eval_cmd->add_option("--seed", seed, "random seed (env MULTIRES_SEED)");
  eval_cmd->add_option("--protocol", eval_protocol, "AP protocol: 11pt or auc");
  eval_cmd->add_option("--match-iou", eval_match_iou, "TP matching threshold");
  eval_cmd->add_option("--level", eval_level, "level label for the report row");
  eval_cmd->add_option("--out", eval_out, "output report CSV")->required();
  eval_cmd->callback([&] {
    exit_code = run_eval(eval_dets, eval_manifest, eval_synth, seed,
                         eval_protocol, eval_match_iou, eval_level, eval_out);
  });

  // sweep
  auto* sweep_cmd = app.add_subcommand(
      "sweep",
      "simulate, fuse and evaluate the full (model x level) grid; "
      "emit CSV and an SVG chart");
  std::string sweep_manifest, sweep_train = "5,10,18,20,full",
              sweep_eval = "all", sweep_protocol = "11pt", sweep_csv, sweep_svg;
  int sweep_synth = 0;
  double sweep_fuse_iou = 0.7, sweep_match_iou = 0.5;
  ModelFlags sweep_flags;
  sweep_cmd->add_option("--manifest", sweep_manifest, "scene manifest JSONL");
  sweep_cmd->add_option("--synth", sweep_synth,
                        "generate a procedural scene with N images");
  sweep_cmd->add_option("--train-levels", sweep_train,
                        "training levels of the model bank");
  sweep_cmd->add_option("--eval-levels", sweep_eval, "levels to evaluate at");
  sweep_cmd->add_option("--fuse-iou", sweep_fuse_iou, "fusion NMS threshold");
  sweep_cmd->add_option("--match-iou", sweep_match_iou,
                        "TP matching threshold");
  sweep_cmd->add_option("--protocol", sweep_protocol,
                        "AP protocol: 11pt or auc");
  sweep_cmd->add_option("--seed", seed, "random seed (env MULTIRES_SEED)");
  sweep_flags.add_to(*sweep_cmd);
  sweep_cmd->add_option("--out-csv", sweep_csv, "output report CSV")
      ->required();
  sweep_cmd->add_option("--out-svg", sweep_svg, "output chart SVG")
      ->required();
  sweep_cmd->callback([&] {
    exit_code = run_sweep_cmd(sweep_manifest, sweep_synth, sweep_train,
                              sweep_eval, sweep_fuse_iou, sweep_match_iou,
                              sweep_protocol, seed, sweep_flags, sweep_csv,
                              sweep_svg);
  });

  try {
    seed = env_default_seed();
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
