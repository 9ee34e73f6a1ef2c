#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "multires/detections.hpp"
#include "multires/errors.hpp"

namespace multires {

namespace detection_io_detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

inline std::string strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return std::string(line);
}

}  // namespace detection_io_detail

// Detection JSONL: one object per line with keys image_id, class, bbox
// ([xmin, ymin, xmax, ymax]), score, model. Blank lines are skipped. The
// per-(image, model) cap is enforced after the whole stream is read.
inline DetectionSet parse_detections_jsonl(std::string_view text) {
  DetectionSet set;
  const auto lines = detection_io_detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const std::string line = detection_io_detail::strip_cr(lines[i]);
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("detections: line " + std::to_string(line_no) + ": " +
                           e.what(),
                       line_no);
    }
    const auto schema_fail = [&](const std::string& what) -> SchemaError {
      return SchemaError("detections: line " + std::to_string(line_no) + ": " +
                         what);
    };
    if (!j.is_object()) throw schema_fail("expected a JSON object");
    for (const char* key : {"image_id", "class", "bbox", "score", "model"})
      if (!j.contains(key))
        throw schema_fail(std::string("missing key \"") + key + "\"");
    if (!j["image_id"].is_string() || !j["class"].is_string() ||
        !j["model"].is_string())
      throw schema_fail("image_id, class and model must be strings");
    if (!j["score"].is_number()) throw schema_fail("score must be a number");
    if (!j["bbox"].is_array() || j["bbox"].size() != 4)
      throw schema_fail("bbox must be an array of 4 numbers");
    for (const auto& v : j["bbox"])
      if (!v.is_number()) throw schema_fail("bbox must be an array of 4 numbers");
    Detection det;
    det.image_id = j["image_id"].get<std::string>();
    det.class_name = j["class"].get<std::string>();
    det.model_tag = j["model"].get<std::string>();
    det.score = j["score"].get<double>();
    det.bbox.xmin = j["bbox"][0].get<double>();
    det.bbox.ymin = j["bbox"][1].get<double>();
    det.bbox.xmax = j["bbox"][2].get<double>();
    det.bbox.ymax = j["bbox"][3].get<double>();
    if (det.score < 0.0 || det.score > 1.0)
      throw schema_fail("score must lie in [0, 1]");
    if (det.bbox.xmax < det.bbox.xmin || det.bbox.ymax < det.bbox.ymin)
      throw schema_fail("bbox corners are inverted");
    set.detections.push_back(std::move(det));
  }
  enforce_detection_cap(set);
  return set;
}

inline std::string detections_to_jsonl(const DetectionSet& set) {
  std::string out;
  for (const Detection& det : set.detections) {
    nlohmann::ordered_json j;
    j["image_id"] = det.image_id;
    j["class"] = det.class_name;
    j["bbox"] = {det.bbox.xmin, det.bbox.ymin, det.bbox.xmax, det.bbox.ymax};
    j["score"] = det.score;
    j["model"] = det.model_tag;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline DetectionSet read_detections(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file)
    throw NotFoundError("cannot open detections file: " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_detections_jsonl(buffer.str());
}

inline void write_detections(const DetectionSet& set,
                             const std::filesystem::path& path) {
  enforce_detection_cap(set);
  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw Error("cannot write detections file: " + path.string());
  file << detections_to_jsonl(set);
}

}  // namespace multires
