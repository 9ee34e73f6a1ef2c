#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "multires/detection_io.hpp"
#include "multires/errors.hpp"
#include "multires/voc.hpp"

namespace multires {

// Manifest JSONL: one image record per line with keys image_id, width,
// height, objects [{class, bbox: [xmin, ymin, xmax, ymax], difficult}].
inline DatasetManifest parse_manifest_jsonl(std::string_view text,
                                            std::string split_name = std::string()) {
  DatasetManifest manifest;
  manifest.split_name = std::move(split_name);
  const auto lines = detection_io_detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const std::string line = detection_io_detail::strip_cr(lines[i]);
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("manifest: line " + std::to_string(line_no) + ": " +
                           e.what(),
                       line_no);
    }
    const auto schema_fail = [&](const std::string& what) -> SchemaError {
      return SchemaError("manifest: line " + std::to_string(line_no) + ": " +
                         what);
    };
    if (!j.is_object()) throw schema_fail("expected a JSON object");
    for (const char* key : {"image_id", "width", "height", "objects"})
      if (!j.contains(key))
        throw schema_fail(std::string("missing key \"") + key + "\"");
    if (!j["image_id"].is_string()) throw schema_fail("image_id must be a string");
    if (!j["width"].is_number_integer() || !j["height"].is_number_integer())
      throw schema_fail("width and height must be integers");
    if (!j["objects"].is_array()) throw schema_fail("objects must be an array");
    ImageRecord record;
    record.image_id = j["image_id"].get<std::string>();
    record.width = j["width"].get<int>();
    record.height = j["height"].get<int>();
    if (record.image_id.empty()) throw schema_fail("image_id must be non-empty");
    if (record.width < 1 || record.height < 1)
      throw schema_fail("image dimensions must be >= 1");
    for (const auto& obj : j["objects"]) {
      if (!obj.is_object() || !obj.contains("class") || !obj.contains("bbox") ||
          !obj.contains("difficult"))
        throw schema_fail("each object needs class, bbox and difficult");
      if (!obj["class"].is_string() || !obj["difficult"].is_boolean() ||
          !obj["bbox"].is_array() || obj["bbox"].size() != 4)
        throw schema_fail("malformed object entry");
      GroundTruthObject gt;
      gt.class_name = obj["class"].get<std::string>();
      if (!is_voc_class(gt.class_name))
        throw schema_fail("unknown class \"" + gt.class_name + "\"");
      for (const auto& v : obj["bbox"])
        if (!v.is_number()) throw schema_fail("bbox must hold 4 numbers");
      gt.bbox.xmin = obj["bbox"][0].get<double>();
      gt.bbox.ymin = obj["bbox"][1].get<double>();
      gt.bbox.xmax = obj["bbox"][2].get<double>();
      gt.bbox.ymax = obj["bbox"][3].get<double>();
      gt.difficult = obj["difficult"].get<bool>();
      if (gt.bbox.xmax < gt.bbox.xmin || gt.bbox.ymax < gt.bbox.ymin)
        throw schema_fail("bbox corners are inverted");
      if (gt.bbox.xmin < 1 || gt.bbox.ymin < 1 || gt.bbox.xmax > record.width ||
          gt.bbox.ymax > record.height)
        throw schema_fail("bbox lies outside the image");
      record.objects.push_back(std::move(gt));
    }
    manifest.records.push_back(std::move(record));
  }
  std::sort(manifest.records.begin(), manifest.records.end(),
            [](const ImageRecord& a, const ImageRecord& b) {
              return a.image_id < b.image_id;
            });
  std::set<std::string> seen;
  for (const ImageRecord& record : manifest.records)
    if (!seen.insert(record.image_id).second)
      throw InvalidInputError("manifest: duplicate image id \"" +
                              record.image_id + "\"");
  return manifest;
}

inline std::string manifest_to_jsonl(const DatasetManifest& manifest) {
  std::string out;
  for (const ImageRecord& record : manifest.records) {
    nlohmann::ordered_json j;
    j["image_id"] = record.image_id;
    j["width"] = record.width;
    j["height"] = record.height;
    nlohmann::ordered_json objects = nlohmann::ordered_json::array();
    for (const GroundTruthObject& gt : record.objects) {
      nlohmann::ordered_json o;
      o["class"] = gt.class_name;
      o["bbox"] = {gt.bbox.xmin, gt.bbox.ymin, gt.bbox.xmax, gt.bbox.ymax};
      o["difficult"] = gt.difficult;
      objects.push_back(std::move(o));
    }
    j["objects"] = std::move(objects);
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline DatasetManifest read_manifest(const std::filesystem::path& path,
                                     std::string split_name = std::string()) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw NotFoundError("cannot open manifest file: " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_manifest_jsonl(buffer.str(), std::move(split_name));
}

inline void write_manifest(const DatasetManifest& manifest,
                           const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write manifest file: " + path.string());
  file << manifest_to_jsonl(manifest);
}

}  // namespace multires
