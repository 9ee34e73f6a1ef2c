#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "multires/detections.hpp"
#include "multires/errors.hpp"
#include "multires/xml.hpp"

namespace multires {

// The fixed VOC category vocabulary, in its conventional alphabetical order.
inline constexpr std::array<std::string_view, 20> kVocClasses = {
    "aeroplane", "bicycle", "bird",   "boat",        "bottle",
    "bus",       "car",     "cat",    "chair",       "cow",
    "diningtable", "dog",   "horse",  "motorbike",   "person",
    "pottedplant", "sheep", "sofa",   "train",       "tvmonitor"};

inline bool is_voc_class(std::string_view name) {
  return std::find(kVocClasses.begin(), kVocClasses.end(), name) !=
         kVocClasses.end();
}

inline int voc_class_index(std::string_view name) {
  const auto it = std::find(kVocClasses.begin(), kVocClasses.end(), name);
  return it == kVocClasses.end() ? -1
                                 : static_cast<int>(it - kVocClasses.begin());
}

struct GroundTruthObject {
  std::string class_name;
  BoundingBox bbox;
  bool difficult = false;

  bool operator==(const GroundTruthObject&) const = default;
};

struct ImageRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<GroundTruthObject> objects;

  bool operator==(const ImageRecord&) const = default;
};

// Records sorted by image_id, ids unique.
struct DatasetManifest {
  std::vector<ImageRecord> records;
  std::string split_name;

  bool operator==(const DatasetManifest&) const = default;
};

namespace voc_detail {

inline std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin])))
    ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1])))
    --end;
  return std::string(text.substr(begin, end - begin));
}

inline std::string filename_stem(std::string_view filename) {
  const std::size_t dot = filename.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return std::string(filename);
  return std::string(filename.substr(0, dot));
}

inline int require_int(const xml::Node& parent, std::string_view element) {
  const xml::Node* node = parent.child(element);
  if (!node)
    throw SchemaError("voc annotation: missing <" + std::string(element) +
                      "> inside <" + parent.name + ">");
  const std::string text = trim(node->text);
  if (text.empty())
    throw SchemaError("voc annotation: empty <" + std::string(element) + ">");
  int sign = 1;
  std::size_t i = 0;
  if (text[0] == '-') {
    sign = -1;
    i = 1;
  }
  long value = 0;
  for (; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9')
      throw SchemaError("voc annotation: <" + std::string(element) +
                        "> is not an integer: \"" + text + "\"");
    value = value * 10 + (text[i] - '0');
    if (value > 1000000000)
      throw SchemaError("voc annotation: <" + std::string(element) +
                        "> is out of range");
  }
  if (text.size() == (sign < 0 ? 1u : 0u))
    throw SchemaError("voc annotation: <" + std::string(element) +
                      "> is not an integer: \"" + text + "\"");
  return static_cast<int>(sign * value);
}

}  // namespace voc_detail

// Parse one VOC2007 annotation document. Coordinates stay in the native
// 1-based inclusive convention. <difficult> absent means not difficult.
inline ImageRecord parse_voc_annotation(std::string_view xml_text) {
  const xml::Node root = xml::parse(xml_text);
  if (root.name != "annotation")
    throw SchemaError("voc annotation: expected <annotation> root, got <" +
                      root.name + ">");
  const xml::Node* filename = root.child("filename");
  if (!filename) throw SchemaError("voc annotation: missing <filename>");
  ImageRecord record;
  record.image_id = voc_detail::filename_stem(voc_detail::trim(filename->text));
  if (record.image_id.empty())
    throw SchemaError("voc annotation: empty <filename>");
  const xml::Node* size = root.child("size");
  if (!size) throw SchemaError("voc annotation: missing <size>");
  record.width = voc_detail::require_int(*size, "width");
  record.height = voc_detail::require_int(*size, "height");
  if (record.width < 1 || record.height < 1)
    throw SchemaError("voc annotation: image size must be positive");
  for (const xml::Node* object : root.children_named("object")) {
    GroundTruthObject gt;
    const xml::Node* name = object->child("name");
    if (!name) throw SchemaError("voc annotation: missing <name> in <object>");
    gt.class_name = voc_detail::trim(name->text);
    if (!is_voc_class(gt.class_name))
      throw SchemaError("voc annotation: unknown class \"" + gt.class_name +
                        "\"");
    const xml::Node* bndbox = object->child("bndbox");
    if (!bndbox)
      throw SchemaError("voc annotation: missing <bndbox> in <object>");
    gt.bbox.xmin = voc_detail::require_int(*bndbox, "xmin");
    gt.bbox.ymin = voc_detail::require_int(*bndbox, "ymin");
    gt.bbox.xmax = voc_detail::require_int(*bndbox, "xmax");
    gt.bbox.ymax = voc_detail::require_int(*bndbox, "ymax");
    if (gt.bbox.xmax < gt.bbox.xmin || gt.bbox.ymax < gt.bbox.ymin)
      throw SchemaError("voc annotation: bndbox corners are inverted");
    if (gt.bbox.xmin < 1 || gt.bbox.ymin < 1 || gt.bbox.xmax > record.width ||
        gt.bbox.ymax > record.height)
      throw SchemaError("voc annotation: bndbox lies outside the image");
    if (const xml::Node* difficult = object->child("difficult"))
      gt.difficult = voc_detail::trim(difficult->text) != "0";
    record.objects.push_back(std::move(gt));
  }
  return record;
}

// Load <dir>/<id>.xml for every id, sort by id. The requested id becomes the
// record's image_id; the annotation's <filename> element is informative only.
inline DatasetManifest load_manifest(const std::filesystem::path& annotation_dir,
                                     const std::vector<std::string>& ids,
                                     std::string split_name = std::string()) {
  {
    std::set<std::string> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size())
      throw InvalidInputError("load_manifest: duplicate image ids in input");
  }
  DatasetManifest manifest;
  manifest.split_name = std::move(split_name);
  manifest.records.reserve(ids.size());
  for (const std::string& id : ids) {
    const std::filesystem::path path = annotation_dir / (id + ".xml");
    std::ifstream file(path, std::ios::binary);
    if (!file)
      throw NotFoundError("load_manifest: no annotation for id \"" + id +
                          "\" (" + path.string() + ")");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    ImageRecord record = parse_voc_annotation(buffer.str());
    record.image_id = id;
    manifest.records.push_back(std::move(record));
  }
  std::sort(manifest.records.begin(), manifest.records.end(),
            [](const ImageRecord& a, const ImageRecord& b) {
              return a.image_id < b.image_id;
            });
  return manifest;
}

}  // namespace multires
