#include "organfuse/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "organfuse/errors.hpp"
#include "organfuse/rng.hpp"

namespace organfuse {

using nlohmann::json;

BboxFormat parse_bbox_format(std::string_view name) {
  if (name == "xywh") return BboxFormat::xywh;
  if (name == "xyxy") return BboxFormat::xyxy;
  throw parse_error("unknown bbox_format '" + std::string(name) +
                    "' (expected xywh or xyxy)");
}

std::string_view to_string(BboxFormat format) {
  return format == BboxFormat::xywh ? "xywh" : "xyxy";
}

namespace {

json parse_json(const std::string& text, const std::string& context) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw parse_error(context + ": malformed JSON");
  }
  return doc;
}

const json& require(const json& obj, const char* key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw parse_error(context + ": missing field '" + key + "'");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           const std::string& context) {
  const json& v = require(obj, key, context);
  if (!v.is_string()) {
    throw parse_error(context + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

int64_t require_int(const json& obj, const char* key, const std::string& context) {
  const json& v = require(obj, key, context);
  if (!v.is_number_integer()) {
    throw parse_error(context + ": field '" + key + "' must be an integer");
  }
  return v.get<int64_t>();
}

double require_number(const json& obj, const char* key, const std::string& context) {
  const json& v = require(obj, key, context);
  if (!v.is_number()) {
    throw parse_error(context + ": field '" + key + "' must be a number");
  }
  return v.get<double>();
}

BoundingBox parse_bbox(const json& v, BboxFormat format, const std::string& context) {
  if (!v.is_array() || v.size() != 4) {
    throw parse_error(context + ": 'bbox' must be an array of 4 numbers");
  }
  double c[4];
  for (size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) {
      throw parse_error(context + ": 'bbox' must be an array of 4 numbers");
    }
    c[i] = v[i].get<double>();
  }
  const BoundingBox box = (format == BboxFormat::xywh)
                              ? box_from_xywh(c[0], c[1], c[2], c[3])
                              : BoundingBox{c[0], c[1], c[2], c[3]};
  if (!is_valid(box)) {
    throw validation_error(context + ": degenerate or invalid box");
  }
  return box;
}

json bbox_to_json(const BoundingBox& box) {
  return json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

BboxFormat document_bbox_format(const json& doc, const std::string& context) {
  auto it = doc.find("bbox_format");
  if (it == doc.end()) return BboxFormat::xywh;
  if (!it->is_string()) {
    throw parse_error(context + ": 'bbox_format' must be a string");
  }
  return parse_bbox_format(it->get<std::string>());
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot open file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw io_error("cannot write file '" + path + "'");
  }
  out << content;
  if (!out) {
    throw io_error("failed while writing file '" + path + "'");
  }
}

std::string file_digest(const std::string& path) {
  const std::string bytes = read_text_file(path);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016" PRIx64, fnv1a64(bytes));
  return buf;
}

DatasetManifest load_manifest(const std::string& path) {
  const json doc = parse_json(read_text_file(path), path);
  if (!doc.is_object()) {
    throw parse_error(path + ": manifest must be a JSON object");
  }
  const BboxFormat format = document_bbox_format(doc, path);

  DatasetManifest manifest;
  const json& species = require(doc, "species", path);
  if (!species.is_array()) {
    throw parse_error(path + ": 'species' must be an array of names");
  }
  for (const auto& name : species) {
    if (!name.is_string()) {
      throw parse_error(path + ": 'species' must be an array of names");
    }
    manifest.species_vocabulary.push_back(name.get<std::string>());
  }

  const json& images = require(doc, "images", path);
  if (!images.is_array()) {
    throw parse_error(path + ": 'images' must be an array");
  }
  for (size_t i = 0; i < images.size(); ++i) {
    const std::string context = path + ": images[" + std::to_string(i) + "]";
    const json& rec = images[i];
    if (!rec.is_object()) throw parse_error(context + ": must be an object");
    ImageRecord img;
    img.image_id = require_string(rec, "image_id", context);
    img.width = static_cast<int>(require_int(rec, "width", context));
    img.height = static_cast<int>(require_int(rec, "height", context));
    img.species_label = static_cast<int>(require_int(rec, "species", context));
    if (auto it = rec.find("source_query_id"); it != rec.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw parse_error(context + ": 'source_query_id' must be a string");
      }
      img.source_query_id = it->get<std::string>();
    }
    manifest.images.push_back(std::move(img));
  }

  const json& annotations = require(doc, "annotations", path);
  if (!annotations.is_array()) {
    throw parse_error(path + ": 'annotations' must be an array");
  }
  for (size_t i = 0; i < annotations.size(); ++i) {
    const std::string context = path + ": annotations[" + std::to_string(i) + "]";
    const json& rec = annotations[i];
    if (!rec.is_object()) throw parse_error(context + ": must be an object");
    GroundTruthAnnotation ann;
    ann.image_id = require_string(rec, "image_id", context);
    ann.organ = parse_organ(require_string(rec, "organ", context));
    ann.box = parse_bbox(require(rec, "bbox", context), format, context);
    manifest.annotations.push_back(std::move(ann));
  }

  if (auto it = doc.find("splits"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) {
      throw parse_error(path + ": 'splits' must map image ids to split names");
    }
    for (const auto& [image_id, value] : it->items()) {
      if (!value.is_string()) {
        throw parse_error(path + ": splits['" + image_id + "'] must be a string");
      }
      manifest.split_assignments[image_id] = parse_split(value.get<std::string>());
    }
  }

  validate_manifest(manifest);
  return manifest;
}

json manifest_to_json(const DatasetManifest& manifest) {
  json doc;
  doc["bbox_format"] = "xyxy";
  doc["species"] = manifest.species_vocabulary;
  json images = json::array();
  for (const auto& img : manifest.images) {
    json rec;
    rec["image_id"] = img.image_id;
    rec["width"] = img.width;
    rec["height"] = img.height;
    rec["species"] = img.species_label;
    if (img.source_query_id) rec["source_query_id"] = *img.source_query_id;
    images.push_back(std::move(rec));
  }
  doc["images"] = std::move(images);
  json annotations = json::array();
  for (const auto& ann : manifest.annotations) {
    json rec;
    rec["image_id"] = ann.image_id;
    rec["organ"] = to_string(ann.organ);
    rec["bbox"] = bbox_to_json(ann.box);
    annotations.push_back(std::move(rec));
  }
  doc["annotations"] = std::move(annotations);
  if (!manifest.split_assignments.empty()) {
    json splits;
    for (const auto& [image_id, split] : manifest.split_assignments) {
      splits[image_id] = to_string(split);
    }
    doc["splits"] = std::move(splits);
  }
  return doc;
}

void save_manifest(const std::string& path, const DatasetManifest& manifest,
                   const nlohmann::json* metadata) {
  json doc = manifest_to_json(manifest);
  if (metadata != nullptr) doc["metadata"] = *metadata;
  write_text_file(path, doc.dump(2) + "\n");
}

std::vector<Detection> load_detections(const std::string& path) {
  json doc = parse_json(read_text_file(path), path);
  BboxFormat format = BboxFormat::xywh;
  const json* records = &doc;
  if (doc.is_object()) {
    format = document_bbox_format(doc, path);
    records = &require(doc, "detections", path);
  }
  if (!records->is_array()) {
    throw parse_error(path + ": expected an array of detection records");
  }
  std::vector<Detection> detections;
  detections.reserve(records->size());
  for (size_t i = 0; i < records->size(); ++i) {
    const std::string context = path + ": detections[" + std::to_string(i) + "]";
    const json& rec = (*records)[i];
    if (!rec.is_object()) throw parse_error(context + ": must be an object");
    Detection det;
    det.image_id = require_string(rec, "image_id", context);
    det.organ = parse_organ(require_string(rec, "organ", context));
    det.box = parse_bbox(require(rec, "bbox", context), format, context);
    det.confidence = require_number(rec, "score", context);
    if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
      throw validation_error(context + ": score must lie in [0, 1]");
    }
    detections.push_back(std::move(det));
  }
  return detections;
}

json detections_to_json(const std::vector<Detection>& detections) {
  json records = json::array();
  for (const auto& det : detections) {
    json rec;
    rec["image_id"] = det.image_id;
    rec["organ"] = to_string(det.organ);
    rec["bbox"] = bbox_to_json(det.box);
    rec["score"] = det.confidence;
    records.push_back(std::move(rec));
  }
  return records;
}

void save_detections(const std::string& path,
                     const std::vector<Detection>& detections,
                     const nlohmann::json* metadata) {
  json doc;
  doc["bbox_format"] = "xyxy";
  doc["detections"] = detections_to_json(detections);
  if (metadata != nullptr) doc["metadata"] = *metadata;
  write_text_file(path, doc.dump(2) + "\n");
}

std::vector<RoiPrediction> load_roi_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot open file '" + path + "'");
  }
  std::vector<RoiPrediction> rois;
  std::set<std::pair<std::string, int>> seen;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string context = path + ":" + std::to_string(lineno);
    const json rec = parse_json(line, context);
    if (!rec.is_object()) throw parse_error(context + ": must be an object");

    RoiPrediction roi;
    roi.image_id = require_string(rec, "image_id", context);
    roi.roi_index = static_cast<int>(require_int(rec, "roi_index", context));
    if (roi.roi_index < 0) {
      throw validation_error(context + ": roi_index must be >= 0");
    }
    roi.organ = parse_organ(require_string(rec, "organ", context));
    const BboxFormat format = document_bbox_format(rec, context);
    roi.box = parse_bbox(require(rec, "bbox", context), format, context);
    const json& probs = require(rec, "probs", context);
    if (!probs.is_array()) {
      throw parse_error(context + ": 'probs' must be an array of numbers");
    }
    std::vector<double> values;
    values.reserve(probs.size());
    for (const auto& p : probs) {
      if (!p.is_number()) {
        throw parse_error(context + ": 'probs' must be an array of numbers");
      }
      values.push_back(p.get<double>());
    }
    roi.distribution = make_distribution(std::move(values), context);
    if (!seen.emplace(roi.image_id, roi.roi_index).second) {
      throw validation_error(context + ": duplicate (image_id, roi_index) pair ('" +
                             roi.image_id + "', " + std::to_string(roi.roi_index) + ")");
    }
    rois.push_back(std::move(roi));
  }
  return rois;
}

void save_roi_predictions(const std::string& path,
                          const std::vector<RoiPrediction>& rois) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw io_error("cannot write file '" + path + "'");
  }
  for (const auto& roi : rois) {
    json rec;
    rec["image_id"] = roi.image_id;
    rec["roi_index"] = roi.roi_index;
    rec["organ"] = to_string(roi.organ);
    rec["bbox_format"] = "xyxy";
    rec["bbox"] = bbox_to_json(roi.box);
    rec["probs"] = roi.distribution.probs;
    out << rec.dump() << "\n";
  }
  if (!out) {
    throw io_error("failed while writing file '" + path + "'");
  }
}

OrganPrior load_prior(const std::string& path) {
  const json doc = parse_json(read_text_file(path), path);
  if (!doc.is_object()) {
    throw parse_error(path + ": prior must be a JSON object of organ weights");
  }
  std::map<OrganClass, double> weights;
  for (const auto& [name, value] : doc.items()) {
    if (name == "metadata") continue;
    if (!value.is_number()) {
      throw parse_error(path + ": weight for '" + name + "' must be a number");
    }
    weights[parse_organ(name)] = value.get<double>();
  }
  return OrganPrior::from_weights(weights);
}

std::map<std::string, SpeciesDistribution> load_whole_image_predictions(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot open file '" + path + "'");
  }
  std::map<std::string, SpeciesDistribution> result;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string context = path + ":" + std::to_string(lineno);
    const json rec = parse_json(line, context);
    if (!rec.is_object()) throw parse_error(context + ": must be an object");
    const std::string image_id = require_string(rec, "image_id", context);
    const json& probs = require(rec, "probs", context);
    if (!probs.is_array()) {
      throw parse_error(context + ": 'probs' must be an array of numbers");
    }
    std::vector<double> values;
    values.reserve(probs.size());
    for (const auto& p : probs) {
      if (!p.is_number()) {
        throw parse_error(context + ": 'probs' must be an array of numbers");
      }
      values.push_back(p.get<double>());
    }
    if (!result.emplace(image_id, make_distribution(std::move(values), context)).second) {
      throw validation_error(context + ": duplicate whole-image record for '" +
                             image_id + "'");
    }
  }
  return result;
}

std::map<std::string, Split> load_split_assignments(const std::string& path) {
  const json doc = parse_json(read_text_file(path), path);
  if (!doc.is_object()) {
    throw parse_error(path + ": expected a JSON object");
  }
  const json* map = &doc;
  if (auto it = doc.find("assignments"); it != doc.end()) {
    if (!it->is_object()) {
      throw parse_error(path + ": 'assignments' must map image ids to split names");
    }
    map = &*it;
  }
  std::map<std::string, Split> assignments;
  for (const auto& [image_id, value] : map->items()) {
    if (image_id == "metadata") continue;
    if (!value.is_string()) {
      throw parse_error(path + ": split for '" + image_id + "' must be a string");
    }
    assignments[image_id] = parse_split(value.get<std::string>());
  }
  return assignments;
}

}  // namespace organfuse
