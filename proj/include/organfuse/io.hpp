#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "organfuse/fusion.hpp"
#include "organfuse/types.hpp"

namespace organfuse {

// Box dialect used by an input document. "xywh" is corner+size (the COCO
// detection convention) and is the default; "xyxy" is corner-corner.
// Internally everything is corner-corner; files written by this library
// declare "bbox_format": "xyxy" explicitly so round-trips are bit-exact.
enum class BboxFormat { xywh, xyxy };

BboxFormat parse_bbox_format(std::string_view name);
std::string_view to_string(BboxFormat format);

// --- manifest -------------------------------------------------------------

// Loads and fully validates a manifest document (fields: species, images,
// annotations, optional splits, optional bbox_format; a metadata field is
// ignored). Throws io_error / parse_error / validation_error.
DatasetManifest load_manifest(const std::string& path);

nlohmann::json manifest_to_json(const DatasetManifest& manifest);

// Writes the manifest; when metadata is non-null it is embedded under a
// top-level "metadata" key that loaders ignore.
void save_manifest(const std::string& path, const DatasetManifest& manifest,
                   const nlohmann::json* metadata = nullptr);

// --- detections -----------------------------------------------------------

// Accepts either a bare JSON array of {image_id, organ, bbox, score} or a
// document {bbox_format?, metadata?, detections: [...]}.
std::vector<Detection> load_detections(const std::string& path);

nlohmann::json detections_to_json(const std::vector<Detection>& detections);

void save_detections(const std::string& path,
                     const std::vector<Detection>& detections,
                     const nlohmann::json* metadata = nullptr);

// --- ROI predictions --------------------------------------------------------

// Newline-delimited JSON records {image_id, roi_index, organ, bbox,
// probs: [...]}; each record may carry its own bbox_format. Distributions
// within 1e-6 of summing to 1 are renormalized, others rejected.
// (image_id, roi_index) pairs must be unique.
std::vector<RoiPrediction> load_roi_predictions(const std::string& path);

void save_roi_predictions(const std::string& path,
                          const std::vector<RoiPrediction>& rois);

// --- side inputs ------------------------------------------------------------

// JSON object mapping organ names to non-negative weights summing to 1.
OrganPrior load_prior(const std::string& path);

// Newline-delimited {image_id, probs: [...]}; whole-image classifier
// outputs used for the whole-image fallback and the baseline accuracy row.
std::map<std::string, SpeciesDistribution> load_whole_image_predictions(
    const std::string& path);

// Accepts a split report ({..., "assignments": {id: split}}) or a bare
// {id: split} object.
std::map<std::string, Split> load_split_assignments(const std::string& path);

// --- files ------------------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// "fnv1a64:" followed by 16 hex digits over the raw file bytes.
std::string file_digest(const std::string& path);

}  // namespace organfuse
