#include "organfuse/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "organfuse/errors.hpp"

namespace organfuse {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::optional<OrganClass> try_parse_organ(std::string_view name) {
  const std::string key = lowercase(name);
  if (key == "leaf") return OrganClass::leaf;
  if (key == "flower") return OrganClass::flower;
  if (key == "fruit") return OrganClass::fruit;
  if (key == "stem") return OrganClass::stem;
  if (key == "hdl") return OrganClass::hdl;
  return std::nullopt;
}

OrganClass parse_organ(std::string_view name) {
  if (auto organ = try_parse_organ(name)) return *organ;
  throw parse_error("unknown organ class '" + std::string(name) +
                    "' (expected leaf, flower, fruit, stem, or hdl)");
}

std::string_view to_string(OrganClass organ) {
  switch (organ) {
    case OrganClass::leaf: return "leaf";
    case OrganClass::flower: return "flower";
    case OrganClass::fruit: return "fruit";
    case OrganClass::stem: return "stem";
    case OrganClass::hdl: return "hdl";
  }
  return "leaf";
}

Split parse_split(std::string_view name) {
  const std::string key = lowercase(name);
  if (key == "train") return Split::train;
  if (key == "val" || key == "validation") return Split::val;
  if (key == "test") return Split::test;
  throw parse_error("unknown split '" + std::string(name) +
                    "' (expected train, val, or test)");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

size_t SpeciesDistribution::argmax() const {
  return static_cast<size_t>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
}

SpeciesDistribution make_distribution(std::vector<double> probs,
                                      const std::string& context,
                                      double tolerance) {
  const std::string where = context.empty() ? std::string("distribution") : context;
  if (probs.empty()) {
    throw validation_error(where + ": empty probability vector");
  }
  double sum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!std::isfinite(p)) {
      throw validation_error(where + ": non-finite probability at index " +
                             std::to_string(i));
    }
    if (p < 0.0) {
      throw validation_error(where + ": negative probability at index " +
                             std::to_string(i));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw validation_error(where + ": probabilities sum to " +
                           std::to_string(sum) + ", outside tolerance of 1");
  }
  for (double& p : probs) p /= sum;
  return SpeciesDistribution{std::move(probs)};
}

void validate_manifest(const DatasetManifest& manifest) {
  std::unordered_set<std::string> species_names;
  for (const auto& name : manifest.species_vocabulary) {
    if (!species_names.insert(name).second) {
      throw validation_error("manifest: duplicate species name '" + name + "'");
    }
  }

  const int vocab_size = static_cast<int>(manifest.species_vocabulary.size());
  std::unordered_map<std::string, const ImageRecord*> by_id;
  by_id.reserve(manifest.images.size());
  for (const auto& img : manifest.images) {
    if (img.image_id.empty()) {
      throw validation_error("manifest: image with empty image_id");
    }
    if (!by_id.emplace(img.image_id, &img).second) {
      throw validation_error("manifest: duplicate image_id '" + img.image_id + "'");
    }
    if (img.width <= 0 || img.height <= 0) {
      throw validation_error("manifest: image '" + img.image_id +
                             "' has non-positive size");
    }
    if (img.species_label < 0 || img.species_label >= vocab_size) {
      throw validation_error("manifest: image '" + img.image_id +
                             "' species label " + std::to_string(img.species_label) +
                             " outside vocabulary of size " + std::to_string(vocab_size));
    }
  }

  for (const auto& ann : manifest.annotations) {
    auto it = by_id.find(ann.image_id);
    if (it == by_id.end()) {
      throw validation_error("manifest: annotation references unknown image_id '" +
                             ann.image_id + "'");
    }
    if (!is_valid(ann.box)) {
      throw validation_error("manifest: annotation on image '" + ann.image_id +
                             "' has a degenerate or invalid box");
    }
    const ImageRecord& img = *it->second;
    if (ann.box.x_max > img.width || ann.box.y_max > img.height) {
      throw validation_error("manifest: annotation on image '" + ann.image_id +
                             "' extends outside the image bounds");
    }
  }

  for (const auto& [image_id, split] : manifest.split_assignments) {
    (void)split;
    if (by_id.find(image_id) == by_id.end()) {
      throw validation_error("manifest: split assignment references unknown image_id '" +
                             image_id + "'");
    }
  }
}

namespace {

std::unordered_map<std::string, const ImageRecord*> index_images(
    const DatasetManifest& manifest) {
  std::unordered_map<std::string, const ImageRecord*> by_id;
  by_id.reserve(manifest.images.size());
  for (const auto& img : manifest.images) by_id.emplace(img.image_id, &img);
  return by_id;
}

}  // namespace

void validate_detections(const DatasetManifest& manifest,
                         const std::vector<Detection>& detections) {
  const auto by_id = index_images(manifest);
  for (size_t i = 0; i < detections.size(); ++i) {
    const Detection& det = detections[i];
    auto it = by_id.find(det.image_id);
    if (it == by_id.end()) {
      throw validation_error("detection " + std::to_string(i) +
                             ": unknown image_id '" + det.image_id + "'");
    }
    const ImageRecord& img = *it->second;
    if (det.box.x_max > img.width || det.box.y_max > img.height) {
      throw validation_error("detection " + std::to_string(i) + " on image '" +
                             det.image_id + "' extends outside the image bounds");
    }
  }
}

void validate_roi_predictions(const DatasetManifest& manifest,
                              const std::vector<RoiPrediction>& rois) {
  const auto by_id = index_images(manifest);
  const size_t vocab = manifest.species_vocabulary.size();
  for (size_t i = 0; i < rois.size(); ++i) {
    const RoiPrediction& roi = rois[i];
    auto it = by_id.find(roi.image_id);
    if (it == by_id.end()) {
      throw validation_error("roi prediction " + std::to_string(i) +
                             ": unknown image_id '" + roi.image_id + "'");
    }
    const ImageRecord& img = *it->second;
    if (roi.box.x_max > img.width || roi.box.y_max > img.height) {
      throw validation_error("roi prediction " + std::to_string(i) + " on image '" +
                             roi.image_id + "' extends outside the image bounds");
    }
    if (roi.distribution.size() != vocab) {
      throw validation_error("roi prediction " + std::to_string(i) + " on image '" +
                             roi.image_id + "': probability vector length " +
                             std::to_string(roi.distribution.size()) +
                             " does not match vocabulary size " + std::to_string(vocab));
    }
  }
}

}  // namespace organfuse
