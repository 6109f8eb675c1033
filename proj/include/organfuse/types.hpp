#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "organfuse/geometry.hpp"

namespace organfuse {

// The five plant-organ categories forming the detection vocabulary.
enum class OrganClass { leaf, flower, fruit, stem, hdl };

inline constexpr std::array<OrganClass, 5> kOrganClasses = {
    OrganClass::leaf, OrganClass::flower, OrganClass::fruit,
    OrganClass::stem, OrganClass::hdl};

inline constexpr size_t kOrganCount = kOrganClasses.size();

// Case-insensitive parse; throws parse_error on unknown names.
OrganClass parse_organ(std::string_view name);
std::optional<OrganClass> try_parse_organ(std::string_view name);

// Lowercase-canonical serialization ("leaf", "flower", "fruit", "stem",
// "hdl").
std::string_view to_string(OrganClass organ);

enum class Split { train, val, test };

Split parse_split(std::string_view name);
std::string_view to_string(Split split);

struct ImageRecord {
  std::string image_id;
  int width = 0;   // pixels, > 0
  int height = 0;  // pixels, > 0
  int species_label = 0;
  std::optional<std::string> source_query_id;

  bool operator==(const ImageRecord&) const = default;
};

struct GroundTruthAnnotation {
  std::string image_id;
  OrganClass organ = OrganClass::leaf;
  BoundingBox box;

  bool operator==(const GroundTruthAnnotation&) const = default;
};

struct Detection {
  std::string image_id;
  OrganClass organ = OrganClass::leaf;
  BoundingBox box;
  double confidence = 0.0;  // in [0, 1]

  bool operator==(const Detection&) const = default;
};

// Probability vector over the species vocabulary: entries >= 0, summing
// to 1. Construct through make_distribution so the invariant holds.
struct SpeciesDistribution {
  std::vector<double> probs;

  size_t size() const { return probs.size(); }
  double operator[](size_t i) const { return probs[i]; }

  // Index of the largest entry; ties resolve to the lowest index.
  size_t argmax() const;

  bool operator==(const SpeciesDistribution&) const = default;
};

// Validates and renormalizes. Entries must be non-negative and finite and
// the sum must be within `tolerance` of 1; throws validation_error
// otherwise. `context` prefixes error messages.
SpeciesDistribution make_distribution(std::vector<double> probs,
                                      const std::string& context = {},
                                      double tolerance = 1e-6);

struct RoiPrediction {
  std::string image_id;
  int roi_index = 0;  // 0-based within the image
  OrganClass organ = OrganClass::leaf;
  BoundingBox box;
  SpeciesDistribution distribution;

  bool operator==(const RoiPrediction&) const = default;
};

struct DatasetManifest {
  std::vector<std::string> species_vocabulary;
  std::vector<ImageRecord> images;
  std::vector<GroundTruthAnnotation> annotations;
  std::map<std::string, Split> split_assignments;  // may be empty

  bool operator==(const DatasetManifest&) const = default;
};

// Enforces every manifest invariant: unique image ids, unique species
// names, positive image sizes, species labels within vocabulary bounds,
// annotations referencing existing images with valid in-bounds boxes, and
// split assignments referencing existing images. Throws validation_error
// naming the first offending record.
void validate_manifest(const DatasetManifest& manifest);

// Referential/bounds validation of externally produced records against a
// manifest. Throws validation_error on the first offender.
void validate_detections(const DatasetManifest& manifest,
                         const std::vector<Detection>& detections);
void validate_roi_predictions(const DatasetManifest& manifest,
                              const std::vector<RoiPrediction>& rois);

}  // namespace organfuse
