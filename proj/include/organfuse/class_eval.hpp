#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "organfuse/fusion.hpp"
#include "organfuse/types.hpp"

namespace organfuse {

// Square (true species, predicted species) count matrix, stored sparsely.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(size_t num_classes) : num_classes_(num_classes) {}

  void add(size_t true_label, size_t predicted_label, int64_t count = 1);

  int64_t at(size_t true_label, size_t predicted_label) const;
  int64_t row_sum(size_t true_label) const;
  int64_t trace() const;
  int64_t total() const;
  size_t num_classes() const { return num_classes_; }

  // trace / total; requires total > 0.
  double accuracy() const;

  // Non-zero cells as (true, predicted, count), ordered by (true, predicted).
  std::vector<std::tuple<size_t, size_t, int64_t>> nonzero_cells() const;

 private:
  size_t num_classes_;
  std::map<std::pair<size_t, size_t>, int64_t> cells_;
};

struct OrganClassifierEval {
  // Organs with no ROI predictions are absent from both maps.
  std::map<OrganClass, ConfusionMatrix> confusion;
  std::map<OrganClass, double> accuracy_percent;
  std::map<OrganClass, size_t> roi_counts;
};

// Per-ROI prediction is the distribution argmax; the true label is the
// species of the referenced image. ROIs are grouped by their organ field.
OrganClassifierEval evaluate_organ_classifiers(
    const DatasetManifest& manifest, const std::vector<RoiPrediction>& rois);

// Policy for images in the evaluation set that have no ROI predictions.
enum class FallbackPolicy { skip, whole_image };

FallbackPolicy parse_fallback_policy(std::string_view name);
std::string_view to_string(FallbackPolicy policy);

struct SpeciesEvalConfig {
  std::set<FusionRule> rules = {FusionRule::sum, FusionRule::product,
                                FusionRule::voting};
  OrganPrior prior;
  FallbackPolicy fallback = FallbackPolicy::skip;
  size_t workers = 1;
};

struct AccuracyReport {
  std::map<FusionRule, double> accuracy_percent;
  std::map<FusionRule, size_t> correct;
  size_t evaluated = 0;       // images in the accuracy denominator
  size_t skipped = 0;         // ROI-less images excluded under the skip policy
  size_t fallback_images = 0; // images scored from the whole-image distribution
  // Present when whole-image predictions were supplied: the accuracy of
  // their argmax over the same evaluated images.
  std::optional<double> baseline_accuracy_percent;
  std::optional<size_t> baseline_correct;
};

// Fuses each evaluation image's ROIs per rule and scores the argmax against
// the image's species label. The evaluation set is the test split when the
// manifest carries split assignments, otherwise every image. whole_image
// entries are required for the whole_image fallback and enable the
// baseline row. Throws validation_error when no image is evaluable.
AccuracyReport evaluate_species_id(
    const DatasetManifest& manifest, const std::vector<RoiPrediction>& rois,
    const SpeciesEvalConfig& config,
    const std::map<std::string, SpeciesDistribution>* whole_image = nullptr);

}  // namespace organfuse
