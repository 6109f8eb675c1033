#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "organfuse/types.hpp"

namespace organfuse {

// Target shape for per-species image counts: log-normal moment-matched to
// mean/stddev, rounded and clamped to [min_count, max_count].
struct LongTailProfile {
  double mean = 90.0;
  double stddev = 85.6;
  int64_t min_count = 6;
  int64_t max_count = 762;
};

struct SimulatorConfig {
  size_t species_count = 2;
  // Either a flat per-species image count, or a long-tail profile.
  size_t images_per_species = 10;
  std::optional<LongTailProfile> long_tail;
  // Probability that a ROI of this organ places its argmax at the true
  // species; otherwise the argmax lands on a uniformly random wrong one.
  std::map<OrganClass, double> organ_accuracy;
  // Mean ROI count per image per organ, realized as a Poisson draw
  // truncated at max_rois_per_organ.
  std::map<OrganClass, double> organ_mean_rois;
  uint64_t max_rois_per_organ = 8;
  // Probability mass spread uniformly over the non-argmax species; the
  // argmax keeps 1 - confusion_spread.
  double confusion_spread = 0.5;
  uint64_t seed = 0;
  int image_width = 1024;
  int image_height = 1024;

  SimulatorConfig();
};

struct ScenarioCorpus {
  DatasetManifest manifest;  // species labels and mirrored ROI annotations
  std::vector<RoiPrediction> rois;
  std::map<OrganClass, double> realized_accuracy;  // organs with >= 1 ROI
  std::map<OrganClass, size_t> roi_counts;
};

// Deterministic per seed: image generation uses per-image derived
// sub-seeds, so any worker count produces the bit-identical corpus. For
// organs with at least 1000 generated ROIs the realized accuracy is
// checked against the target within three binomial standard errors.
// Throws config_error on infeasible configurations.
ScenarioCorpus generate(const SimulatorConfig& config, size_t workers = 1);

}  // namespace organfuse
