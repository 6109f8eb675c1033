#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "organfuse/types.hpp"

namespace organfuse {

// Per-species split protocol: shuffle the species' image ids with a
// deterministic seeded generator, then assign
//   n_val  = max(1, floor(val_fraction  * n))
//   n_test = max(1, floor(test_fraction * n))
//   n_train = n - n_val - n_test
// taking validation ids first, then test, then train. The max(1, .)
// clauses realize the rule that species below min_one_rule_threshold
// images still place at least one sample into validation and test.
struct SplitSpec {
  double train_fraction = 0.70;
  double val_fraction = 0.10;
  double test_fraction = 0.20;
  int min_one_rule_threshold = 10;  // images; must be >= 3
  uint64_t seed = 0;
};

void validate_spec(const SplitSpec& spec);

// Deterministic per (manifest, seed): image ids are grouped by species,
// sorted lexicographically, and shuffled per species with generator
// "fy-mt19937_64-v1" seeded from the master seed and the species name.
// Throws validation_error naming the first species with fewer than 3
// images.
std::map<std::string, Split> split_dataset(const DatasetManifest& manifest,
                                           const SplitSpec& spec);

// Keeps exactly the species with at least min_leaf_rois leaf annotations
// and, when require_all_organs is set, at least one annotation of each of
// the five organ classes. The species vocabulary is re-indexed densely;
// images of removed species (and their annotations and split assignments)
// are dropped. Throws validation_error when nothing remains.
DatasetManifest down_select(const DatasetManifest& manifest, size_t min_leaf_rois,
                            bool require_all_organs);

struct ScalarStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  int64_t min = 0;
  int64_t max = 0;
};

struct BoxScaleStats {
  double mean_width = 0.0;
  double mean_height = 0.0;
  double std_width = 0.0;   // population standard deviation
  double std_height = 0.0;
  size_t count = 0;
};

struct DatasetStats {
  size_t total_images = 0;
  size_t total_annotations = 0;
  std::map<Split, size_t> split_counts;
  size_t unassigned_images = 0;
  // Over every vocabulary species (species with zero images included).
  ScalarStats samples_per_species;
  // Per organ, the annotation count per species, over every species.
  std::map<OrganClass, ScalarStats> organs_per_species;
  // Per organ with at least one annotation: box width/height scale.
  std::map<OrganClass, BoxScaleStats> bbox_scale;
  // Descending per-species counts (the long-tail curves).
  std::vector<size_t> samples_long_tail;
  std::vector<size_t> organs_long_tail;
};

DatasetStats compute_stats(const DatasetManifest& manifest);

}  // namespace organfuse
