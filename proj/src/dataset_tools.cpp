#include "organfuse/dataset_tools.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "organfuse/errors.hpp"
#include "organfuse/rng.hpp"

namespace organfuse {

namespace {

// Guards against representation error in fraction * n (e.g. 0.1 * 10).
size_t floor_fraction(double fraction, size_t n) {
  return static_cast<size_t>(
      std::floor(fraction * static_cast<double>(n) + 1e-9));
}

ScalarStats scalar_stats(const std::vector<int64_t>& values) {
  ScalarStats stats;
  if (values.empty()) return stats;
  stats.min = *std::min_element(values.begin(), values.end());
  stats.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (int64_t v : values) sum += static_cast<double>(v);
  stats.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (int64_t v : values) {
    const double d = static_cast<double>(v) - stats.mean;
    sq += d * d;
  }
  stats.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return stats;
}

}  // namespace

void validate_spec(const SplitSpec& spec) {
  const double sum = spec.train_fraction + spec.val_fraction + spec.test_fraction;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw config_error("split: fractions sum to " + std::to_string(sum) +
                       ", expected 1");
  }
  if (spec.train_fraction <= 0.0 || spec.val_fraction <= 0.0 ||
      spec.test_fraction <= 0.0) {
    throw config_error("split: all fractions must be positive");
  }
  if (spec.min_one_rule_threshold < 3) {
    throw config_error("split: min_one_rule_threshold must be >= 3");
  }
}

std::map<std::string, Split> split_dataset(const DatasetManifest& manifest,
                                           const SplitSpec& spec) {
  validate_spec(spec);
  validate_manifest(manifest);

  // Group image ids per species, in vocabulary order.
  std::vector<std::vector<std::string>> ids_per_species(
      manifest.species_vocabulary.size());
  for (const auto& img : manifest.images) {
    ids_per_species[static_cast<size_t>(img.species_label)].push_back(img.image_id);
  }

  std::map<std::string, Split> assignments;
  for (size_t s = 0; s < ids_per_species.size(); ++s) {
    auto& ids = ids_per_species[s];
    if (ids.empty()) continue;
    const std::string& species = manifest.species_vocabulary[s];
    if (ids.size() < 3) {
      throw validation_error("split: species '" + species + "' has only " +
                             std::to_string(ids.size()) +
                             " images; at least 3 are required");
    }
    // Sorted before shuffling so the assignment depends only on the id set.
    std::sort(ids.begin(), ids.end());
    DeterministicRng rng(derive_seed(spec.seed, fnv1a64(species)));
    fisher_yates_shuffle(ids, rng);

    const size_t n = ids.size();
    const size_t n_val = std::max<size_t>(1, floor_fraction(spec.val_fraction, n));
    const size_t n_test = std::max<size_t>(1, floor_fraction(spec.test_fraction, n));
    if (n_val + n_test >= n) {
      throw config_error("split: species '" + species + "' with " +
                         std::to_string(n) +
                         " images leaves no training sample under these fractions");
    }
    size_t k = 0;
    for (size_t i = 0; i < n_val; ++i) assignments[ids[k++]] = Split::val;
    for (size_t i = 0; i < n_test; ++i) assignments[ids[k++]] = Split::test;
    for (; k < n; ++k) assignments[ids[k]] = Split::train;
  }
  return assignments;
}

DatasetManifest down_select(const DatasetManifest& manifest, size_t min_leaf_rois,
                            bool require_all_organs) {
  validate_manifest(manifest);

  const size_t vocab = manifest.species_vocabulary.size();
  std::unordered_map<std::string, int> species_of_image;
  species_of_image.reserve(manifest.images.size());
  for (const auto& img : manifest.images) {
    species_of_image.emplace(img.image_id, img.species_label);
  }

  // Per species: leaf annotation count and organ presence.
  std::vector<size_t> leaf_counts(vocab, 0);
  std::vector<std::array<bool, kOrganCount>> organ_present(
      vocab, std::array<bool, kOrganCount>{});
  for (const auto& ann : manifest.annotations) {
    const int s = species_of_image.at(ann.image_id);
    organ_present[s][static_cast<size_t>(ann.organ)] = true;
    if (ann.organ == OrganClass::leaf) ++leaf_counts[s];
  }

  std::vector<int> new_index(vocab, -1);
  DatasetManifest reduced;
  for (size_t s = 0; s < vocab; ++s) {
    if (leaf_counts[s] < min_leaf_rois) continue;
    if (require_all_organs) {
      const auto& present = organ_present[s];
      if (!std::all_of(present.begin(), present.end(), [](bool p) { return p; })) {
        continue;
      }
    }
    new_index[s] = static_cast<int>(reduced.species_vocabulary.size());
    reduced.species_vocabulary.push_back(manifest.species_vocabulary[s]);
  }
  if (reduced.species_vocabulary.empty()) {
    throw validation_error("down_select: no species meets the criteria");
  }

  std::unordered_set<std::string> kept_images;
  for (const auto& img : manifest.images) {
    const int remapped = new_index[static_cast<size_t>(img.species_label)];
    if (remapped < 0) continue;
    ImageRecord copy = img;
    copy.species_label = remapped;
    reduced.images.push_back(std::move(copy));
    kept_images.insert(img.image_id);
  }
  for (const auto& ann : manifest.annotations) {
    if (kept_images.count(ann.image_id)) reduced.annotations.push_back(ann);
  }
  for (const auto& [image_id, split] : manifest.split_assignments) {
    if (kept_images.count(image_id)) reduced.split_assignments[image_id] = split;
  }
  return reduced;
}

DatasetStats compute_stats(const DatasetManifest& manifest) {
  DatasetStats stats;
  stats.total_images = manifest.images.size();
  stats.total_annotations = manifest.annotations.size();

  stats.split_counts[Split::train] = 0;
  stats.split_counts[Split::val] = 0;
  stats.split_counts[Split::test] = 0;
  for (const auto& img : manifest.images) {
    auto it = manifest.split_assignments.find(img.image_id);
    if (it == manifest.split_assignments.end()) {
      ++stats.unassigned_images;
    } else {
      ++stats.split_counts[it->second];
    }
  }

  const size_t vocab = manifest.species_vocabulary.size();
  std::vector<int64_t> samples(vocab, 0);
  std::unordered_map<std::string, int> species_of_image;
  species_of_image.reserve(manifest.images.size());
  for (const auto& img : manifest.images) {
    ++samples[static_cast<size_t>(img.species_label)];
    species_of_image.emplace(img.image_id, img.species_label);
  }
  stats.samples_per_species = scalar_stats(samples);

  std::array<std::vector<int64_t>, kOrganCount> organ_counts;
  organ_counts.fill(std::vector<int64_t>(vocab, 0));
  std::vector<int64_t> organs_total(vocab, 0);
  std::array<std::vector<double>, kOrganCount> widths;
  std::array<std::vector<double>, kOrganCount> heights;
  for (const auto& ann : manifest.annotations) {
    const size_t c = static_cast<size_t>(ann.organ);
    const int s = species_of_image.at(ann.image_id);
    ++organ_counts[c][s];
    ++organs_total[s];
    widths[c].push_back(ann.box.width());
    heights[c].push_back(ann.box.height());
  }
  for (OrganClass organ : kOrganClasses) {
    const size_t c = static_cast<size_t>(organ);
    stats.organs_per_species[organ] = scalar_stats(organ_counts[c]);
    if (widths[c].empty()) continue;
    BoxScaleStats scale;
    scale.count = widths[c].size();
    const double n = static_cast<double>(scale.count);
    for (double w : widths[c]) scale.mean_width += w;
    for (double h : heights[c]) scale.mean_height += h;
    scale.mean_width /= n;
    scale.mean_height /= n;
    double sqw = 0.0, sqh = 0.0;
    for (double w : widths[c]) sqw += (w - scale.mean_width) * (w - scale.mean_width);
    for (double h : heights[c]) sqh += (h - scale.mean_height) * (h - scale.mean_height);
    scale.std_width = std::sqrt(sqw / n);
    scale.std_height = std::sqrt(sqh / n);
    stats.bbox_scale[organ] = scale;
  }

  stats.samples_long_tail.assign(samples.begin(), samples.end());
  std::sort(stats.samples_long_tail.begin(), stats.samples_long_tail.end(),
            std::greater<>());
  stats.organs_long_tail.assign(organs_total.begin(), organs_total.end());
  std::sort(stats.organs_long_tail.begin(), stats.organs_long_tail.end(),
            std::greater<>());
  return stats;
}

}  // namespace organfuse
