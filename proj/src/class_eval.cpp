#include "organfuse/class_eval.hpp"

#include <algorithm>
#include <span>
#include <thread>
#include <unordered_map>

#include "organfuse/errors.hpp"

namespace organfuse {

void ConfusionMatrix::add(size_t true_label, size_t predicted_label, int64_t count) {
  if (true_label >= num_classes_ || predicted_label >= num_classes_) {
    throw validation_error("confusion matrix: label outside vocabulary of size " +
                           std::to_string(num_classes_));
  }
  cells_[{true_label, predicted_label}] += count;
}

int64_t ConfusionMatrix::at(size_t true_label, size_t predicted_label) const {
  auto it = cells_.find({true_label, predicted_label});
  return it == cells_.end() ? 0 : it->second;
}

int64_t ConfusionMatrix::row_sum(size_t true_label) const {
  int64_t sum = 0;
  for (auto it = cells_.lower_bound({true_label, 0});
       it != cells_.end() && it->first.first == true_label; ++it) {
    sum += it->second;
  }
  return sum;
}

int64_t ConfusionMatrix::trace() const {
  int64_t sum = 0;
  for (const auto& [cell, count] : cells_) {
    if (cell.first == cell.second) sum += count;
  }
  return sum;
}

int64_t ConfusionMatrix::total() const {
  int64_t sum = 0;
  for (const auto& [cell, count] : cells_) sum += count;
  return sum;
}

double ConfusionMatrix::accuracy() const {
  const int64_t n = total();
  if (n <= 0) {
    throw validation_error("confusion matrix: accuracy of an empty matrix");
  }
  return static_cast<double>(trace()) / static_cast<double>(n);
}

std::vector<std::tuple<size_t, size_t, int64_t>> ConfusionMatrix::nonzero_cells()
    const {
  std::vector<std::tuple<size_t, size_t, int64_t>> out;
  out.reserve(cells_.size());
  for (const auto& [cell, count] : cells_) {
    if (count != 0) out.emplace_back(cell.first, cell.second, count);
  }
  return out;
}

OrganClassifierEval evaluate_organ_classifiers(
    const DatasetManifest& manifest, const std::vector<RoiPrediction>& rois) {
  validate_roi_predictions(manifest, rois);

  std::unordered_map<std::string, int> species_of_image;
  species_of_image.reserve(manifest.images.size());
  for (const auto& img : manifest.images) {
    species_of_image.emplace(img.image_id, img.species_label);
  }

  OrganClassifierEval eval;
  const size_t vocab = manifest.species_vocabulary.size();
  for (const auto& roi : rois) {
    const size_t true_label =
        static_cast<size_t>(species_of_image.at(roi.image_id));
    auto [it, inserted] = eval.confusion.try_emplace(roi.organ, vocab);
    (void)inserted;
    it->second.add(true_label, roi.distribution.argmax());
  }
  for (const auto& [organ, matrix] : eval.confusion) {
    eval.accuracy_percent[organ] = 100.0 * matrix.accuracy();
    eval.roi_counts[organ] = static_cast<size_t>(matrix.total());
  }
  return eval;
}

FallbackPolicy parse_fallback_policy(std::string_view name) {
  if (name == "skip") return FallbackPolicy::skip;
  if (name == "whole-image" || name == "whole_image") return FallbackPolicy::whole_image;
  throw parse_error("unknown fallback policy '" + std::string(name) +
                    "' (expected skip or whole-image)");
}

std::string_view to_string(FallbackPolicy policy) {
  return policy == FallbackPolicy::skip ? "skip" : "whole-image";
}

namespace {

// Outcome of one evaluation image, computed independently per image.
struct ImageOutcome {
  bool has_rois = false;
  std::map<FusionRule, size_t> predicted;
  std::optional<size_t> baseline_predicted;
};

}  // namespace

AccuracyReport evaluate_species_id(
    const DatasetManifest& manifest, const std::vector<RoiPrediction>& rois,
    const SpeciesEvalConfig& config,
    const std::map<std::string, SpeciesDistribution>* whole_image) {
  if (config.rules.empty()) {
    throw config_error("evaluate_species_id: no fusion rules selected");
  }
  if (config.fallback == FallbackPolicy::whole_image && whole_image == nullptr) {
    throw config_error(
        "evaluate_species_id: whole-image fallback requires whole-image predictions");
  }
  validate_roi_predictions(manifest, rois);

  // Evaluation set: the test split when assignments exist, else all images.
  std::vector<const ImageRecord*> eval_images;
  const bool has_splits = !manifest.split_assignments.empty();
  for (const auto& img : manifest.images) {
    if (has_splits) {
      auto it = manifest.split_assignments.find(img.image_id);
      if (it == manifest.split_assignments.end() || it->second != Split::test) {
        continue;
      }
    }
    eval_images.push_back(&img);
  }
  if (eval_images.empty()) {
    throw validation_error("evaluate_species_id: no evaluable images");
  }

  std::unordered_map<std::string, std::vector<const RoiPrediction*>> rois_by_image;
  for (const auto& roi : rois) rois_by_image[roi.image_id].push_back(&roi);

  // Per-image outcomes are independent; compute them into per-image slots
  // so any worker count yields the identical result.
  std::vector<ImageOutcome> outcomes(eval_images.size());
  const auto process_range = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const ImageRecord& img = *eval_images[i];
      ImageOutcome& out = outcomes[i];
      auto roi_it = rois_by_image.find(img.image_id);
      if (roi_it != rois_by_image.end() && !roi_it->second.empty()) {
        out.has_rois = true;
        const std::span<const RoiPrediction* const> group(roi_it->second);
        for (FusionRule rule : config.rules) {
          out.predicted[rule] = predict_species(group, rule, config.prior).predicted_species;
        }
      }
      if (whole_image != nullptr) {
        auto base_it = whole_image->find(img.image_id);
        if (base_it != whole_image->end()) {
          out.baseline_predicted = base_it->second.argmax();
        }
      }
    }
  };

  const size_t workers = std::max<size_t>(1, config.workers);
  if (workers == 1 || eval_images.size() < 2 * workers) {
    process_range(0, eval_images.size());
  } else {
    std::vector<std::thread> threads;
    const size_t chunk = (eval_images.size() + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
      const size_t begin = w * chunk;
      const size_t end = std::min(eval_images.size(), begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(process_range, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  AccuracyReport report;
  for (FusionRule rule : config.rules) report.correct[rule] = 0;
  size_t baseline_correct = 0;
  size_t baseline_total = 0;

  for (size_t i = 0; i < eval_images.size(); ++i) {
    const ImageRecord& img = *eval_images[i];
    const ImageOutcome& out = outcomes[i];
    const size_t truth = static_cast<size_t>(img.species_label);

    if (out.baseline_predicted) {
      ++baseline_total;
      if (*out.baseline_predicted == truth) ++baseline_correct;
    }

    if (out.has_rois) {
      ++report.evaluated;
      for (FusionRule rule : config.rules) {
        if (out.predicted.at(rule) == truth) ++report.correct[rule];
      }
    } else if (config.fallback == FallbackPolicy::skip) {
      ++report.skipped;
    } else {
      if (!out.baseline_predicted) {
        throw validation_error(
            "evaluate_species_id: whole-image fallback selected but no "
            "whole-image prediction for image '" + img.image_id + "'");
      }
      ++report.evaluated;
      ++report.fallback_images;
      for (FusionRule rule : config.rules) {
        if (*out.baseline_predicted == truth) ++report.correct[rule];
      }
    }
  }

  if (report.evaluated == 0) {
    throw validation_error("evaluate_species_id: no evaluable images");
  }
  for (FusionRule rule : config.rules) {
    report.accuracy_percent[rule] = 100.0 * static_cast<double>(report.correct[rule]) /
                                    static_cast<double>(report.evaluated);
  }
  if (whole_image != nullptr && baseline_total > 0) {
    report.baseline_correct = baseline_correct;
    report.baseline_accuracy_percent =
        100.0 * static_cast<double>(baseline_correct) /
        static_cast<double>(baseline_total);
  }
  return report;
}

}  // namespace organfuse
