#include "organfuse/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "organfuse/errors.hpp"
#include "organfuse/rng.hpp"

namespace organfuse {

SimulatorConfig::SimulatorConfig() {
  for (OrganClass organ : kOrganClasses) {
    organ_accuracy[organ] = 0.8;
    organ_mean_rois[organ] = 1.0;
  }
}

namespace {

void validate_config(const SimulatorConfig& config) {
  if (config.species_count < 2) {
    throw config_error("simulator: species_count must be >= 2");
  }
  if (!config.long_tail && config.images_per_species == 0) {
    throw config_error("simulator: images_per_species must be >= 1");
  }
  if (config.long_tail) {
    const LongTailProfile& p = *config.long_tail;
    if (p.mean <= 0.0 || p.stddev < 0.0 || p.min_count < 1 ||
        p.min_count > p.max_count) {
      throw config_error("simulator: invalid long-tail profile");
    }
  }
  double mean_sum = 0.0;
  for (OrganClass organ : kOrganClasses) {
    auto acc_it = config.organ_accuracy.find(organ);
    if (acc_it == config.organ_accuracy.end() || acc_it->second < 0.0 ||
        acc_it->second > 1.0) {
      throw config_error("simulator: accuracy for '" +
                         std::string(to_string(organ)) + "' must lie in [0, 1]");
    }
    auto mean_it = config.organ_mean_rois.find(organ);
    if (mean_it == config.organ_mean_rois.end() || mean_it->second < 0.0 ||
        !std::isfinite(mean_it->second)) {
      throw config_error("simulator: mean ROI count for '" +
                         std::string(to_string(organ)) + "' must be >= 0");
    }
    mean_sum += mean_it->second;
  }
  if (mean_sum <= 0.0) {
    throw config_error("simulator: at least one organ needs a positive mean ROI count");
  }
  if (config.max_rois_per_organ == 0) {
    throw config_error("simulator: max_rois_per_organ must be >= 1");
  }
  const double spread = config.confusion_spread;
  const double wrong_share =
      spread / static_cast<double>(config.species_count - 1);
  if (!(spread >= 0.0 && spread < 1.0) || !(1.0 - spread > wrong_share)) {
    throw config_error(
        "simulator: infeasible confusion_spread; the intended argmax would not "
        "hold the largest probability");
  }
  if (config.image_width < 32 || config.image_height < 32) {
    throw config_error("simulator: image dimensions must be >= 32 pixels");
  }
}

std::vector<int64_t> draw_species_counts(const SimulatorConfig& config) {
  std::vector<int64_t> counts(config.species_count);
  if (!config.long_tail) {
    std::fill(counts.begin(), counts.end(),
              static_cast<int64_t>(config.images_per_species));
    return counts;
  }
  const LongTailProfile& p = *config.long_tail;
  // Log-normal moment matching on the target mean and stddev.
  const double ratio = p.stddev / p.mean;
  const double sigma2 = std::log(1.0 + ratio * ratio);
  const double mu = std::log(p.mean) - 0.5 * sigma2;
  const double sigma = std::sqrt(sigma2);
  DeterministicRng rng(derive_seed(config.seed, 0));
  for (auto& count : counts) {
    const double value = std::exp(mu + sigma * rng.next_normal());
    count = std::clamp(static_cast<int64_t>(std::llround(value)), p.min_count,
                       p.max_count);
  }
  return counts;
}

BoundingBox draw_box(DeterministicRng& rng, int image_width, int image_height) {
  const uint64_t max_w = std::min<uint64_t>(image_width, 256);
  const uint64_t max_h = std::min<uint64_t>(image_height, 256);
  const uint64_t w = rng.next_between(16, max_w);
  const uint64_t h = rng.next_between(16, max_h);
  const uint64_t x = rng.next_below(static_cast<uint64_t>(image_width) - w + 1);
  const uint64_t y = rng.next_below(static_cast<uint64_t>(image_height) - h + 1);
  return BoundingBox{static_cast<double>(x), static_cast<double>(y),
                     static_cast<double>(x + w), static_cast<double>(y + h)};
}

}  // namespace

ScenarioCorpus generate(const SimulatorConfig& config, size_t workers) {
  validate_config(config);

  const std::vector<int64_t> counts = draw_species_counts(config);

  ScenarioCorpus corpus;
  corpus.manifest.species_vocabulary.reserve(config.species_count);
  char name[48];
  for (size_t s = 0; s < config.species_count; ++s) {
    std::snprintf(name, sizeof(name), "species_%04zu", s);
    corpus.manifest.species_vocabulary.emplace_back(name);
  }
  for (size_t s = 0; s < config.species_count; ++s) {
    for (int64_t k = 0; k < counts[s]; ++k) {
      ImageRecord img;
      std::snprintf(name, sizeof(name), "img_%04zu_%04lld", s,
                    static_cast<long long>(k));
      img.image_id = name;
      img.width = config.image_width;
      img.height = config.image_height;
      img.species_label = static_cast<int>(s);
      corpus.manifest.images.push_back(std::move(img));
    }
  }

  const size_t num_images = corpus.manifest.images.size();
  const size_t species_count = config.species_count;
  const double spread = config.confusion_spread;
  const double wrong_share = spread / static_cast<double>(species_count - 1);

  // Per-image slots filled from per-image sub-seeds; worker count cannot
  // change the result.
  std::vector<std::vector<RoiPrediction>> slots(num_images);
  const auto generate_range = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const ImageRecord& img = corpus.manifest.images[i];
      const size_t truth = static_cast<size_t>(img.species_label);
      DeterministicRng rng(derive_seed(config.seed, 1 + i));
      std::vector<RoiPrediction>& rois = slots[i];
      int roi_index = 0;
      for (OrganClass organ : kOrganClasses) {
        const double lambda = config.organ_mean_rois.at(organ);
        const uint64_t roi_count =
            rng.poisson_truncated(lambda, config.max_rois_per_organ);
        const double accuracy = config.organ_accuracy.at(organ);
        for (uint64_t r = 0; r < roi_count; ++r) {
          RoiPrediction roi;
          roi.image_id = img.image_id;
          roi.roi_index = roi_index++;
          roi.organ = organ;
          roi.box = draw_box(rng, config.image_width, config.image_height);
          size_t argmax = truth;
          if (rng.next_double() >= accuracy) {
            size_t wrong = static_cast<size_t>(rng.next_below(species_count - 1));
            if (wrong >= truth) ++wrong;
            argmax = wrong;
          }
          std::vector<double> probs(species_count, wrong_share);
          probs[argmax] = 1.0 - spread;
          roi.distribution = make_distribution(std::move(probs));
          rois.push_back(std::move(roi));
        }
      }
    }
  };

  const size_t worker_count = std::max<size_t>(1, workers);
  if (worker_count == 1 || num_images < 2 * worker_count) {
    generate_range(0, num_images);
  } else {
    std::vector<std::thread> threads;
    const size_t chunk = (num_images + worker_count - 1) / worker_count;
    for (size_t w = 0; w < worker_count; ++w) {
      const size_t begin = w * chunk;
      const size_t end = std::min(num_images, begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(generate_range, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  std::map<OrganClass, size_t> correct_counts;
  for (size_t i = 0; i < num_images; ++i) {
    const size_t truth =
        static_cast<size_t>(corpus.manifest.images[i].species_label);
    for (auto& roi : slots[i]) {
      corpus.manifest.annotations.push_back(
          GroundTruthAnnotation{roi.image_id, roi.organ, roi.box});
      ++corpus.roi_counts[roi.organ];
      if (roi.distribution.argmax() == truth) ++correct_counts[roi.organ];
      corpus.rois.push_back(std::move(roi));
    }
  }

  for (const auto& [organ, count] : corpus.roi_counts) {
    const double realized = static_cast<double>(correct_counts[organ]) /
                            static_cast<double>(count);
    corpus.realized_accuracy[organ] = realized;
    if (count >= 1000) {
      const double target = config.organ_accuracy.at(organ);
      const double stderr_bound =
          3.0 * std::sqrt(target * (1.0 - target) / static_cast<double>(count));
      if (std::abs(realized - target) > stderr_bound) {
        throw validation_error(
            "simulator: realized accuracy for '" + std::string(to_string(organ)) +
            "' (" + std::to_string(realized) + ") deviates from the target (" +
            std::to_string(target) + ") by more than three binomial standard errors");
      }
    }
  }
  return corpus;
}

}  // namespace organfuse
