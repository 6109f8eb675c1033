#include "organfuse/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "organfuse/errors.hpp"

namespace organfuse {

FusionRule parse_fusion_rule(std::string_view name) {
  if (name == "sum") return FusionRule::sum;
  if (name == "product") return FusionRule::product;
  if (name == "voting") return FusionRule::voting;
  throw parse_error("unknown fusion rule '" + std::string(name) +
                    "' (expected sum, product, or voting)");
}

std::string_view to_string(FusionRule rule) {
  switch (rule) {
    case FusionRule::sum: return "sum";
    case FusionRule::product: return "product";
    case FusionRule::voting: return "voting";
  }
  return "sum";
}

OrganPrior::OrganPrior() {
  weights_.fill(1.0 / static_cast<double>(kOrganCount));
}

OrganPrior OrganPrior::from_weights(const std::map<OrganClass, double>& weights) {
  OrganPrior prior;
  prior.weights_.fill(0.0);
  double sum = 0.0;
  for (const auto& [organ, w] : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw validation_error("organ prior: weight for '" +
                             std::string(to_string(organ)) +
                             "' must be a finite non-negative number");
    }
    prior.weights_[static_cast<size_t>(organ)] = w;
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw validation_error("organ prior: weights sum to " + std::to_string(sum) +
                           ", outside tolerance of 1");
  }
  for (double& w : prior.weights_) w /= sum;
  return prior;
}

namespace {

void check_vectors(std::span<const std::vector<double>> vectors) {
  if (vectors.empty()) {
    throw validation_error("fusion: empty input");
  }
  const size_t dim = vectors.front().size();
  if (dim == 0) {
    throw validation_error("fusion: zero-length probability vector");
  }
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      throw validation_error("fusion: probability vectors differ in length");
    }
  }
}

// ROIs sorted by roi_index so any permutation of the input list runs the
// identical floating-point computation.
std::vector<const RoiPrediction*> canonical_order(
    std::span<const RoiPrediction* const> rois) {
  if (rois.empty()) {
    throw validation_error("no detections for image");
  }
  std::vector<const RoiPrediction*> order(rois.begin(), rois.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const RoiPrediction* a, const RoiPrediction* b) {
                     return a->roi_index < b->roi_index;
                   });
  return order;
}

std::vector<const RoiPrediction*> to_pointers(
    const std::vector<RoiPrediction>& rois) {
  std::vector<const RoiPrediction*> out;
  out.reserve(rois.size());
  for (const auto& roi : rois) out.push_back(&roi);
  return out;
}

std::vector<std::vector<double>> extract_vectors(
    const std::vector<const RoiPrediction*>& rois) {
  std::vector<std::vector<double>> vectors;
  vectors.reserve(rois.size());
  for (const auto* roi : rois) vectors.push_back(roi->distribution.probs);
  return vectors;
}

std::vector<double> extract_weights(const std::vector<const RoiPrediction*>& rois,
                                    const OrganPrior& prior) {
  std::vector<double> weights;
  weights.reserve(rois.size());
  for (const auto* roi : rois) weights.push_back(prior.weight(roi->organ));
  return weights;
}

size_t argmax_lowest(const std::vector<double>& v) {
  return static_cast<size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

std::vector<double> weighted_mean(std::span<const std::vector<double>> vectors,
                                  std::span<const double> weights) {
  check_vectors(vectors);
  if (weights.size() != vectors.size()) {
    throw validation_error("fusion: weight count does not match vector count");
  }
  double total_weight = 0.0;
  for (double w : weights) total_weight += w;
  if (total_weight <= 0.0) {
    throw validation_error("fusion: all organ weights are zero, no mass to fuse");
  }
  if (vectors.size() == 1) return vectors.front();
  const bool all_equal =
      std::all_of(weights.begin(), weights.end(),
                  [&](double w) { return w == weights.front(); });
  std::vector<double> out(vectors.front().size(), 0.0);
  if (all_equal) {
    // Equal weights cancel; the plain mean keeps the result exactly equal
    // to the unweighted average of the inputs.
    for (const auto& v : vectors) {
      for (size_t s = 0; s < out.size(); ++s) out[s] += v[s];
    }
    const double n = static_cast<double>(vectors.size());
    for (double& p : out) p /= n;
    return out;
  }
  for (size_t i = 0; i < vectors.size(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const auto& v = vectors[i];
    for (size_t s = 0; s < out.size(); ++s) out[s] += w * v[s];
  }
  for (double& p : out) p /= total_weight;
  return out;
}

std::vector<double> log_domain_product(std::span<const std::vector<double>> vectors,
                                       double epsilon) {
  check_vectors(vectors);
  const size_t dim = vectors.front().size();
  std::vector<double> log_score(dim, 0.0);
  for (const auto& v : vectors) {
    for (size_t s = 0; s < dim; ++s) {
      log_score[s] += std::log(std::max(v[s], epsilon));
    }
  }
  // Shift by the max before exponentiating so extreme products stay finite.
  const double shift = *std::max_element(log_score.begin(), log_score.end());
  std::vector<double> out(dim);
  double sum = 0.0;
  for (size_t s = 0; s < dim; ++s) {
    out[s] = std::exp(log_score[s] - shift);
    sum += out[s];
  }
  for (double& p : out) p /= sum;
  return out;
}

namespace {

SpeciesDistribution fuse_sum_ptrs(std::span<const RoiPrediction* const> rois,
                                  const OrganPrior& prior) {
  const auto order = canonical_order(rois);
  const auto vectors = extract_vectors(order);
  const auto weights = extract_weights(order, prior);
  return SpeciesDistribution{weighted_mean(vectors, weights)};
}

SpeciesDistribution fuse_product_ptrs(std::span<const RoiPrediction* const> rois) {
  const auto vectors = extract_vectors(canonical_order(rois));
  return SpeciesDistribution{log_domain_product(vectors)};
}

SpeciesDistribution fuse_vote_ptrs(std::span<const RoiPrediction* const> rois,
                                   const OrganPrior& prior) {
  const auto order = canonical_order(rois);
  const auto vectors = extract_vectors(order);
  const size_t dim = vectors.front().size();
  std::vector<std::vector<double>> one_hots;
  one_hots.reserve(vectors.size());
  for (const auto& v : vectors) {
    std::vector<double> hot(dim, 0.0);
    hot[argmax_lowest(v)] = 1.0;
    one_hots.push_back(std::move(hot));
  }
  const auto weights = extract_weights(order, prior);
  return SpeciesDistribution{weighted_mean(one_hots, weights)};
}

}  // namespace

SpeciesDistribution fuse_sum(const std::vector<RoiPrediction>& rois,
                             const OrganPrior& prior) {
  return fuse_sum_ptrs(to_pointers(rois), prior);
}

SpeciesDistribution fuse_product(const std::vector<RoiPrediction>& rois,
                                 const OrganPrior& prior) {
  (void)prior;  // the product rule carries no per-organ weighting
  return fuse_product_ptrs(to_pointers(rois));
}

SpeciesDistribution fuse_vote(const std::vector<RoiPrediction>& rois,
                              const OrganPrior& prior) {
  return fuse_vote_ptrs(to_pointers(rois), prior);
}

FusedPrediction predict_species(std::span<const RoiPrediction* const> rois,
                                FusionRule rule, const OrganPrior& prior) {
  if (rois.empty()) {
    throw validation_error("no detections for image");
  }
  const std::string& image_id = rois.front()->image_id;
  for (const auto* roi : rois) {
    if (roi->image_id != image_id) {
      throw validation_error("fusion: ROI predictions span multiple images ('" +
                             image_id + "' and '" + roi->image_id + "')");
    }
  }
  FusedPrediction fused;
  fused.image_id = image_id;
  fused.rule = rule;
  fused.roi_count = rois.size();
  switch (rule) {
    case FusionRule::sum:
      fused.fused_distribution = fuse_sum_ptrs(rois, prior);
      break;
    case FusionRule::product:
      fused.fused_distribution = fuse_product_ptrs(rois);
      break;
    case FusionRule::voting:
      fused.fused_distribution = fuse_vote_ptrs(rois, prior);
      break;
  }
  fused.predicted_species = fused.fused_distribution.argmax();
  return fused;
}

FusedPrediction predict_species(const std::vector<RoiPrediction>& rois,
                                FusionRule rule, const OrganPrior& prior) {
  return predict_species(std::span<const RoiPrediction* const>(to_pointers(rois)),
                         rule, prior);
}

}  // namespace organfuse
