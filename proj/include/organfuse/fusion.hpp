#pragma once

#include <array>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "organfuse/types.hpp"

namespace organfuse {

enum class FusionRule { sum, product, voting };

inline constexpr std::array<FusionRule, 3> kFusionRules = {
    FusionRule::sum, FusionRule::product, FusionRule::voting};

FusionRule parse_fusion_rule(std::string_view name);
std::string_view to_string(FusionRule rule);

// Per-organ-class fusion weights p(o). Non-negative, summing to 1 within
// 1e-6 (renormalized on construction). Uniform over the five classes by
// default.
class OrganPrior {
 public:
  OrganPrior();  // uniform
  static OrganPrior uniform() { return OrganPrior(); }
  static OrganPrior from_weights(const std::map<OrganClass, double>& weights);

  double weight(OrganClass organ) const {
    return weights_[static_cast<size_t>(organ)];
  }

 private:
  std::array<double, kOrganCount> weights_;
};

struct FusedPrediction {
  std::string image_id;
  SpeciesDistribution fused_distribution;
  size_t predicted_species = 0;  // argmax of fused_distribution
  FusionRule rule = FusionRule::sum;
  size_t roi_count = 0;
};

// Value-level building blocks. `vectors` must be non-empty and uniform in
// length; weights pair up with vectors one-to-one.

// Weighted mean sum_i w_i * v_i / sum_i w_i. Throws validation_error when
// all weights are zero.
std::vector<double> weighted_mean(std::span<const std::vector<double>> vectors,
                                  std::span<const double> weights);

// Elementwise product computed in the log domain with entries floored at
// epsilon, then normalized to sum 1.
std::vector<double> log_domain_product(std::span<const std::vector<double>> vectors,
                                       double epsilon = 1e-12);

// Fusion rules over the ROI predictions of one image. Each ROI's weight is
// the prior weight of its organ class; the product rule does not weight.

// p(s) = sum_i p(s|o_i) w(o_i) / sum_i w(o_i); plain average under the
// uniform prior.
SpeciesDistribution fuse_sum(const std::vector<RoiPrediction>& rois,
                             const OrganPrior& prior);

// argmax-equivalent to prod_i p(s|o_i); entries floored at 1e-12 so a
// single zero never annihilates a species' score.
SpeciesDistribution fuse_product(const std::vector<RoiPrediction>& rois,
                                 const OrganPrior& prior);

// Each ROI casts a one-hot vote at its argmax (ties to the lowest index);
// votes are prior-weight averaged as in fuse_sum.
SpeciesDistribution fuse_vote(const std::vector<RoiPrediction>& rois,
                              const OrganPrior& prior);

// Dispatches to the chosen rule and takes the argmax (ties to the lowest
// species index). All ROIs must carry the same image_id. Throws
// validation_error("no detections for image") on an empty list.
FusedPrediction predict_species(const std::vector<RoiPrediction>& rois,
                                FusionRule rule, const OrganPrior& prior);

// Pointer form for callers that group large ROI collections without
// copying records.
FusedPrediction predict_species(std::span<const RoiPrediction* const> rois,
                                FusionRule rule, const OrganPrior& prior);

}  // namespace organfuse
