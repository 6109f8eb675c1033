#pragma once

#include <map>
#include <optional>
#include <vector>

#include "organfuse/types.hpp"

namespace organfuse {

// Class-aware greedy non-maximum suppression over the detections of one
// image. Within each organ class, detections are visited in descending
// confidence (ties by input order) and kept iff their IoU with every
// already-kept same-class detection is <= iou_threshold. Cross-class
// overlaps are never suppressed. Output is in descending-confidence order.
std::vector<Detection> nms(const std::vector<Detection>& detections,
                           double iou_threshold);

struct MatchResult {
  // Per detection (input order): index of the matched ground truth, or
  // nullopt for a false positive.
  std::vector<std::optional<size_t>> detection_matches;
  // Per ground truth (input order): whether it was matched.
  std::vector<bool> gt_matched;
  double iou_threshold = 0.0;
};

// Greedy one-to-one matching for the annotations and detections of a
// single image and organ class: detections in descending-confidence order
// (ties by input order) each take the unmatched ground truth of highest
// IoU >= iou_threshold (IoU ties to the lowest ground-truth index).
MatchResult match_detections(const std::vector<GroundTruthAnnotation>& ground_truth,
                             const std::vector<Detection>& detections,
                             double iou_threshold);

struct PrCurvePoint {
  double recall = 0.0;
  double precision = 0.0;
};

// One point per detection in descending-confidence order; recall is
// non-decreasing along the list.
struct PrecisionRecallCurve {
  std::vector<PrCurvePoint> points;
  size_t total_ground_truth = 0;
};

// Cumulative TP/FP points from true-positive flags already in
// descending-confidence order.
PrecisionRecallCurve build_pr_curve(const std::vector<bool>& tp_flags,
                                    size_t total_ground_truth);

// 101-point interpolated average precision: the mean over recall levels
// r in {0.00, 0.01, ..., 1.00} of the maximum precision among points with
// recall >= r (0 when none). Requires total_ground_truth > 0.
double average_precision(const PrecisionRecallCurve& curve);

// IoU thresholds 0.50:0.05:0.95.
std::vector<double> default_iou_thresholds();

struct DetEvalConfig {
  std::vector<double> iou_thresholds = default_iou_thresholds();
  // When set, keeps only the top-k detections per image and class
  // (descending confidence) before matching.
  std::optional<size_t> max_detections_per_class;
};

struct ApReport {
  double ap = 0.0;                       // mean over classes and thresholds
  std::optional<double> ap50;            // mean over classes at IoU 0.50
  std::optional<double> ap75;            // mean over classes at IoU 0.75
  std::map<OrganClass, double> per_organ_ap;  // per-class mean over thresholds
  // Detail: AP per class per threshold, indexed parallel to thresholds.
  std::vector<double> thresholds;
  std::map<OrganClass, std::vector<double>> per_class_per_threshold;
  std::map<OrganClass, size_t> ground_truth_counts;
  size_t detections_evaluated = 0;
};

// COCO-style evaluation over all images of the manifest. Classes with zero
// ground truths are excluded (absent from per_organ_ap, not reported as
// zero). Throws validation_error when the manifest has no annotations.
ApReport evaluate_detections(const DatasetManifest& manifest,
                             const std::vector<Detection>& detections,
                             const DetEvalConfig& config = {});

}  // namespace organfuse
