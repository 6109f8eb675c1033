#include "organfuse/detection_eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "organfuse/errors.hpp"
#include "organfuse/geometry.hpp"

namespace organfuse {

namespace {

// Indices sorted by descending confidence, ties by ascending input index.
std::vector<size_t> confidence_order(const std::vector<Detection>& detections) {
  std::vector<size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });
  return order;
}

}  // namespace

std::vector<Detection> nms(const std::vector<Detection>& detections,
                           double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw config_error("nms: iou_threshold must lie in [0, 1]");
  }
  for (const auto& det : detections) {
    if (det.image_id != detections.front().image_id) {
      throw validation_error("nms: detections span multiple images ('" +
                             detections.front().image_id + "' and '" +
                             det.image_id + "')");
    }
  }

  const std::vector<size_t> order = confidence_order(detections);
  std::vector<size_t> kept;
  std::array<std::vector<size_t>, kOrganCount> kept_by_class;
  for (size_t idx : order) {
    const Detection& candidate = detections[idx];
    auto& same_class = kept_by_class[static_cast<size_t>(candidate.organ)];
    const bool keep = std::all_of(same_class.begin(), same_class.end(), [&](size_t k) {
      return iou(candidate.box, detections[k].box) <= iou_threshold;
    });
    if (keep) {
      kept.push_back(idx);
      same_class.push_back(idx);
    }
  }

  std::vector<Detection> result;
  result.reserve(kept.size());
  for (size_t idx : kept) result.push_back(detections[idx]);
  return result;
}

MatchResult match_detections(const std::vector<GroundTruthAnnotation>& ground_truth,
                             const std::vector<Detection>& detections,
                             double iou_threshold) {
  MatchResult result;
  result.iou_threshold = iou_threshold;
  result.detection_matches.assign(detections.size(), std::nullopt);
  result.gt_matched.assign(ground_truth.size(), false);

  for (size_t det_idx : confidence_order(detections)) {
    double best_iou = 0.0;
    std::optional<size_t> best_gt;
    for (size_t g = 0; g < ground_truth.size(); ++g) {
      if (result.gt_matched[g]) continue;
      const double overlap = iou(detections[det_idx].box, ground_truth[g].box);
      if (overlap < iou_threshold) continue;
      if (!best_gt || overlap > best_iou) {
        best_iou = overlap;
        best_gt = g;
      }
    }
    if (best_gt) {
      result.detection_matches[det_idx] = *best_gt;
      result.gt_matched[*best_gt] = true;
    }
  }
  return result;
}

PrecisionRecallCurve build_pr_curve(const std::vector<bool>& tp_flags,
                                    size_t total_ground_truth) {
  PrecisionRecallCurve curve;
  curve.total_ground_truth = total_ground_truth;
  curve.points.reserve(tp_flags.size());
  size_t tp = 0;
  for (size_t k = 0; k < tp_flags.size(); ++k) {
    if (tp_flags[k]) ++tp;
    PrCurvePoint point;
    point.recall = total_ground_truth == 0
                       ? 0.0
                       : static_cast<double>(tp) / static_cast<double>(total_ground_truth);
    point.precision = static_cast<double>(tp) / static_cast<double>(k + 1);
    curve.points.push_back(point);
  }
  return curve;
}

double average_precision(const PrecisionRecallCurve& curve) {
  if (curve.total_ground_truth == 0) {
    throw validation_error("average_precision: curve has zero ground truths");
  }
  const size_t n = curve.points.size();
  // Precision envelope: envelope[k] = max precision from point k onward.
  std::vector<double> envelope(n);
  double running = 0.0;
  for (size_t k = n; k-- > 0;) {
    running = std::max(running, curve.points[k].precision);
    envelope[k] = running;
  }
  double sum = 0.0;
  size_t k = 0;
  for (int level = 0; level <= 100; ++level) {
    const double r = static_cast<double>(level) / 100.0;
    while (k < n && curve.points[k].recall < r) ++k;
    if (k == n) break;  // no point reaches this recall; contributes 0
    sum += envelope[k];
  }
  return sum / 101.0;
}

std::vector<double> default_iou_thresholds() {
  std::vector<double> thresholds;
  for (int t = 50; t <= 95; t += 5) {
    thresholds.push_back(static_cast<double>(t) / 100.0);
  }
  return thresholds;
}

ApReport evaluate_detections(const DatasetManifest& manifest,
                             const std::vector<Detection>& detections,
                             const DetEvalConfig& config) {
  if (config.iou_thresholds.empty()) {
    throw config_error("evaluate_detections: no IoU thresholds configured");
  }
  for (double t : config.iou_thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw config_error("evaluate_detections: IoU thresholds must lie in [0, 1]");
    }
  }
  if (config.max_detections_per_class && *config.max_detections_per_class == 0) {
    throw config_error("evaluate_detections: max_detections_per_class must be >= 1");
  }
  if (manifest.annotations.empty()) {
    throw validation_error("evaluate_detections: manifest has no ground-truth annotations");
  }
  validate_detections(manifest, detections);

  // Ground truth grouped per (image, class); totals per class.
  std::array<size_t, kOrganCount> total_gt{};
  std::array<std::unordered_map<std::string, std::vector<GroundTruthAnnotation>>,
             kOrganCount>
      gt_by_image;
  for (const auto& ann : manifest.annotations) {
    const size_t c = static_cast<size_t>(ann.organ);
    ++total_gt[c];
    gt_by_image[c][ann.image_id].push_back(ann);
  }

  // Detections grouped per (class, image), kept in input order so ties are
  // broken by input-file position.
  struct IndexedDetection {
    Detection det;
    size_t input_index;
  };
  std::array<std::unordered_map<std::string, std::vector<IndexedDetection>>,
             kOrganCount>
      det_by_image;
  for (size_t i = 0; i < detections.size(); ++i) {
    const size_t c = static_cast<size_t>(detections[i].organ);
    det_by_image[c][detections[i].image_id].push_back({detections[i], i});
  }

  ApReport report;
  report.thresholds = config.iou_thresholds;

  size_t pair_count = 0;
  double pair_sum = 0.0;
  double ap50_sum = 0.0, ap75_sum = 0.0;
  size_t ap50_classes = 0, ap75_classes = 0;
  const auto is_threshold = [](double a, double b) { return std::abs(a - b) < 1e-9; };

  for (OrganClass organ : kOrganClasses) {
    const size_t c = static_cast<size_t>(organ);
    if (total_gt[c] == 0) continue;  // class absent, not zero
    report.ground_truth_counts[organ] = total_gt[c];

    // Cap per image if configured, then order per image by confidence.
    std::vector<std::vector<IndexedDetection>> image_groups;
    for (auto& [image_id, group] : det_by_image[c]) {
      (void)image_id;
      std::stable_sort(group.begin(), group.end(),
                       [](const IndexedDetection& a, const IndexedDetection& b) {
                         return a.det.confidence > b.det.confidence;
                       });
      if (config.max_detections_per_class &&
          group.size() > *config.max_detections_per_class) {
        group.resize(*config.max_detections_per_class);
      }
      image_groups.push_back(group);
    }

    std::vector<double> per_threshold_ap;
    per_threshold_ap.reserve(config.iou_thresholds.size());
    for (double threshold : config.iou_thresholds) {
      struct Scored {
        double confidence;
        size_t input_index;
        bool tp;
      };
      std::vector<Scored> pooled;
      for (const auto& group : image_groups) {
        const std::string& image_id = group.front().det.image_id;
        std::vector<Detection> dets;
        dets.reserve(group.size());
        for (const auto& entry : group) dets.push_back(entry.det);
        static const std::vector<GroundTruthAnnotation> kNoGt;
        auto gt_it = gt_by_image[c].find(image_id);
        const auto& gts = gt_it == gt_by_image[c].end() ? kNoGt : gt_it->second;
        const MatchResult match = match_detections(gts, dets, threshold);
        for (size_t k = 0; k < group.size(); ++k) {
          pooled.push_back({group[k].det.confidence, group[k].input_index,
                            match.detection_matches[k].has_value()});
        }
      }
      std::sort(pooled.begin(), pooled.end(), [](const Scored& a, const Scored& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return a.input_index < b.input_index;
      });
      std::vector<bool> tp_flags;
      tp_flags.reserve(pooled.size());
      for (const auto& s : pooled) tp_flags.push_back(s.tp);
      const double ap_value =
          average_precision(build_pr_curve(tp_flags, total_gt[c]));
      per_threshold_ap.push_back(ap_value);
      pair_sum += ap_value;
      ++pair_count;
      if (is_threshold(threshold, 0.50)) {
        ap50_sum += ap_value;
        ++ap50_classes;
      }
      if (is_threshold(threshold, 0.75)) {
        ap75_sum += ap_value;
        ++ap75_classes;
      }
    }
    report.per_organ_ap[organ] =
        std::accumulate(per_threshold_ap.begin(), per_threshold_ap.end(), 0.0) /
        static_cast<double>(per_threshold_ap.size());
    report.per_class_per_threshold[organ] = std::move(per_threshold_ap);
  }

  report.ap = pair_sum / static_cast<double>(pair_count);
  if (ap50_classes > 0) report.ap50 = ap50_sum / static_cast<double>(ap50_classes);
  if (ap75_classes > 0) report.ap75 = ap75_sum / static_cast<double>(ap75_classes);
  report.detections_evaluated = detections.size();
  return report;
}

}  // namespace organfuse
