#include "organfuse/report.hpp"

#include <cstdio>

namespace organfuse {

using nlohmann::json;

namespace {

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

std::string fmt0(double v) { return fmt("%.0f", v); }
std::string fmt1(double v) { return fmt("%.1f", v); }
std::string fmt2(double v) { return fmt("%.2f", v); }

json scalar_stats_to_json(const ScalarStats& s) {
  return json{{"mean", s.mean}, {"stddev", s.stddev}, {"min", s.min}, {"max", s.max}};
}

}  // namespace

std::string_view display_name(OrganClass organ) {
  switch (organ) {
    case OrganClass::leaf: return "Leaf";
    case OrganClass::flower: return "Flower";
    case OrganClass::fruit: return "Fruit";
    case OrganClass::stem: return "Stem";
    case OrganClass::hdl: return "HDL";
  }
  return "Leaf";
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    out += "|";
    for (size_t c = 0; c < row.size(); ++c) {
      out += " " + row[c] + std::string(widths[c] - row[c].size(), ' ') + " |";
    }
    out += "\n";
  }
  return out;
}

json stats_to_json(const DatasetStats& stats) {
  json doc;
  doc["total_images"] = stats.total_images;
  doc["total_annotations"] = stats.total_annotations;
  json splits;
  for (const auto& [split, count] : stats.split_counts) {
    splits[std::string(to_string(split))] = count;
  }
  splits["unassigned"] = stats.unassigned_images;
  doc["splits"] = std::move(splits);
  doc["samples_per_species"] = scalar_stats_to_json(stats.samples_per_species);
  json organs;
  for (const auto& [organ, s] : stats.organs_per_species) {
    organs[std::string(to_string(organ))] = scalar_stats_to_json(s);
  }
  doc["organs_per_species"] = std::move(organs);
  json scale;
  for (const auto& [organ, s] : stats.bbox_scale) {
    scale[std::string(to_string(organ))] =
        json{{"mean_width", s.mean_width},   {"mean_height", s.mean_height},
             {"std_width", s.std_width},     {"std_height", s.std_height},
             {"count", s.count}};
  }
  doc["bbox_scale"] = std::move(scale);
  doc["long_tail"] =
      json{{"samples", stats.samples_long_tail}, {"organs", stats.organs_long_tail}};
  return doc;
}

std::string render_stats_tables(const DatasetStats& stats) {
  std::string out;
  out += "Samples per split\n";
  out += render_table(
      {{"Train", "Test", "Validation"},
       {std::to_string(stats.split_counts.at(Split::train)),
        std::to_string(stats.split_counts.at(Split::test)),
        std::to_string(stats.split_counts.at(Split::val))}});

  if (!stats.bbox_scale.empty()) {
    out += "\nBounding-box scale per organ\n";
    std::vector<std::vector<std::string>> rows = {
        {"Organ", "Average", "Standard Deviation"}};
    for (OrganClass organ : kOrganClasses) {
      auto it = stats.bbox_scale.find(organ);
      if (it == stats.bbox_scale.end()) continue;
      const BoxScaleStats& s = it->second;
      rows.push_back({std::string(display_name(organ)),
                      fmt0(s.mean_width) + "x" + fmt0(s.mean_height),
                      fmt0(s.std_width) + "x" + fmt0(s.std_height)});
    }
    out += render_table(rows);
  }

  out += "\nSamples per species\n";
  const ScalarStats& sps = stats.samples_per_species;
  out += render_table({{"Mean", "Standard Deviation", "Minimum", "Maximum"},
                       {fmt1(sps.mean), fmt1(sps.stddev), std::to_string(sps.min),
                        std::to_string(sps.max)}});

  out += "\nOrgans per species\n";
  std::vector<std::vector<std::string>> rows = {
      {"Organ", "Mean", "Standard Deviation", "Maximum"}};
  for (OrganClass organ : kOrganClasses) {
    auto it = stats.organs_per_species.find(organ);
    if (it == stats.organs_per_species.end()) continue;
    const ScalarStats& s = it->second;
    rows.push_back({std::string(display_name(organ)), fmt1(s.mean), fmt1(s.stddev),
                    std::to_string(s.max)});
  }
  out += render_table(rows);
  return out;
}

json ap_report_to_json(const ApReport& report) {
  json doc;
  doc["ap"] = report.ap;
  if (report.ap50) doc["ap50"] = *report.ap50;
  if (report.ap75) doc["ap75"] = *report.ap75;
  json per_organ;
  for (const auto& [organ, value] : report.per_organ_ap) {
    per_organ[std::string(to_string(organ))] = value;
  }
  doc["per_organ_ap"] = std::move(per_organ);
  doc["iou_thresholds"] = report.thresholds;
  json detail;
  for (const auto& [organ, values] : report.per_class_per_threshold) {
    detail[std::string(to_string(organ))] = values;
  }
  doc["per_organ_per_threshold"] = std::move(detail);
  json gt;
  for (const auto& [organ, count] : report.ground_truth_counts) {
    gt[std::string(to_string(organ))] = count;
  }
  doc["ground_truth_counts"] = std::move(gt);
  doc["detections_evaluated"] = report.detections_evaluated;
  return doc;
}

std::string render_ap_tables(const ApReport& report) {
  std::string out;
  out += "Organ detection average precision\n";
  out += render_table({{"AP", "AP50", "AP75"},
                       {fmt1(100.0 * report.ap),
                        report.ap50 ? fmt1(100.0 * *report.ap50) : "-",
                        report.ap75 ? fmt1(100.0 * *report.ap75) : "-"}});

  out += "\nAverage precision for each organ\n";
  std::vector<std::string> header, values;
  for (OrganClass organ : kOrganClasses) {
    auto it = report.per_organ_ap.find(organ);
    if (it == report.per_organ_ap.end()) continue;
    header.emplace_back(display_name(organ));
    values.push_back(fmt1(100.0 * it->second));
  }
  out += render_table({header, values});
  return out;
}

json organ_eval_to_json(const OrganClassifierEval& eval) {
  json organs;
  for (const auto& [organ, matrix] : eval.confusion) {
    json cells = json::array();
    for (const auto& [t, p, count] : matrix.nonzero_cells()) {
      cells.push_back(json::array({t, p, count}));
    }
    organs[std::string(to_string(organ))] =
        json{{"accuracy_percent", eval.accuracy_percent.at(organ)},
             {"rois", eval.roi_counts.at(organ)},
             {"num_classes", matrix.num_classes()},
             {"confusion", std::move(cells)}};
  }
  return json{{"organs", std::move(organs)}};
}

std::string render_organ_accuracy_table(const OrganClassifierEval& eval) {
  std::string out = "Organ-based classification accuracy\n";
  std::vector<std::string> header, values;
  for (OrganClass organ : kOrganClasses) {
    auto it = eval.accuracy_percent.find(organ);
    if (it == eval.accuracy_percent.end()) continue;
    header.emplace_back(display_name(organ));
    values.push_back(fmt2(it->second));
  }
  out += render_table({header, values});
  return out;
}

json accuracy_report_to_json(const AccuracyReport& report) {
  json rules;
  for (const auto& [rule, percent] : report.accuracy_percent) {
    rules[std::string(to_string(rule))] =
        json{{"accuracy_percent", percent}, {"correct", report.correct.at(rule)}};
  }
  json doc;
  doc["rules"] = std::move(rules);
  doc["evaluated"] = report.evaluated;
  doc["skipped"] = report.skipped;
  doc["fallback_images"] = report.fallback_images;
  if (report.baseline_accuracy_percent) {
    doc["baseline"] = json{{"accuracy_percent", *report.baseline_accuracy_percent},
                           {"correct", *report.baseline_correct}};
  }
  return doc;
}

std::string render_species_accuracy_table(const AccuracyReport& report) {
  std::string out = "Species identification accuracy\n";
  std::vector<std::string> header = {"Rule"};
  std::vector<std::string> values = {"Accuracy"};
  for (FusionRule rule : kFusionRules) {
    auto it = report.accuracy_percent.find(rule);
    if (it == report.accuracy_percent.end()) continue;
    std::string name(to_string(rule));
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    header.push_back(std::move(name));
    values.push_back(fmt2(it->second));
  }
  if (report.baseline_accuracy_percent) {
    header.emplace_back("Whole-image");
    values.push_back(fmt2(*report.baseline_accuracy_percent));
  }
  out += render_table({header, values});
  return out;
}

json fused_to_json(const std::vector<FusedPrediction>& fused) {
  json records = json::array();
  for (const auto& f : fused) {
    records.push_back(json{{"image_id", f.image_id},
                           {"rule", to_string(f.rule)},
                           {"predicted_species", f.predicted_species},
                           {"fused_probs", f.fused_distribution.probs},
                           {"roi_count", f.roi_count}});
  }
  return records;
}

json split_report_to_json(const std::map<std::string, Split>& assignments) {
  json map;
  size_t train = 0, val = 0, test = 0;
  for (const auto& [image_id, split] : assignments) {
    map[image_id] = to_string(split);
    switch (split) {
      case Split::train: ++train; break;
      case Split::val: ++val; break;
      case Split::test: ++test; break;
    }
  }
  json doc;
  doc["assignments"] = std::move(map);
  doc["counts"] = json{{"train", train}, {"val", val}, {"test", test}};
  return doc;
}

}  // namespace organfuse
