#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "organfuse/class_eval.hpp"
#include "organfuse/dataset_tools.hpp"
#include "organfuse/detection_eval.hpp"
#include "organfuse/errors.hpp"
#include "organfuse/fusion.hpp"
#include "organfuse/io.hpp"
#include "organfuse/report.hpp"
#include "organfuse/simulator.hpp"
#include "organfuse/types.hpp"

namespace {

using nlohmann::json;
using namespace organfuse;

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 usage, 2 missing/unreadable file, 3 parse
// error, 4 validation error, 5 invalid or infeasible configuration,
// 6 unexpected internal error.
enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kIoError = 2,
  kParseError = 3,
  kValidationError = 4,
  kConfigError = 5,
  kInternalError = 6,
};

struct OutputOptions {
  std::string out_path;          // structured report file; stdout when empty
  std::string format = "doc";    // doc | table
};

// Output locations are checked before any computation runs.
void check_output_path(const std::string& path) {
  if (path.empty()) return;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw io_error("output directory '" + parent.string() + "' does not exist");
  }
}

void add_output_options(CLI::App* cmd, OutputOptions& out) {
  cmd->add_option("-o,--out", out.out_path,
                  "Write the structured JSON report to this file");
  cmd->add_option("--format", out.format, "Console output: doc or table")
      ->check(CLI::IsMember({"doc", "table"}))
      ->capture_default_str();
}

// The metadata block embedded in every report. Only semantically relevant
// configuration enters it; worker counts and output destinations cannot
// affect results and are excluded so reruns stay byte-identical.
json make_metadata(const std::string& command, json config,
                   const std::vector<std::pair<std::string, std::string>>& inputs) {
  json meta;
  meta["tool"] = "organfuse";
  meta["version"] = kVersion;
  meta["command"] = command;
  meta["config"] = std::move(config);
  json in = json::object();
  for (const auto& [name, path] : inputs) {
    in[name] = json{{"path", path}, {"digest", file_digest(path)}};
  }
  meta["inputs"] = std::move(in);
  return meta;
}

void emit_report(const json& doc, const OutputOptions& out,
                 const std::string& tables) {
  const std::string text = doc.dump(2) + "\n";
  if (!out.out_path.empty()) {
    write_text_file(out.out_path, text);
    if (out.format == "table") std::cout << tables;
  } else if (out.format == "table") {
    std::cout << tables;
  } else {
    std::cout << text;
  }
}

std::vector<double> parse_threshold_spec(const std::string& spec) {
  std::vector<double> values;
  const auto to_number = [&](const std::string& token) {
    try {
      size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return v;
    } catch (const std::exception&) {
      throw config_error("invalid IoU threshold '" + token + "' in '" + spec + "'");
    }
  };
  if (spec.find(':') != std::string::npos) {
    // start:step:stop, inclusive.
    std::vector<std::string> parts;
    size_t begin = 0;
    while (true) {
      const size_t colon = spec.find(':', begin);
      parts.push_back(spec.substr(begin, colon - begin));
      if (colon == std::string::npos) break;
      begin = colon + 1;
    }
    if (parts.size() != 3) {
      throw config_error("IoU threshold ranges use start:step:stop, got '" + spec + "'");
    }
    const double start = to_number(parts[0]);
    const double step = to_number(parts[1]);
    const double stop = to_number(parts[2]);
    if (step <= 0.0 || stop < start) {
      throw config_error("invalid IoU threshold range '" + spec + "'");
    }
    const int count = static_cast<int>(std::round((stop - start) / step)) + 1;
    for (int i = 0; i < count; ++i) values.push_back(start + i * step);
  } else {
    size_t begin = 0;
    while (begin <= spec.size()) {
      const size_t comma = spec.find(',', begin);
      const std::string token =
          spec.substr(begin, comma == std::string::npos ? comma : comma - begin);
      if (!token.empty()) values.push_back(to_number(token));
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
  }
  if (values.empty()) {
    throw config_error("no IoU thresholds in '" + spec + "'");
  }
  return values;
}

// "leaf=0.68,flower=0.75" entries merged over the given defaults.
std::map<OrganClass, double> parse_organ_values(const std::string& spec,
                                                std::map<OrganClass, double> defaults) {
  if (spec.empty()) return defaults;
  size_t begin = 0;
  while (begin <= spec.size()) {
    const size_t comma = spec.find(',', begin);
    const std::string token =
        spec.substr(begin, comma == std::string::npos ? comma : comma - begin);
    if (!token.empty()) {
      const size_t eq = token.find('=');
      if (eq == std::string::npos) {
        throw config_error("expected organ=value, got '" + token + "'");
      }
      const OrganClass organ = parse_organ(token.substr(0, eq));
      try {
        size_t used = 0;
        const std::string value = token.substr(eq + 1);
        defaults[organ] = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw config_error("invalid number in '" + token + "'");
      }
    }
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return defaults;
}

std::set<FusionRule> parse_rule_selection(const std::string& name) {
  if (name == "all") {
    return {FusionRule::sum, FusionRule::product, FusionRule::voting};
  }
  return {parse_fusion_rule(name)};
}

json organ_map_to_json(const std::map<OrganClass, double>& values) {
  json out;
  for (const auto& [organ, v] : values) out[std::string(to_string(organ))] = v;
  return out;
}

// --- subcommand runners -----------------------------------------------------

struct StatsArgs {
  std::string manifest_path;
  OutputOptions out;
};

void run_stats(const StatsArgs& args) {
  check_output_path(args.out.out_path);
  const DatasetManifest manifest = load_manifest(args.manifest_path);
  const DatasetStats stats = compute_stats(manifest);
  json doc = stats_to_json(stats);
  doc["metadata"] = make_metadata("stats", json::object(),
                                  {{"manifest", args.manifest_path}});
  emit_report(doc, args.out, render_stats_tables(stats));
}

struct SplitArgs {
  std::string manifest_path;
  std::string manifest_out;
  SplitSpec spec;
  OutputOptions out;
};

void run_split(const SplitArgs& args) {
  check_output_path(args.out.out_path);
  check_output_path(args.manifest_out);
  const DatasetManifest manifest = load_manifest(args.manifest_path);
  const auto assignments = split_dataset(manifest, args.spec);
  json config{{"seed", args.spec.seed},
              {"train_fraction", args.spec.train_fraction},
              {"val_fraction", args.spec.val_fraction},
              {"test_fraction", args.spec.test_fraction},
              {"min_one_rule_threshold", args.spec.min_one_rule_threshold},
              {"shuffle", "fy-mt19937_64-v1"}};
  const json metadata =
      make_metadata("split", config, {{"manifest", args.manifest_path}});
  json doc = split_report_to_json(assignments);
  doc["metadata"] = metadata;
  if (!args.manifest_out.empty()) {
    DatasetManifest updated = manifest;
    updated.split_assignments = assignments;
    save_manifest(args.manifest_out, updated, &metadata);
  }
  std::string tables = "Split assignment counts\n";
  tables += render_table({{"Train", "Test", "Validation"},
                          {doc["counts"]["train"].dump(),
                           doc["counts"]["test"].dump(),
                           doc["counts"]["val"].dump()}});
  emit_report(doc, args.out, tables);
}

struct DownSelectArgs {
  std::string manifest_path;
  std::string manifest_out;
  size_t min_leaf_rois = 130;
  bool require_all_organs = false;
  OutputOptions out;
};

void run_down_select(const DownSelectArgs& args) {
  check_output_path(args.out.out_path);
  check_output_path(args.manifest_out);
  const DatasetManifest manifest = load_manifest(args.manifest_path);
  const DatasetManifest reduced =
      down_select(manifest, args.min_leaf_rois, args.require_all_organs);
  json config{{"min_leaf_rois", args.min_leaf_rois},
              {"require_all_organs", args.require_all_organs}};
  const json metadata =
      make_metadata("down-select", config, {{"manifest", args.manifest_path}});
  if (!args.manifest_out.empty()) {
    save_manifest(args.manifest_out, reduced, &metadata);
  }
  json doc;
  doc["metadata"] = metadata;
  doc["species_before"] = manifest.species_vocabulary.size();
  doc["species_retained"] = reduced.species_vocabulary.size();
  doc["images_retained"] = reduced.images.size();
  doc["annotations_retained"] = reduced.annotations.size();
  doc["retained_species"] = reduced.species_vocabulary;
  std::string tables = "Down-selection\n";
  tables += render_table(
      {{"Species before", "Species retained", "Images retained"},
       {std::to_string(manifest.species_vocabulary.size()),
        std::to_string(reduced.species_vocabulary.size()),
        std::to_string(reduced.images.size())}});
  emit_report(doc, args.out, tables);
}

struct NmsArgs {
  std::string detections_path;
  std::string manifest_path;
  double threshold = 0.1;
  OutputOptions out;
};

void run_nms(const NmsArgs& args) {
  check_output_path(args.out.out_path);
  const std::vector<Detection> detections = load_detections(args.detections_path);
  if (!args.manifest_path.empty()) {
    validate_detections(load_manifest(args.manifest_path), detections);
  }

  // Group per image in first-appearance order; suppression is per image.
  std::vector<std::string> image_order;
  std::map<std::string, std::vector<Detection>> by_image;
  for (const auto& det : detections) {
    auto [it, inserted] = by_image.try_emplace(det.image_id);
    if (inserted) image_order.push_back(det.image_id);
    it->second.push_back(det);
  }
  std::vector<Detection> kept;
  for (const auto& image_id : image_order) {
    for (auto& det : nms(by_image[image_id], args.threshold)) {
      kept.push_back(std::move(det));
    }
  }

  std::vector<std::pair<std::string, std::string>> inputs = {
      {"detections", args.detections_path}};
  if (!args.manifest_path.empty()) inputs.push_back({"manifest", args.manifest_path});
  json doc;
  doc["metadata"] =
      make_metadata("nms", json{{"nms_threshold", args.threshold}}, inputs);
  doc["bbox_format"] = "xyxy";
  doc["detections"] = detections_to_json(kept);
  doc["counts"] = json{{"input", detections.size()}, {"kept", kept.size()}};
  std::string tables = "Non-maximum suppression\n";
  tables += render_table({{"Input", "Kept"},
                          {std::to_string(detections.size()),
                           std::to_string(kept.size())}});
  emit_report(doc, args.out, tables);
}

struct EvalDetArgs {
  std::string manifest_path;
  std::string detections_path;
  std::string thresholds = "0.50:0.05:0.95";
  std::optional<size_t> max_detections;
  OutputOptions out;
};

void run_eval_det(const EvalDetArgs& args) {
  check_output_path(args.out.out_path);
  const DatasetManifest manifest = load_manifest(args.manifest_path);
  const std::vector<Detection> detections = load_detections(args.detections_path);
  DetEvalConfig config;
  config.iou_thresholds = parse_threshold_spec(args.thresholds);
  config.max_detections_per_class = args.max_detections;
  const ApReport report = evaluate_detections(manifest, detections, config);
  json config_json{{"iou_thresholds", args.thresholds}};
  if (args.max_detections) config_json["max_detections_per_class"] = *args.max_detections;
  json doc = ap_report_to_json(report);
  doc["metadata"] = make_metadata("eval-det", config_json,
                                  {{"manifest", args.manifest_path},
                                   {"detections", args.detections_path}});
  emit_report(doc, args.out, render_ap_tables(report));
}

struct FuseArgs {
  std::string rois_path;
  std::string manifest_path;
  std::string rule = "all";
  std::string prior_path;
  size_t workers = 1;
  OutputOptions out;
};

void run_fuse(const FuseArgs& args) {
  check_output_path(args.out.out_path);
  const std::vector<RoiPrediction> rois = load_roi_predictions(args.rois_path);
  if (!args.manifest_path.empty()) {
    validate_roi_predictions(load_manifest(args.manifest_path), rois);
  }
  const OrganPrior prior =
      args.prior_path.empty() ? OrganPrior::uniform() : load_prior(args.prior_path);
  const std::set<FusionRule> selected = parse_rule_selection(args.rule);

  // Images keyed and emitted in sorted order so output is independent of
  // record order in the input file.
  std::map<std::string, std::vector<const RoiPrediction*>> by_image;
  for (const auto& roi : rois) by_image[roi.image_id].push_back(&roi);
  std::vector<const std::vector<const RoiPrediction*>*> groups;
  groups.reserve(by_image.size());
  for (const auto& [image_id, group] : by_image) {
    (void)image_id;
    groups.push_back(&group);
  }

  std::vector<std::vector<FusedPrediction>> slots(groups.size());
  const auto fuse_range = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const std::span<const RoiPrediction* const> group(*groups[i]);
      for (FusionRule rule : kFusionRules) {
        if (!selected.count(rule)) continue;
        slots[i].push_back(predict_species(group, rule, prior));
      }
    }
  };
  const size_t workers = std::max<size_t>(1, args.workers);
  if (workers == 1 || groups.size() < 2 * workers) {
    fuse_range(0, groups.size());
  } else {
    std::vector<std::thread> threads;
    const size_t chunk = (groups.size() + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
      const size_t begin = w * chunk;
      const size_t end = std::min(groups.size(), begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(fuse_range, begin, end);
    }
    for (auto& t : threads) t.join();
  }
  std::vector<FusedPrediction> fused;
  for (auto& slot : slots) {
    for (auto& f : slot) fused.push_back(std::move(f));
  }

  std::vector<std::pair<std::string, std::string>> inputs = {
      {"rois", args.rois_path}};
  if (!args.manifest_path.empty()) inputs.push_back({"manifest", args.manifest_path});
  if (!args.prior_path.empty()) inputs.push_back({"prior", args.prior_path});
  json doc;
  doc["metadata"] = make_metadata(
      "fuse",
      json{{"rule", args.rule},
           {"prior", args.prior_path.empty() ? "uniform" : args.prior_path}},
      inputs);
  doc["fused"] = fused_to_json(fused);
  std::string tables = "Fused predictions\n";
  tables += render_table({{"Images", "Records"},
                          {std::to_string(groups.size()),
                           std::to_string(fused.size())}});
  emit_report(doc, args.out, tables);
}

struct EvalClsArgs {
  std::string manifest_path;
  std::string rois_path;
  OutputOptions out;
};

void run_eval_cls(const EvalClsArgs& args) {
  check_output_path(args.out.out_path);
  const DatasetManifest manifest = load_manifest(args.manifest_path);
  const std::vector<RoiPrediction> rois = load_roi_predictions(args.rois_path);
  const OrganClassifierEval eval = evaluate_organ_classifiers(manifest, rois);
  json doc = organ_eval_to_json(eval);
  doc["metadata"] = make_metadata("eval-cls", json::object(),
                                  {{"manifest", args.manifest_path},
                                   {"rois", args.rois_path}});
  emit_report(doc, args.out, render_organ_accuracy_table(eval));
}

struct EvalSpeciesArgs {
  std::string manifest_path;
  std::string rois_path;
  std::string splits_path;
  std::string baseline_path;
  std::string rule = "all";
  std::string prior_path;
  std::string fallback = "skip";
  size_t workers = 1;
  OutputOptions out;
};

void run_eval_species(const EvalSpeciesArgs& args) {
  check_output_path(args.out.out_path);
  DatasetManifest manifest = load_manifest(args.manifest_path);
  if (!args.splits_path.empty()) {
    manifest.split_assignments = load_split_assignments(args.splits_path);
    validate_manifest(manifest);
  }
  const std::vector<RoiPrediction> rois = load_roi_predictions(args.rois_path);

  SpeciesEvalConfig config;
  config.rules = parse_rule_selection(args.rule);
  config.prior =
      args.prior_path.empty() ? OrganPrior::uniform() : load_prior(args.prior_path);
  config.fallback = parse_fallback_policy(args.fallback);
  config.workers = std::max<size_t>(1, args.workers);

  std::optional<std::map<std::string, SpeciesDistribution>> baseline;
  if (!args.baseline_path.empty()) {
    baseline = load_whole_image_predictions(args.baseline_path);
  }

  const AccuracyReport report = evaluate_species_id(
      manifest, rois, config, baseline ? &*baseline : nullptr);

  std::vector<std::pair<std::string, std::string>> inputs = {
      {"manifest", args.manifest_path}, {"rois", args.rois_path}};
  if (!args.splits_path.empty()) inputs.push_back({"splits", args.splits_path});
  if (!args.baseline_path.empty()) inputs.push_back({"baseline", args.baseline_path});
  if (!args.prior_path.empty()) inputs.push_back({"prior", args.prior_path});
  json doc = accuracy_report_to_json(report);
  doc["metadata"] = make_metadata(
      "eval-species",
      json{{"rule", args.rule},
           {"fallback", args.fallback},
           {"prior", args.prior_path.empty() ? "uniform" : args.prior_path}},
      inputs);
  emit_report(doc, args.out, render_species_accuracy_table(report));
}

struct SimulateArgs {
  SimulatorConfig config;
  std::string profile;      // "mean,std,min,max"
  std::string organ_acc;    // "leaf=0.68,..."
  std::string organ_mean;   // "leaf=1.5,..."
  std::string manifest_out;
  std::string rois_out;
  size_t workers = 1;
  OutputOptions out;
};

void run_simulate(SimulateArgs args) {
  check_output_path(args.out.out_path);
  check_output_path(args.manifest_out);
  check_output_path(args.rois_out);
  if (!args.profile.empty()) {
    std::vector<double> parts;
    size_t begin = 0;
    while (begin <= args.profile.size()) {
      const size_t comma = args.profile.find(',', begin);
      const std::string token = args.profile.substr(
          begin, comma == std::string::npos ? comma : comma - begin);
      if (!token.empty()) {
        try {
          parts.push_back(std::stod(token));
        } catch (const std::exception&) {
          throw config_error("invalid long-tail profile '" + args.profile + "'");
        }
      }
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
    if (parts.size() != 4) {
      throw config_error("long-tail profile needs mean,std,min,max");
    }
    args.config.long_tail =
        LongTailProfile{parts[0], parts[1], static_cast<int64_t>(parts[2]),
                        static_cast<int64_t>(parts[3])};
  }
  args.config.organ_accuracy =
      parse_organ_values(args.organ_acc, args.config.organ_accuracy);
  args.config.organ_mean_rois =
      parse_organ_values(args.organ_mean, args.config.organ_mean_rois);

  const ScenarioCorpus corpus = generate(args.config, args.workers);

  json config_json{{"species", args.config.species_count},
                   {"seed", args.config.seed},
                   {"confusion_spread", args.config.confusion_spread},
                   {"max_rois_per_organ", args.config.max_rois_per_organ},
                   {"organ_accuracy", organ_map_to_json(args.config.organ_accuracy)},
                   {"organ_mean_rois", organ_map_to_json(args.config.organ_mean_rois)}};
  if (args.config.long_tail) {
    config_json["long_tail"] = json{{"mean", args.config.long_tail->mean},
                                    {"stddev", args.config.long_tail->stddev},
                                    {"min", args.config.long_tail->min_count},
                                    {"max", args.config.long_tail->max_count}};
  } else {
    config_json["images_per_species"] = args.config.images_per_species;
  }
  const json metadata = make_metadata("simulate", config_json, {});

  if (!args.manifest_out.empty()) {
    save_manifest(args.manifest_out, corpus.manifest, &metadata);
  }
  if (!args.rois_out.empty()) {
    save_roi_predictions(args.rois_out, corpus.rois);
  }

  json doc;
  doc["metadata"] = metadata;
  doc["images"] = corpus.manifest.images.size();
  doc["annotations"] = corpus.manifest.annotations.size();
  json realized, counts;
  for (const auto& [organ, acc] : corpus.realized_accuracy) {
    realized[std::string(to_string(organ))] = acc;
  }
  for (const auto& [organ, count] : corpus.roi_counts) {
    counts[std::string(to_string(organ))] = count;
  }
  doc["realized_accuracy"] = std::move(realized);
  doc["roi_counts"] = std::move(counts);

  std::vector<std::string> header, values;
  for (OrganClass organ : kOrganClasses) {
    auto it = corpus.realized_accuracy.find(organ);
    if (it == corpus.realized_accuracy.end()) continue;
    header.emplace_back(display_name(organ));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * it->second);
    values.emplace_back(buf);
  }
  std::string tables = "Realized per-organ accuracy\n";
  tables += render_table({header, values});
  emit_report(doc, args.out, tables);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Organ-detection evaluation, probability fusion, and long-tail "
               "dataset tooling for species identification pipelines"};
  app.set_version_flag("--version", std::string("organfuse ") + kVersion);
  app.require_subcommand(1);

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics report");
  stats_cmd->add_option("--manifest", stats_args.manifest_path, "Manifest file")
      ->required();
  add_output_options(stats_cmd, stats_args.out);
  stats_cmd->callback([&] { run_stats(stats_args); });

  SplitArgs split_args;
  auto* split_cmd =
      app.add_subcommand("split", "Per-species train/val/test split");
  split_cmd->add_option("--manifest", split_args.manifest_path, "Manifest file")
      ->required();
  split_cmd->add_option("--seed", split_args.spec.seed, "Shuffle seed")
      ->capture_default_str();
  split_cmd->add_option("--train-fraction", split_args.spec.train_fraction, "")
      ->capture_default_str();
  split_cmd->add_option("--val-fraction", split_args.spec.val_fraction, "")
      ->capture_default_str();
  split_cmd->add_option("--test-fraction", split_args.spec.test_fraction, "")
      ->capture_default_str();
  split_cmd
      ->add_option("--min-one-threshold", split_args.spec.min_one_rule_threshold,
                   "Species below this image count still get one val and one "
                   "test sample")
      ->capture_default_str();
  split_cmd->add_option("--manifest-out", split_args.manifest_out,
                        "Write a copy of the manifest with the split filled in");
  add_output_options(split_cmd, split_args.out);
  split_cmd->callback([&] { run_split(split_args); });

  DownSelectArgs ds_args;
  auto* ds_cmd = app.add_subcommand(
      "down-select", "Restrict the vocabulary to data-sufficient species");
  ds_cmd->add_option("--manifest", ds_args.manifest_path, "Manifest file")
      ->required();
  ds_cmd->add_option("--min-leaf-rois", ds_args.min_leaf_rois,
                     "Minimum leaf annotations per retained species")
      ->capture_default_str();
  ds_cmd->add_flag("--require-all-organs", ds_args.require_all_organs,
                   "Also require at least one annotation of every organ");
  ds_cmd->add_option("--manifest-out", ds_args.manifest_out,
                     "Write the reduced manifest here");
  add_output_options(ds_cmd, ds_args.out);
  ds_cmd->callback([&] { run_down_select(ds_args); });

  NmsArgs nms_args;
  auto* nms_cmd =
      app.add_subcommand("nms", "Class-aware non-maximum suppression");
  nms_cmd->add_option("--detections", nms_args.detections_path, "Detections file")
      ->required();
  nms_cmd->add_option("--manifest", nms_args.manifest_path,
                      "Validate detections against this manifest");
  nms_cmd->add_option("--nms-threshold", nms_args.threshold,
                      "Suppress same-class overlaps above this IoU")
      ->capture_default_str();
  add_output_options(nms_cmd, nms_args.out);
  nms_cmd->callback([&] { run_nms(nms_args); });

  EvalDetArgs ed_args;
  auto* ed_cmd = app.add_subcommand("eval-det", "Detection average precision");
  ed_cmd->add_option("--manifest", ed_args.manifest_path, "Manifest file")
      ->required();
  ed_cmd->add_option("--detections", ed_args.detections_path, "Detections file")
      ->required();
  ed_cmd->add_option("--iou-thresholds", ed_args.thresholds,
                     "start:step:stop range or comma list")
      ->capture_default_str();
  size_t max_dets = 0;
  auto* max_opt = ed_cmd->add_option("--max-dets", max_dets,
                                     "Top-k detections per image and class");
  add_output_options(ed_cmd, ed_args.out);
  ed_cmd->callback([&] {
    if (max_opt->count() > 0) ed_args.max_detections = max_dets;
    run_eval_det(ed_args);
  });

  FuseArgs fuse_args;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse per-ROI species predictions");
  fuse_cmd->add_option("--rois", fuse_args.rois_path, "ROI predictions file")
      ->required();
  fuse_cmd->add_option("--manifest", fuse_args.manifest_path,
                       "Validate ROI predictions against this manifest");
  fuse_cmd->add_option("--rule", fuse_args.rule, "sum, product, voting, or all")
      ->check(CLI::IsMember({"sum", "product", "voting", "all"}))
      ->capture_default_str();
  fuse_cmd->add_option("--prior", fuse_args.prior_path, "Organ prior weights file");
  fuse_cmd->add_option("--workers", fuse_args.workers, "Worker thread bound")
      ->capture_default_str();
  add_output_options(fuse_cmd, fuse_args.out);
  fuse_cmd->callback([&] { run_fuse(fuse_args); });

  EvalClsArgs ec_args;
  auto* ec_cmd = app.add_subcommand(
      "eval-cls", "Per-organ classification accuracy and confusion matrices");
  ec_cmd->add_option("--manifest", ec_args.manifest_path, "Manifest file")
      ->required();
  ec_cmd->add_option("--rois", ec_args.rois_path, "ROI predictions file")
      ->required();
  add_output_options(ec_cmd, ec_args.out);
  ec_cmd->callback([&] { run_eval_cls(ec_args); });

  EvalSpeciesArgs es_args;
  auto* es_cmd = app.add_subcommand(
      "eval-species", "Per-image fused species identification accuracy");
  es_cmd->add_option("--manifest", es_args.manifest_path, "Manifest file")
      ->required();
  es_cmd->add_option("--rois", es_args.rois_path, "ROI predictions file")
      ->required();
  es_cmd->add_option("--splits", es_args.splits_path,
                     "Split assignments overriding the manifest");
  es_cmd->add_option("--baseline", es_args.baseline_path,
                     "Whole-image predictions (fallback and baseline row)");
  es_cmd->add_option("--rule", es_args.rule, "sum, product, voting, or all")
      ->check(CLI::IsMember({"sum", "product", "voting", "all"}))
      ->capture_default_str();
  es_cmd->add_option("--prior", es_args.prior_path, "Organ prior weights file");
  es_cmd->add_option("--fallback", es_args.fallback,
                     "Policy for images without ROIs: skip or whole-image")
      ->check(CLI::IsMember({"skip", "whole-image"}))
      ->capture_default_str();
  es_cmd->add_option("--workers", es_args.workers, "Worker thread bound")
      ->capture_default_str();
  add_output_options(es_cmd, es_args.out);
  es_cmd->callback([&] { run_eval_species(es_args); });

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Generate a synthetic manifest and ROI predictions");
  sim_cmd->add_option("--species", sim_args.config.species_count, "Species count")
      ->capture_default_str();
  sim_cmd->add_option("--images-per-species", sim_args.config.images_per_species,
                      "Flat image count per species")
      ->capture_default_str();
  sim_cmd->add_option("--profile", sim_args.profile,
                      "Long-tail profile mean,std,min,max (overrides "
                      "--images-per-species)");
  sim_cmd->add_option("--organ-acc", sim_args.organ_acc,
                      "Per-organ accuracy targets, e.g. leaf=0.68,stem=0.58");
  sim_cmd->add_option("--organ-mean", sim_args.organ_mean,
                      "Per-organ mean ROI counts per image, e.g. leaf=1.5");
  sim_cmd->add_option("--max-rois", sim_args.config.max_rois_per_organ,
                      "Truncation of the per-organ Poisson ROI count")
      ->capture_default_str();
  sim_cmd->add_option("--spread", sim_args.config.confusion_spread,
                      "Probability mass spread over non-argmax species")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.config.seed, "Generator seed")
      ->capture_default_str();
  sim_cmd->add_option("--manifest-out", sim_args.manifest_out,
                      "Write the generated manifest here");
  sim_cmd->add_option("--rois-out", sim_args.rois_out,
                      "Write the generated ROI predictions here");
  sim_cmd->add_option("--workers", sim_args.workers, "Worker thread bound")
      ->capture_default_str();
  add_output_options(sim_cmd, sim_args.out);
  sim_cmd->callback([&] { run_simulate(sim_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help / --version
    }
    std::cerr << e.what() << "\n"
              << "Run '" << argv[0] << " --help' for usage.\n";
    return kUsage;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kOk;
}
