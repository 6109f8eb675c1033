#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "organfuse/class_eval.hpp"
#include "organfuse/dataset_tools.hpp"
#include "organfuse/detection_eval.hpp"
#include "organfuse/fusion.hpp"

namespace organfuse {

// Capitalized organ names used in text tables (Leaf, Flower, Fruit, Stem,
// HDL). JSON documents always use the lowercase-canonical names.
std::string_view display_name(OrganClass organ);

// Pads each column to its widest cell: "| a | bb |" rows.
std::string render_table(const std::vector<std::vector<std::string>>& rows);

// Structured documents. AP and accuracy values are fractions in [0, 1]
// except where a key says percent; the text tables render percentages.
nlohmann::json stats_to_json(const DatasetStats& stats);
nlohmann::json ap_report_to_json(const ApReport& report);
nlohmann::json organ_eval_to_json(const OrganClassifierEval& eval);
nlohmann::json accuracy_report_to_json(const AccuracyReport& report);
nlohmann::json fused_to_json(const std::vector<FusedPrediction>& fused);
nlohmann::json split_report_to_json(const std::map<std::string, Split>& assignments);

// Text tables: dataset statistics (sample counts per split, box scale per
// organ, samples per species, organs per species).
std::string render_stats_tables(const DatasetStats& stats);

// Overall AP / AP50 / AP75 plus the per-organ AP row, in percent with one
// decimal.
std::string render_ap_tables(const ApReport& report);

// Per-organ classification accuracy row, in percent with two decimals.
std::string render_organ_accuracy_table(const OrganClassifierEval& eval);

// Per-rule species-identification accuracy row (plus the whole-image
// baseline column when present), in percent with two decimals.
std::string render_species_accuracy_table(const AccuracyReport& report);

}  // namespace organfuse
