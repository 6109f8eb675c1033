#include <doctest.h>

#include "organfuse/report.hpp"

using namespace organfuse;

TEST_CASE("detection AP tables") {
  ApReport report;
  report.ap = 0.429;
  report.ap50 = 0.666;
  report.ap75 = 0.462;
  report.per_organ_ap = {{OrganClass::leaf, 0.409},
                         {OrganClass::flower, 0.360},
                         {OrganClass::fruit, 0.257},
                         {OrganClass::stem, 0.740},
                         {OrganClass::hdl, 0.376}};
  const std::string tables = render_ap_tables(report);
  CHECK(tables.find("| AP   | AP50 | AP75 |") != std::string::npos);
  CHECK(tables.find("| 42.9 | 66.6 | 46.2 |") != std::string::npos);
  CHECK(tables.find("| Leaf | Flower | Fruit | Stem | HDL  |") != std::string::npos);
  CHECK(tables.find("| 40.9 | 36.0   | 25.7  | 74.0 | 37.6 |") != std::string::npos);

  const auto doc = ap_report_to_json(report);
  CHECK(doc["ap"] == 0.429);
  CHECK(doc["per_organ_ap"]["stem"] == 0.740);
}

TEST_CASE("organ accuracy table") {
  OrganClassifierEval eval;
  const std::vector<std::pair<OrganClass, double>> rows = {
      {OrganClass::leaf, 68.24},
      {OrganClass::flower, 75.24},
      {OrganClass::fruit, 63.39},
      {OrganClass::stem, 58.24},
      {OrganClass::hdl, 34.21}};
  for (const auto& [organ, percent] : rows) {
    eval.accuracy_percent[organ] = percent;
  }
  const std::string table = render_organ_accuracy_table(eval);
  CHECK(table.find("| Leaf  | Flower | Fruit | Stem  | HDL   |") != std::string::npos);
  CHECK(table.find("| 68.24 | 75.24  | 63.39 | 58.24 | 34.21 |") != std::string::npos);
}

TEST_CASE("species accuracy table") {
  AccuracyReport report;
  report.accuracy_percent = {{FusionRule::sum, 79.36},
                             {FusionRule::product, 78.16},
                             {FusionRule::voting, 77.65}};
  report.correct = {{FusionRule::sum, 0}, {FusionRule::product, 0},
                    {FusionRule::voting, 0}};
  SUBCASE("without baseline") {
    const std::string table = render_species_accuracy_table(report);
    CHECK(table.find("| Rule     | Sum   | Product | Voting |") != std::string::npos);
    CHECK(table.find("| Accuracy | 79.36 | 78.16   | 77.65  |") != std::string::npos);
  }
  SUBCASE("with the whole-image baseline column") {
    report.baseline_accuracy_percent = 69.65;
    report.baseline_correct = 0;
    const std::string table = render_species_accuracy_table(report);
    CHECK(table.find("Whole-image") != std::string::npos);
    CHECK(table.find("69.65") != std::string::npos);
  }
}

TEST_CASE("stats tables") {
  DatasetStats stats;
  stats.split_counts = {{Split::train, 62959}, {Split::val, 9016}, {Split::test, 17995}};
  stats.samples_per_species = ScalarStats{90.0, 85.6, 6, 762};
  stats.organs_per_species[OrganClass::leaf] = ScalarStats{119.0, 219.7, 0, 3568};
  stats.organs_per_species[OrganClass::flower] = ScalarStats{82.7, 67.0, 0, 606};
  stats.bbox_scale[OrganClass::leaf] = BoxScaleStats{184.0, 199.0, 145.0, 172.0, 5};
  const std::string tables = render_stats_tables(stats);
  CHECK(tables.find("| Train | Test  | Validation |") != std::string::npos);
  CHECK(tables.find("| 62959 | 17995 | 9016       |") != std::string::npos);
  CHECK(tables.find("| 90.0 | 85.6") != std::string::npos);
  CHECK(tables.find("| 6 ") != std::string::npos);
  CHECK(tables.find("| 762") != std::string::npos);
  CHECK(tables.find("184x199") != std::string::npos);
  CHECK(tables.find("145x172") != std::string::npos);
  CHECK(tables.find("| 119.0 | 219.7") != std::string::npos);
  CHECK(tables.find("| 3568") != std::string::npos);
}

TEST_CASE("table cells are padded per column") {
  const std::string table = render_table({{"a", "bbbb"}, {"cc", "d"}});
  CHECK(table == "| a  | bbbb |\n| cc | d    |\n");
}
