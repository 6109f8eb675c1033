// Acceptance suite: one pass/fail line per criterion, exit code equal to
// the number of failures. Run from ctest or directly.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "instance_gen.hpp"
#include "oracle.hpp"
#include "organfuse/class_eval.hpp"
#include "organfuse/dataset_tools.hpp"
#include "organfuse/detection_eval.hpp"
#include "organfuse/fusion.hpp"
#include "organfuse/io.hpp"
#include "organfuse/report.hpp"
#include "organfuse/simulator.hpp"
#include "test_util.hpp"

using namespace organfuse;
using nlohmann::json;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

template <typename T>
std::string str(const T& value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

// --- criterion 1: oracle equivalence ---------------------------------------

void criterion_oracle_equivalence() {
  std::mt19937_64 rng(424242);
  const auto thresholds = default_iou_thresholds();
  for (int trial = 0; trial < 500; ++trial) {
    const auto instance = instance_gen::random_instance(rng);
    const ApReport report =
        evaluate_detections(instance.manifest, instance.detections);
    const oracle::BruteReport brute =
        oracle::evaluate(instance.manifest, instance.detections, thresholds);
    expect(std::abs(report.ap - brute.ap) <= 1e-9,
           "trial " + str(trial) + ": ap " + str(report.ap) + " vs oracle " +
               str(brute.ap));
    expect(report.ap50 && brute.ap50 && std::abs(*report.ap50 - *brute.ap50) <= 1e-9,
           "trial " + str(trial) + ": ap50 mismatch");
    expect(report.ap75 && brute.ap75 && std::abs(*report.ap75 - *brute.ap75) <= 1e-9,
           "trial " + str(trial) + ": ap75 mismatch");
    expect(report.per_organ_ap.size() == brute.per_organ_ap.size(),
           "trial " + str(trial) + ": per-organ class sets differ");
    for (const auto& [organ, value] : report.per_organ_ap) {
      expect(std::abs(value - brute.per_organ_ap.at(organ)) <= 1e-9,
             "trial " + str(trial) + ": per-organ ap mismatch");
    }
  }
}

// --- criterion 2: hand-derived AP fixtures ----------------------------------

DatasetManifest single_leaf_manifest() {
  DatasetManifest m;
  m.species_vocabulary = {"sp0"};
  m.images.push_back({"img0", 64, 64, 0, std::nullopt});
  m.annotations.push_back({"img0", OrganClass::leaf, BoundingBox{0, 0, 10, 10}});
  return m;
}

void criterion_ap_fixtures() {
  {
    const auto m = single_leaf_manifest();
    const ApReport r = evaluate_detections(
        m, {{"img0", OrganClass::leaf, BoundingBox{0, 0, 10, 10}, 1.0}});
    expect(r.ap == 1.0 && *r.ap50 == 1.0 && *r.ap75 == 1.0,
           "single TP should give AP exactly 1.0, got " + str(r.ap));
  }
  {
    const auto m = single_leaf_manifest();
    const ApReport r = evaluate_detections(
        m, {{"img0", OrganClass::leaf, BoundingBox{40, 40, 50, 50}, 0.9},
            {"img0", OrganClass::leaf, BoundingBox{0, 0, 10, 10}, 0.8}});
    expect(r.ap == 0.5, "FP-then-TP should give AP exactly 0.5, got " + str(r.ap));
  }
  {
    const auto m = single_leaf_manifest();
    const ApReport r = evaluate_detections(
        m, {{"img0", OrganClass::leaf, BoundingBox{0, 0, 10, 6}, 1.0}});
    expect(r.ap == 0.3,
           "IoU-0.6 sweep should give COCO AP exactly 0.3, got " + str(r.ap));
  }
}

// --- criterion 3: NMS property suite ----------------------------------------

void criterion_nms_properties() {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto input = instance_gen::random_nms_input(rng);
    for (double threshold : {0.1, 0.5}) {
      const auto kept = nms(input, threshold);
      for (const auto& k : kept) {
        expect(std::count(input.begin(), input.end(), k) >= 1,
               "kept detection not in the input");
      }
      for (OrganClass organ : kOrganClasses) {
        const Detection* best = nullptr;
        for (const auto& d : input) {
          if (d.organ == organ &&
              (best == nullptr || d.confidence > best->confidence)) {
            best = &d;
          }
        }
        if (best != nullptr) {
          expect(std::count(kept.begin(), kept.end(), *best) >= 1,
                 "max-confidence detection was suppressed");
        }
      }
      for (size_t i = 0; i < kept.size(); ++i) {
        for (size_t j = i + 1; j < kept.size(); ++j) {
          if (kept[i].organ == kept[j].organ) {
            expect(iou(kept[i].box, kept[j].box) <= threshold,
                   "kept same-class pair exceeds the IoU bound");
          }
        }
      }
      expect(nms(kept, threshold) == kept, "NMS is not idempotent");
      std::vector<Detection> per_class_union;
      for (OrganClass organ : kOrganClasses) {
        std::vector<Detection> of_class;
        for (const auto& d : input) {
          if (d.organ == organ) of_class.push_back(d);
        }
        if (of_class.empty()) continue;
        for (auto& k : nms(of_class, threshold)) per_class_union.push_back(k);
      }
      expect(per_class_union.size() == kept.size(),
             "per-class suppression disagrees with the class-aware result");
      for (const auto& k : kept) {
        expect(std::count(per_class_union.begin(), per_class_union.end(), k) == 1,
               "class-awareness violated");
      }
    }
  }
}

// --- criterion 4: fusion property suite --------------------------------------

RoiPrediction quick_roi(int index, OrganClass organ, std::vector<double> probs) {
  RoiPrediction roi;
  roi.image_id = "img0";
  roi.roi_index = index;
  roi.organ = organ;
  roi.box = BoundingBox{0, 0, 10, 10};
  roi.distribution = make_distribution(std::move(probs));
  return roi;
}

std::vector<double> random_simplex(std::mt19937_64& rng, size_t dim) {
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  std::vector<double> probs(dim);
  double sum = 0.0;
  for (auto& p : probs) {
    p = unit(rng);
    sum += p;
  }
  for (auto& p : probs) p /= sum;
  return probs;
}

std::vector<double> random_dyadic(std::mt19937_64& rng, size_t dim) {
  std::vector<double> probs(dim);
  int assigned = 0;
  for (size_t i = 1; i < dim; ++i) {
    const int ticks = static_cast<int>(rng() % (512 / dim));
    probs[i] = ticks / 1024.0;
    assigned += ticks;
  }
  probs[0] = (1024 - assigned) / 1024.0;
  return probs;
}

void criterion_fusion_properties() {
  std::mt19937_64 rng(112233);
  const OrganPrior prior = OrganPrior::uniform();
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t dim = 2 + rng() % 7;
    const size_t count = 1 + rng() % 5;
    std::vector<RoiPrediction> rois;
    for (size_t i = 0; i < count; ++i) {
      rois.push_back(quick_roi(static_cast<int>(i),
                               kOrganClasses[rng() % kOrganCount],
                               random_simplex(rng, dim)));
    }

    for (FusionRule rule : kFusionRules) {
      const auto fused = predict_species(rois, rule, prior).fused_distribution;
      double sum = 0.0;
      for (double p : fused.probs) {
        expect(p >= 0.0, "negative fused probability");
        sum += p;
      }
      expect(std::abs(sum - 1.0) <= 1e-9, "fused distribution does not sum to 1");
    }

    auto shuffled = rois;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (FusionRule rule : kFusionRules) {
      expect(predict_species(shuffled, rule, prior).fused_distribution ==
                 predict_species(rois, rule, prior).fused_distribution,
             "permutation changed a fused distribution");
    }

    const std::vector<RoiPrediction> single = {rois.front()};
    const size_t sum_pick =
        predict_species(single, FusionRule::sum, prior).predicted_species;
    expect(predict_species(single, FusionRule::product, prior).predicted_species ==
                   sum_pick &&
               predict_species(single, FusionRule::voting, prior).predicted_species ==
                   sum_pick &&
               sum_pick == single.front().distribution.argmax(),
           "n=1 collapse disagreement");
  }

  // Product-rule argmax invariance under positive per-ROI scaling.
  std::uniform_real_distribution<double> scale_draw(1e-3, 1e3);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t dim = 2 + rng() % 7;
    const size_t count = 2 + rng() % 4;
    std::vector<std::vector<double>> vectors;
    for (size_t i = 0; i < count; ++i) vectors.push_back(random_simplex(rng, dim));
    const auto base = log_domain_product(vectors);
    const size_t base_argmax = static_cast<size_t>(
        std::max_element(base.begin(), base.end()) - base.begin());
    auto scaled = vectors;
    const double c = scale_draw(rng);
    for (double& p : scaled[rng() % count]) p *= c;
    const auto changed = log_domain_product(scaled);
    expect(static_cast<size_t>(std::max_element(changed.begin(), changed.end()) -
                               changed.begin()) == base_argmax,
           "per-ROI scaling moved the product-rule argmax");
  }

  // Sum rule equals the unweighted mean exactly (dyadic inputs).
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t dim = 2 + rng() % 6;
    const size_t count = 1 + rng() % 6;
    std::vector<RoiPrediction> rois;
    for (size_t i = 0; i < count; ++i) {
      rois.push_back(quick_roi(static_cast<int>(i),
                               kOrganClasses[rng() % kOrganCount],
                               random_dyadic(rng, dim)));
    }
    const auto fused = fuse_sum(rois, prior);
    for (size_t s = 0; s < dim; ++s) {
      double mean = 0.0;
      for (const auto& roi : rois) mean += roi.distribution[s];
      mean /= static_cast<double>(count);
      expect(fused[s] == mean, "uniform-prior sum rule is not the exact mean");
    }
  }
}

// --- criterion 5: fusion hand fixtures ---------------------------------------

void criterion_fusion_fixtures() {
  const OrganPrior prior = OrganPrior::uniform();
  const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  {
    const auto fused = fuse_sum({quick_roi(0, OrganClass::leaf, {0.6, 0.4}),
                                 quick_roi(1, OrganClass::flower, {0.2, 0.8})},
                                prior);
    expect(near(fused[0], 0.4) && near(fused[1], 0.6),
           "sum fixture: expected [0.4, 0.6], got [" + str(fused[0]) + ", " +
               str(fused[1]) + "]");
  }
  {
    const auto fused = fuse_product({quick_roi(0, OrganClass::leaf, {0.6, 0.4}),
                                     quick_roi(1, OrganClass::flower, {0.2, 0.8})},
                                    prior);
    expect(near(fused[0], 3.0 / 11.0) && near(fused[1], 8.0 / 11.0),
           "product fixture: expected [3/11, 8/11], got [" + str(fused[0]) + ", " +
               str(fused[1]) + "]");
  }
  {
    const auto fused = fuse_vote({quick_roi(0, OrganClass::leaf, {0.6, 0.4}),
                                  quick_roi(1, OrganClass::flower, {0.2, 0.8}),
                                  quick_roi(2, OrganClass::fruit, {0.1, 0.9})},
                                 prior);
    expect(near(fused[0], 1.0 / 3.0) && near(fused[1], 2.0 / 3.0),
           "voting fixture: expected [1/3, 2/3], got [" + str(fused[0]) + ", " +
               str(fused[1]) + "]");
  }
}

// --- criterion 6: split protocol ----------------------------------------------

DatasetManifest long_tail_manifest_161() {
  DatasetManifest m;
  for (int s = 0; s < 161; ++s) {
    m.species_vocabulary.push_back("species_" + std::to_string(s));
    const double t = static_cast<double>(160 - s) / 160.0;
    const int count = 6 + static_cast<int>(std::llround(756.0 * t * t * t));
    for (int k = 0; k < count; ++k) {
      ImageRecord img;
      img.image_id = "img_" + std::to_string(s) + "_" + std::to_string(k);
      img.width = 500;
      img.height = 500;
      img.species_label = s;
      m.images.push_back(std::move(img));
    }
  }
  return m;
}

void criterion_split_protocol() {
  const DatasetManifest m = long_tail_manifest_161();
  {
    // Count range sanity: spans 6 to 762.
    std::map<int, int> counts;
    for (const auto& img : m.images) ++counts[img.species_label];
    expect(counts.at(0) == 762 && counts.at(160) == 6,
           "fixture does not span 6..762");
  }
  SplitSpec spec;
  spec.seed = 1234;
  const auto assignments = split_dataset(m, spec);
  expect(assignments.size() == m.images.size(),
         "assignment does not cover every image exactly once");

  std::map<int, std::map<Split, int>> per_species;
  for (const auto& img : m.images) {
    ++per_species[img.species_label][assignments.at(img.image_id)];
  }
  for (const auto& [species, counts] : per_species) {
    const int n = counts.count(Split::train) ? counts.at(Split::train) : 0;
    const int v = counts.count(Split::val) ? counts.at(Split::val) : 0;
    const int t = counts.count(Split::test) ? counts.at(Split::test) : 0;
    expect(v >= 1, "species " + str(species) + " has no validation image");
    expect(t >= 1, "species " + str(species) + " has no test image");
    const int total = n + v + t;
    if (total >= 10) {
      const double fraction = static_cast<double>(n) / total;
      expect(std::abs(fraction - 0.7) <= 2.0 / total + 1e-12,
             "species " + str(species) + " train fraction " + str(fraction) +
                 " out of bounds for n=" + str(total));
    }
  }

  const auto rerun = split_dataset(m, spec);
  expect(split_report_to_json(rerun).dump() == split_report_to_json(assignments).dump(),
         "repeated runs with one seed are not byte-identical");
}

// --- criterion 7: down-selection fixture ---------------------------------------

void criterion_down_selection() {
  DatasetManifest m;
  std::vector<std::string> expected;
  for (int s = 0; s < 300; ++s) {
    m.species_vocabulary.push_back("species_" + std::to_string(s));
    ImageRecord img;
    img.image_id = "img_" + std::to_string(s);
    img.width = 2000;
    img.height = 2000;
    img.species_label = s;
    m.images.push_back(std::move(img));

    const std::string id = "img_" + std::to_string(s);
    const auto add = [&](OrganClass organ, int count) {
      for (int i = 0; i < count; ++i) {
        const double x = static_cast<double>((i * 13) % 1900);
        m.annotations.push_back({id, organ, BoundingBox{x, 0, x + 10, 10}});
      }
    };
    if (s < 161) {
      // Qualifies: at least 130 leaf annotations plus every organ.
      expected.push_back(m.species_vocabulary.back());
      add(OrganClass::leaf, 130 + (s % 5));
      add(OrganClass::flower, 1);
      add(OrganClass::fruit, 1);
      add(OrganClass::stem, 1);
      add(OrganClass::hdl, 1);
    } else if (s % 2 == 0) {
      // One leaf short of the threshold.
      add(OrganClass::leaf, 129);
      add(OrganClass::flower, 1);
      add(OrganClass::fruit, 1);
      add(OrganClass::stem, 1);
      add(OrganClass::hdl, 1);
    } else {
      // Plenty of leaves but an organ class missing.
      add(OrganClass::leaf, 200);
      add(OrganClass::flower, 1);
      add(OrganClass::fruit, 1);
      add(OrganClass::stem, 1);
    }
  }
  const DatasetManifest reduced = down_select(m, 130, true);
  expect(reduced.species_vocabulary == expected,
         "retained species differ from the 161 constructed qualifiers (got " +
             str(reduced.species_vocabulary.size()) + ")");
}

// --- criterion 8: Monte-Carlo fusion claim --------------------------------------

void criterion_monte_carlo_fusion() {
  SimulatorConfig config;
  config.species_count = 161;
  config.images_per_species = 63;  // 10143 images
  config.organ_accuracy = {{OrganClass::leaf, 0.6824},
                           {OrganClass::flower, 0.7524},
                           {OrganClass::fruit, 0.6339},
                           {OrganClass::stem, 0.5824},
                           {OrganClass::hdl, 0.3421}};
  config.organ_mean_rois = {{OrganClass::leaf, 119.0},
                            {OrganClass::flower, 82.7},
                            {OrganClass::fruit, 30.7},
                            {OrganClass::stem, 4.4},
                            {OrganClass::hdl, 5.2}};
  config.max_rois_per_organ = 4;
  config.confusion_spread = 0.5;
  config.seed = 20250809;
  const ScenarioCorpus corpus = generate(config, 2);
  expect(corpus.manifest.images.size() >= 10000, "corpus below 10k images");

  double best_organ_accuracy = 0.0;
  size_t best_organ_rois = 0;
  for (const auto& [organ, accuracy] : corpus.realized_accuracy) {
    expect(corpus.roi_counts.at(organ) >= 1000, "organ with fewer than 1000 ROIs");
    if (accuracy > best_organ_accuracy) {
      best_organ_accuracy = accuracy;
      best_organ_rois = corpus.roi_counts.at(organ);
    }
  }

  SpeciesEvalConfig eval_config;
  eval_config.rules = {FusionRule::sum};
  eval_config.workers = 2;
  const AccuracyReport report =
      evaluate_species_id(corpus.manifest, corpus.rois, eval_config);
  const double fused = report.accuracy_percent.at(FusionRule::sum) / 100.0;
  const double n_images = static_cast<double>(report.evaluated);
  const double se_fused = std::sqrt(fused * (1.0 - fused) / n_images);
  const double se_organ = std::sqrt(best_organ_accuracy * (1.0 - best_organ_accuracy) /
                                    static_cast<double>(best_organ_rois));
  const double margin = 3.0 * std::sqrt(se_fused * se_fused + se_organ * se_organ);
  expect(fused > best_organ_accuracy + margin,
         "fused sum-rule accuracy " + str(fused) + " does not exceed best organ " +
             str(best_organ_accuracy) + " by more than " + str(margin));
}

// --- criterion 9: stats fixtures --------------------------------------------------

void criterion_stats_fixtures() {
  {
    DatasetManifest m;
    m.species_vocabulary = {"sp0"};
    size_t next = 0;
    const auto add_split = [&](Split split, int count) {
      for (int i = 0; i < count; ++i) {
        ImageRecord img;
        img.image_id = "img" + std::to_string(next++);
        img.width = 10;
        img.height = 10;
        img.species_label = 0;
        m.split_assignments[img.image_id] = split;
        m.images.push_back(std::move(img));
      }
    };
    add_split(Split::train, 62959);
    add_split(Split::test, 17995);
    add_split(Split::val, 9016);
    const DatasetStats stats = compute_stats(m);
    expect(stats.split_counts.at(Split::train) == 62959 &&
               stats.split_counts.at(Split::test) == 17995 &&
               stats.split_counts.at(Split::val) == 9016,
           "split counts do not reproduce the fixture");
    const std::string tables = render_stats_tables(stats);
    expect(tables.find("| 62959 | 17995 | 9016       |") != std::string::npos,
           "rendered split row differs");
    const json doc = stats_to_json(stats);
    expect(doc["splits"]["train"] == 62959 && doc["splits"]["test"] == 17995 &&
               doc["splits"]["val"] == 9016,
           "structured split counts differ");
  }
  {
    DatasetManifest m;
    m.species_vocabulary = {"rare", "common"};
    for (int i = 0; i < 6; ++i) {
      m.images.push_back({"r" + std::to_string(i), 10, 10, 0, std::nullopt});
    }
    for (int i = 0; i < 762; ++i) {
      m.images.push_back({"c" + std::to_string(i), 10, 10, 1, std::nullopt});
    }
    const DatasetStats stats = compute_stats(m);
    expect(stats.samples_per_species.min == 6 && stats.samples_per_species.max == 762,
           "per-species extremes do not reproduce the fixture");
    const std::string tables = render_stats_tables(stats);
    expect(tables.find("| 6 ") != std::string::npos &&
               tables.find("| 762") != std::string::npos,
           "rendered per-species extremes differ");
  }
}

// --- criterion 10: reproducibility -------------------------------------------------

void criterion_reproducibility() {
  const auto dir = testutil::make_temp_dir("acceptance_repro");
  const std::string cli = testutil::cli_path();
  const auto run = [&](const std::string& args) {
    const auto result = testutil::run_command(cli + " " + args);
    expect(result.exit_code == 0,
           "command failed (" + args + "): " + result.output);
  };
  const auto same_bytes = [&](const std::string& a, const std::string& b,
                              const std::string& what) {
    expect(testutil::read_file(dir / a) == testutil::read_file(dir / b),
           what + " not byte-identical (" + a + " vs " + b + ")");
  };
  const auto path = [&](const std::string& name) { return (dir / name).string(); };

  // Fixture corpus via the simulator, twice, plus a parallel run.
  const std::string sim_args =
      "simulate --species 6 --images-per-species 8 --seed 31"
      " --organ-acc leaf=0.8,flower=0.7 --organ-mean leaf=1.4,flower=1.0"
      " --max-rois 3 --spread 0.4";
  run(sim_args + " --manifest-out " + path("m1.json") + " --rois-out " +
      path("r1.ndjson") + " -o " + path("sim1.json"));
  run(sim_args + " --manifest-out " + path("m2.json") + " --rois-out " +
      path("r2.ndjson") + " -o " + path("sim2.json"));
  run(sim_args + " --workers 2 --manifest-out " + path("m3.json") + " --rois-out " +
      path("r3.ndjson") + " -o " + path("sim3.json"));
  same_bytes("m1.json", "m2.json", "simulate manifest");
  same_bytes("r1.ndjson", "r2.ndjson", "simulate rois");
  same_bytes("sim1.json", "sim2.json", "simulate report");
  same_bytes("m1.json", "m3.json", "parallel simulate manifest");
  same_bytes("r1.ndjson", "r3.ndjson", "parallel simulate rois");
  same_bytes("sim1.json", "sim3.json", "parallel simulate report");

  // stats
  run("stats --manifest " + path("m1.json") + " -o " + path("stats1.json"));
  run("stats --manifest " + path("m1.json") + " -o " + path("stats2.json"));
  same_bytes("stats1.json", "stats2.json", "stats report");

  // split (also produces the split manifest for eval-species)
  const std::string split_args =
      "split --manifest " + path("m1.json") + " --seed 77";
  run(split_args + " --manifest-out " + path("ms1.json") + " -o " + path("split1.json"));
  run(split_args + " --manifest-out " + path("ms2.json") + " -o " + path("split2.json"));
  same_bytes("split1.json", "split2.json", "split report");
  same_bytes("ms1.json", "ms2.json", "split manifest");

  // down-select
  const std::string ds_args =
      "down-select --manifest " + path("m1.json") + " --min-leaf-rois 1";
  run(ds_args + " --manifest-out " + path("ds_m1.json") + " -o " + path("ds1.json"));
  run(ds_args + " --manifest-out " + path("ds_m2.json") + " -o " + path("ds2.json"));
  same_bytes("ds1.json", "ds2.json", "down-select report");
  same_bytes("ds_m1.json", "ds_m2.json", "down-select manifest");

  // Detections derived from the generated annotations.
  {
    const DatasetManifest m = load_manifest(path("m1.json"));
    std::vector<Detection> dets;
    double conf = 0.95;
    for (const auto& ann : m.annotations) {
      dets.push_back({ann.image_id, ann.organ, ann.box, conf});
      conf = conf > 0.2 ? conf - 0.01 : 0.95;
    }
    save_detections(path("dets.json"), dets);
  }

  // nms
  const std::string nms_args =
      "nms --detections " + path("dets.json") + " --nms-threshold 0.3";
  run(nms_args + " -o " + path("nms1.json"));
  run(nms_args + " -o " + path("nms2.json"));
  same_bytes("nms1.json", "nms2.json", "nms report");

  // eval-det
  const std::string ed_args = "eval-det --manifest " + path("m1.json") +
                              " --detections " + path("dets.json");
  run(ed_args + " -o " + path("ed1.json"));
  run(ed_args + " -o " + path("ed2.json"));
  same_bytes("ed1.json", "ed2.json", "eval-det report");

  // fuse, serial and parallel
  const std::string fuse_args = "fuse --rois " + path("r1.ndjson");
  run(fuse_args + " -o " + path("fuse1.json"));
  run(fuse_args + " -o " + path("fuse2.json"));
  run(fuse_args + " --workers 2 -o " + path("fuse3.json"));
  same_bytes("fuse1.json", "fuse2.json", "fuse report");
  same_bytes("fuse1.json", "fuse3.json", "parallel fuse report");

  // eval-cls
  const std::string ec_args =
      "eval-cls --manifest " + path("m1.json") + " --rois " + path("r1.ndjson");
  run(ec_args + " -o " + path("ec1.json"));
  run(ec_args + " -o " + path("ec2.json"));
  same_bytes("ec1.json", "ec2.json", "eval-cls report");

  // eval-species, serial and parallel
  const std::string es_args =
      "eval-species --manifest " + path("ms1.json") + " --rois " + path("r1.ndjson");
  run(es_args + " -o " + path("es1.json"));
  run(es_args + " -o " + path("es2.json"));
  run(es_args + " --workers 2 -o " + path("es3.json"));
  same_bytes("es1.json", "es2.json", "eval-species report");
  same_bytes("es1.json", "es3.json", "parallel eval-species report");
}

struct Criterion {
  int number;
  std::string description;
  std::function<void()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "AP oracle equivalence on 500 random instances within 1e-9",
       criterion_oracle_equivalence},
      {2, "hand-derived AP fixtures pass exactly (1.0, 0.5, 0.3)",
       criterion_ap_fixtures},
      {3, "NMS property suite over 1000 randomized inputs at thresholds 0.1 and 0.5",
       criterion_nms_properties},
      {4, "fusion property suite over 1000 randomized cases per property",
       criterion_fusion_properties},
      {5, "fusion hand fixtures (sum, product, voting)", criterion_fusion_fixtures},
      {6, "split protocol on a 161-species manifest spanning 6..762 images",
       criterion_split_protocol},
      {7, "down-selection retains exactly the 161 qualifying species of 300",
       criterion_down_selection},
      {8, "Monte-Carlo fusion claim: sum rule beats the best organ by > 3 SE",
       criterion_monte_carlo_fusion},
      {9, "stats fixtures reproduce the split-count and extremes rows exactly",
       criterion_stats_fixtures},
      {10, "reports are byte-identical across reruns and worker counts",
       criterion_reproducibility},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    try {
      criterion.run();
      std::printf("[PASS] criterion %d: %s\n", criterion.number,
                  criterion.description.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] criterion %d: %s: %s\n", criterion.number,
                  criterion.description.c_str(), e.what());
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
  } else {
    std::printf("all %zu criteria passed\n", criteria.size());
  }
  return failures;
}
