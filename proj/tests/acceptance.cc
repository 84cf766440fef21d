/*
 * Copyright 2026 The mcrank Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcrank/bench.h"
#include "mcrank/cli.h"
#include "mcrank/dataset.h"
#include "mcrank/evaluation.h"
#include "mcrank/fusion.h"
#include "mcrank/gbdt.h"
#include "mcrank/labeling.h"
#include "mcrank/metrics.h"
#include "mcrank/model_io.h"
#include "mcrank/random.h"
#include "mcrank/synthgen.h"
#include "oracles.h"
#include "test_util.h"

namespace mcrank {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// Pinned tolerances and budgets.
constexpr double kNdcgTol = 1e-9;
constexpr double kHandTol = 1e-5;
constexpr double kLambdaTol = 1e-9;
constexpr double kWiTarget = 0.70;
constexpr double kWiTol = 0.02;
constexpr double kOverfitNdcg = 0.99;
constexpr double kMonotoneFraction = 0.95;
constexpr double kLadderGain = 0.02;
constexpr double kLadderSlack = 0.005;
constexpr double kP95BudgetMs = 50.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> failed;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failed.push_back(what);
    }
  }
};

struct Context {
  fs::path work_dir;
  int threads = 4;
};

double Seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void NdcgOracle(const Context&, Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const size_t n = 1 + rng.Below(10);
    std::vector<double> labels(n);
    for (auto& l : labels) l = rng.Bernoulli(0.5) ? static_cast<double>(rng.Below(5)) : 4 * rng.NextDouble();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);
    const int k = 1 + static_cast<int>(rng.Below(10));
    worst = std::max(worst, std::fabs(NdcgAtK(labels, order, k) - oracle::Ndcg(labels, order, k)));
  }
  const double hand = NdcgAtK(std::vector<double>{3, 1, 0}, std::vector<int>{2, 1, 0}, 3);
  const double secs = Seconds(t0);
  o.detail << "max |err| " << worst << " over 10000 lists, hand case " << hand << ", " << secs << " s";
  o.Require(worst <= kNdcgTol, "max error " + std::to_string(worst));
  o.Require(std::fabs(hand - 0.54134) <= kHandTol, "hand case " + std::to_string(hand));
  o.Require(secs < 10, "runtime " + std::to_string(secs) + " s");
}

void LambdaOracle(const Context&, Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1002);
  double worst = 0;
  int nonzero_sums = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 1 + rng.Below(8);
    std::vector<double> labels(n), scores(n);
    for (size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<double>(rng.Below(5));
      scores[i] = rng.Bernoulli(0.2) ? 0.5 : rng.Normal();
    }
    const int k = 1 + static_cast<int>(rng.Below(8));
    const double sigma = 0.5 + rng.NextDouble();
    const auto got = LambdaGradients(labels, scores, k, sigma);
    const auto want = oracle::Lambdas(labels, scores, k, sigma);
    double sum = 0;
    for (size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::fabs(got[i].g - want.g[i]));
      worst = std::max(worst, std::fabs(got[i].h - want.h[i]));
      sum += got[i].g;
    }
    nonzero_sums += sum != 0.0;
  }
  const double secs = Seconds(t0);
  o.detail << "max |err| " << worst << " over 1000 groups, groups with sum(g)!=0: " << nonzero_sums
           << ", " << secs << " s";
  o.Require(worst <= kLambdaTol, "max error " + std::to_string(worst));
  o.Require(nonzero_sums == 0, std::to_string(nonzero_sums) + " groups with nonzero sum");
  o.Require(secs < 30, "runtime " + std::to_string(secs) + " s");
}

void LabelFormulas(const Context&, Outcome& o) {
  o.Require(CalibrateWeights({100, 400, 2000}) == LabelWeights{1, 0.25, 0.05, 0}, "calibrate example");
  FunnelCounts ex;
  ex.purchases = 1;
  ex.clicks = 2;
  ex.view_only = 5;
  o.Require(RawLabel(ex, {1, 0.25, 0.05, 0}) == 1 * 1 + 0.05 * 2, "raw label example");
  const auto norm_ex = NormalizeLabels(std::vector<double>{10, 5, 0});
  o.Require(norm_ex == std::vector<double>{4, 2, 0}, "normalize example");

  Rng rng(1003);
  int funnels = 0, groups = 0, violations = 0;
  while (funnels < 10000) {
    CorpusStats s;
    s.purchases = rng.Below(3000);
    s.add_to_carts = 1 + rng.Below(5000);
    s.clicks = 1 + rng.Below(20000);
    const LabelWeights w = CalibrateWeights(s);
    const double b = std::min(1.0, static_cast<double>(s.purchases) / s.add_to_carts);
    const double c = std::min(b, static_cast<double>(s.purchases) / s.clicks);
    violations += !(w == LabelWeights{1, b, c, 0});
    const size_t n = 1 + rng.Below(25);
    std::vector<double> raw;
    for (size_t i = 0; i < n; ++i) {
      FunnelCounts f;
      f.view_only = rng.Poisson(3.0);
      f.clicks = rng.Bernoulli(0.6) ? rng.Poisson(2.0) : 0;
      f.add_to_carts = rng.Bernoulli(0.4) ? rng.Poisson(1.0) : 0;
      f.purchases = rng.Bernoulli(0.3) ? rng.Poisson(0.8) : 0;
      const double direct = w.a * f.purchases + w.b * f.add_to_carts + w.c * f.clicks + w.d * f.view_only;
      raw.push_back(RawLabel(f, w));
      violations += raw.back() != direct;
    }
    funnels += static_cast<int>(n);
    ++groups;
    const auto norm = NormalizeLabels(raw);
    const double max_raw = *std::max_element(raw.begin(), raw.end());
    for (size_t i = 0; i < n; ++i) {
      violations += norm[i] < 0 || norm[i] > 4;
      if (max_raw > 0) violations += norm[i] != 4 * raw[i] / max_raw;
    }
    if (max_raw > 0) violations += *std::max_element(norm.begin(), norm.end()) != 4.0;
  }
  o.detail << funnels << " funnels in " << groups << " groups, " << violations << " violations";
  o.Require(violations == 0, std::to_string(violations) + " violations");
}

ChannelList List(int channel, const std::vector<std::string>& ids) {
  std::vector<std::pair<std::string, double>> e;
  for (size_t i = 0; i < ids.size(); ++i) e.push_back({ids[i], static_cast<double>(ids.size() - i)});
  return testing_util::MakeList(channel, "q", e);
}

void FusionBaselines(const Context&, Outcome& o) {
  Rng rng(1004);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ChannelList> lists;
    std::vector<std::vector<std::string>> ranked;
    const int channels = 1 + static_cast<int>(rng.Below(4));
    for (int c = 0; c < channels; ++c) {
      std::vector<std::pair<std::string, double>> entries;
      std::set<std::string> seen;
      const int len = static_cast<int>(rng.Below(16));
      for (int i = 0; i < len; ++i) {
        const std::string id = "i" + std::to_string(rng.Below(30));
        if (seen.insert(id).second) entries.push_back({id, rng.NextDouble()});
      }
      lists.push_back(testing_util::MakeList(c, "q", entries));
      ranked.emplace_back();
      for (const auto& e : lists.back().entries()) ranked.back().push_back(e.item.value());
    }
    const double k = 1 + static_cast<double>(rng.Below(100));
    const auto table = oracle::RrfTable(ranked, k);
    const FusedList f = RrfFuse(lists, k);
    bool ok = f.items.size() == table.size();
    for (size_t i = 0; ok && i < f.items.size(); ++i) {
      ok = (*f.scores)[i] == table.at(f.items[i].value());
      if (ok && i > 0) {
        const double prev = (*f.scores)[i - 1], cur = (*f.scores)[i];
        ok = prev > cur || (prev == cur && f.items[i - 1] < f.items[i]);
      }
    }
    mismatches += !ok;
  }

  const std::vector<ChannelList> disjoint = {List(0, {"A", "B", "C"}), List(1, {"D", "E", "F"})};
  InterleaveWeights w;
  w.weights = {{0, 0.7}, {1, 0.3}};
  int first_from_zero = 0;
  constexpr int kRuns = 10000;
  for (int seed = 0; seed < kRuns; ++seed) {
    const auto items = WeightedInterleave(disjoint, w, seed).items;
    first_from_zero += items[0].value() <= "C";
  }
  const double frac = static_cast<double>(first_from_zero) / kRuns;

  InterleaveWeights degenerate;
  degenerate.weights = {{0, 1.0}, {1, 0.0}};
  bool degenerate_ok = true;
  for (int seed = 0; seed < 100; ++seed) {
    const auto items = WeightedInterleave(disjoint, degenerate, seed).items;
    for (size_t i = 0; i < disjoint[0].size(); ++i) {
      degenerate_ok = degenerate_ok && items[i] == disjoint[0].entries()[i].item;
    }
  }
  o.detail << "rrf mismatches " << mismatches << "/1000, wi first-from-channel-0 " << frac
           << ", {1,0} follows channel 0: " << (degenerate_ok ? "yes" : "no");
  o.Require(mismatches == 0, std::to_string(mismatches) + " rrf mismatches");
  o.Require(std::fabs(frac - kWiTarget) <= kWiTol, "wi fraction " + std::to_string(frac));
  o.Require(degenerate_ok, "degenerate weights");
}

PipelineOutput SmallBenchmark(int queries, int threads) {
  WorldConfig wc = testing_util::SmallWorldConfig(queries);
  wc.num_threads = threads;
  const World world = GenerateWorld(wc);
  PipelineConfig pc = testing_util::SmallPipeline();
  pc.num_threads = threads;
  return BuildSplits(world.log, world.catalog, world.channel_names, world.channels, pc);
}

void OverfitSanity(const Context& ctx, Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineOutput out = SmallBenchmark(50, ctx.threads);
  const Dataset& train = out.splits.train;
  TrainParams p;
  p.num_trees = 500;
  p.max_depth = 8;
  // Overfitting wants weak regularization and a sharp pairwise sigmoid; the
  // default l2 and sigma plateau with many tiny swaps of near-equal labels.
  p.min_examples_per_leaf = 1;
  p.shrinkage = 0.5;
  p.l2 = 0.01;
  p.sigma = 5;
  p.num_threads = ctx.threads;
  std::vector<RoundLog> log;
  Train(train, p, nullptr, &log);
  int non_decreasing = 0;
  for (size_t r = 1; r < log.size(); ++r) non_decreasing += log[r].train_ndcg >= log[r - 1].train_ndcg;
  const double frac = static_cast<double>(non_decreasing) / (log.size() - 1);
  const double final_ndcg = log.back().train_ndcg;
  const double secs = Seconds(t0);
  o.detail << train.groups.size() << " training groups from 50 queries, final train NDCG@8 " << final_ndcg
           << ", non-decreasing rounds " << frac << ", " << secs << " s";
  o.Require(final_ndcg >= kOverfitNdcg, "final NDCG " + std::to_string(final_ndcg));
  o.Require(frac >= kMonotoneFraction, "monotone fraction " + std::to_string(frac));
  o.Require(secs < 120, "runtime " + std::to_string(secs) + " s");
}

void AblationLadder(const Context& ctx, Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path report = ctx.work_dir / "ablation_report.json";
  std::ostringstream out, err;
  const int code = RunCli({"ablate", "--config", "default", "--out", report.string(), "--table",
                           (ctx.work_dir / "ablation_table.txt").string(), "--models-dir",
                           ctx.work_dir.string(), "--threads", std::to_string(ctx.threads)},
                          out, err);
  const double secs = Seconds(t0);
  if (code != 0) {
    o.Require(false, "ablate exited " + std::to_string(code) + ": " + err.str());
    return;
  }
  const Json j = Json::parse(std::ifstream(report));
  std::map<std::string, Json> v;
  for (const auto& x : j["variants"]) v[x["name"].get<std::string>()] = x;
  const double wi = v["WI"]["mean_ndcg"], ur = v["UR"]["mean_ndcg"];
  const double ef = v["UR+EF"]["mean_ndcg"], cl = v["UR+EF+CL"]["mean_ndcg"];
  const double ef_p = v["UR+EF"]["purchase_ndcg"], cl_p = v["UR+EF+CL"]["purchase_ndcg"];
  o.detail << "WI " << wi << ", UR " << ur << ", UR+EF " << ef << ", UR+EF+CL " << cl
           << "; purchase NDCG UR+EF " << ef_p << " vs UR+EF+CL " << cl_p << "; "
           << v["UR"]["groups"] << " test groups, " << secs << " s";
  o.Require(ur >= wi + kLadderGain, "UR - WI = " + std::to_string(ur - wi));
  o.Require(ef >= ur + kLadderGain, "UR+EF - UR = " + std::to_string(ef - ur));
  o.Require(cl >= ef - kLadderSlack, "UR+EF+CL - UR+EF = " + std::to_string(cl - ef));
  o.Require(cl_p > ef_p, "purchase NDCG not improved");
  o.Require(secs < 600, "runtime " + std::to_string(secs) + " s");
}

void NoLeakage(const Context& ctx, Outcome& o) {
  WorldConfig wc = testing_util::SmallWorldConfig(40);
  wc.num_threads = ctx.threads;
  const World world = GenerateWorld(wc);
  DatasetBuildConfig cfg;
  cfg.truncation = TruncationConfig::Uniform(15);
  // Fixed weights: recalibrating on a shorter log would be a legitimate difference.
  cfg.engagement_weights = {1, 0.25, 0.05, 0};
  cfg.label_weights = cfg.engagement_weights;
  const DatasetBuilder full(world.log, world.catalog, world.channel_names, cfg);
  const auto all_groups = DatasetBuilder::AllGroups(world.channels);
  int weeks = 0, differing = 0;
  size_t rows = 0, removed = 0;
  for (const auto& [week, lists] : world.channels) {
    std::vector<GroupKey> groups;
    for (const auto& g : all_groups) {
      if (g.week == week) groups.push_back(g);
    }
    const EventLog truncated = world.log.Before(week);
    removed += world.log.events.size() - truncated.events.size();
    const DatasetBuilder cut(truncated, world.catalog, world.channel_names, cfg);
    std::ostringstream a, b;
    const Dataset da = full.Build(world.channels, groups);
    WriteDataset(a, da, /*with_labels=*/false);
    WriteDataset(b, cut.Build(world.channels, groups), /*with_labels=*/false);
    rows += da.num_rows();
    differing += a.str() != b.str();
    ++weeks;
  }
  o.detail << weeks << " weeks, " << rows << " rows, " << removed << " events deleted in total, "
           << differing << " weeks with differing feature files";
  o.Require(differing == 0, std::to_string(differing) + " weeks differ");
  o.Require(rows > 0 && removed > 0, "vacuous audit");
}

void Serialization(const Context& ctx, Outcome& o) {
  const DatasetSplits& splits = testing_util::SmallSplits().splits;
  int mismatched = 0;
  size_t vectors = 0;
  std::string last;
  for (int i = 0; i < 100; ++i) {
    TrainParams p;
    p.num_trees = 5 + i % 7;
    p.max_depth = 2 + i % 5;
    p.oblique = i % 4 == 3;
    p.seed = 100 + i;
    const Model m = Train(splits.train, p);
    const Model back = DeserializeModel(SerializeModel(m));
    const fs::path path = ctx.work_dir / "roundtrip.frm";
    SaveModel(path.string(), back);
    const Model disk = LoadModel(path.string());
    const auto want = PredictDataset(m, splits.test);
    const auto got1 = PredictDataset(back, splits.test);
    const auto got2 = PredictDataset(disk, splits.test);
    vectors += want.size();
    mismatched += std::memcmp(want.data(), got1.data(), want.size() * sizeof(double)) != 0 ||
                  std::memcmp(want.data(), got2.data(), want.size() * sizeof(double)) != 0;
    last = SerializeModel(m);
  }
  int accepted = 0, attempts = 0;
  const auto expect_reject = [&](const std::string& bytes) {
    ++attempts;
    try {
      DeserializeModel(bytes);
      ++accepted;
    } catch (const std::exception&) {
    }
  };
  expect_reject(last.substr(0, last.size() / 2));
  expect_reject(last.substr(0, last.size() - 1));
  expect_reject(last + "x");
  expect_reject("XXXX" + last.substr(4));
  for (size_t pos = 0; pos < last.size(); pos += 11) {
    std::string flipped = last;
    flipped[pos] = static_cast<char>(flipped[pos] ^ 0x5a);
    expect_reject(flipped);
  }
  o.detail << "100 round trips over " << vectors << " held-out vectors, " << mismatched
           << " with differing scores; " << attempts - accepted << "/" << attempts << " corruptions rejected";
  o.Require(mismatched == 0, std::to_string(mismatched) + " round trips differ");
  o.Require(accepted == 0, std::to_string(accepted) + " corrupted files accepted");
}

void Latency(const Context& ctx, Outcome& o) {
  const fs::path saved = ctx.work_dir / "ur_ef_cl.frm";
  std::shared_ptr<const Model> model;
  std::string source;
  if (fs::exists(saved)) {
    model = std::make_shared<const Model>(LoadModel(saved.string()));
    source = "ablation UR+EF+CL model";
  } else {
    TrainParams p;
    p.num_threads = ctx.threads;
    model = std::make_shared<const Model>(Train(testing_util::SmallSplits().splits.train, p));
    source = "small-world model";
  }
  const Scorer scorer(model, ScorerConfig{});
  WorkloadConfig wc;
  wc.requests = 2000;
  wc.pool_size = 100;
  const LatencyReport r = BenchInProcess(scorer, GenerateWorkload(model->schema, wc));
  int max_depth = 0;
  for (const auto& t : model->trees) max_depth = std::max(max_depth, t.Depth());
  o.detail << source << " (" << model->trees.size() << " trees, depth <= " << max_depth << ", "
           << model->schema.size() << " features), " << r.requests << " requests of "
           << r.candidates.at("p50") << " candidates: p50 " << r.p50_ms << " ms, p95 " << r.p95_ms
           << " ms, p99 " << r.p99_ms << " ms; machine: " << r.hardware;
  o.Require(r.candidates.at("min") == 100 && r.candidates.at("max") == 100, "pool size not 100");
  o.Require(r.p95_ms < kP95BudgetMs, "p95 " + std::to_string(r.p95_ms) + " ms");
}

void Determinism(const Context& ctx, Outcome& o) {
  const int n = std::max(2, ctx.threads);
  const PipelineOutput a = SmallBenchmark(40, 1);
  const PipelineOutput b = SmallBenchmark(40, n);
  o.Require(a.splits.train.Fingerprint() == b.splits.train.Fingerprint() &&
                a.splits.test.Fingerprint() == b.splits.test.Fingerprint(),
            "datasets differ across threads");
  int model_diffs = 0, metric_diffs = 0;
  for (bool oblique : {false, true}) {
    TrainParams p;
    p.num_trees = 40;
    p.oblique = oblique;
    p.num_threads = 1;
    const Model m1 = Train(a.splits.train, p, &a.splits.valid);
    p.num_threads = n;
    const Model mn = Train(a.splits.train, p, &a.splits.valid);
    model_diffs += SerializeModel(m1) != SerializeModel(mn);
    const auto e1 = EvaluateVariant(ModelRanker("m", m1), a.splits.test, MetricConfig{}, 1, 1);
    const auto en = EvaluateVariant(ModelRanker("m", mn), a.splits.test, MetricConfig{}, 1, n);
    metric_diffs += e1.mean_ndcg != en.mean_ndcg || e1.per_group != en.per_group;
  }
  const InterleaveRanker wi({}, 20);
  const auto w1 = EvaluateVariant(wi, a.splits.test, MetricConfig{}, 1, 1);
  const auto wn = EvaluateVariant(wi, a.splits.test, MetricConfig{}, 1, n);
  metric_diffs += w1.mean_ndcg != wn.mean_ndcg || w1.per_group != wn.per_group;
  o.detail << "1 vs " << n << " threads: " << model_diffs << " differing models, " << metric_diffs
           << " differing metric sets";
  o.Require(model_diffs == 0, "models differ");
  o.Require(metric_diffs == 0, "metrics differ");
}

}  // namespace
}  // namespace mcrank

int main(int argc, char** argv) {
  using namespace mcrank;
  CLI::App app{"mcrank acceptance suite"};
  std::vector<int> only;
  std::string work_dir = (fs::temp_directory_path() / "mcrank_acceptance").string();
  Context ctx;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',')->check(CLI::Range(1, 10));
  app.add_option("--work-dir", work_dir, "Scratch directory for reports and models");
  app.add_option("--threads", ctx.threads, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  ctx.work_dir = work_dir;
  fs::create_directories(ctx.work_dir);

  const std::vector<std::pair<std::string, std::function<void(const Context&, Outcome&)>>> criteria = {
      {"ndcg oracle", NdcgOracle},
      {"lambda oracle", LambdaOracle},
      {"label formulas", LabelFormulas},
      {"fusion baselines", FusionBaselines},
      {"overfit sanity", OverfitSanity},
      {"ablation ladder", AblationLadder},
      {"no leakage", NoLeakage},
      {"serialization", Serialization},
      {"latency", Latency},
      {"determinism", Determinism},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      criteria[i].second(ctx, o);
    } catch (const std::exception& e) {
      o.Require(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": "
              << o.detail.str();
    for (size_t f = 0; f < o.failed.size(); ++f) std::cout << (f == 0 ? " | failed: " : "; ") << o.failed[f];
    std::cout << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
