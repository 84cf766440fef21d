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

#include "mcrank/cli.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mcrank/bench.h"
#include "mcrank/config.h"
#include "mcrank/evaluation.h"
#include "mcrank/fusion.h"
#include "mcrank/model_io.h"
#include "mcrank/parallel.h"
#include "mcrank/scoring.h"
#include "mcrank/server.h"
#include "mcrank/synthgen.h"

namespace mcrank {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::ofstream OpenOut(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

void WriteText(const std::string& path, const std::string& text) {
  auto out = OpenOut(path);
  out << text;
}

LabelWeights ParseLabelMode(const std::string& mode, const LabelWeights& conversion) {
  if (mode == "conversion") return conversion;
  if (mode == "heuristic") return LabelWeights::Heuristic();
  if (mode == "purchase") return LabelWeights::PurchaseOnly();
  throw InvalidInputError("unknown label mode '" + mode + "'");
}

Json RetentionJson(const SplitPlan& plan) {
  Json per_week = Json::object();
  for (const auto& [w, n] : plan.stats.kept_per_week) per_week[std::to_string(w)] = n;
  return {{"groups_total", plan.stats.groups_total},
          {"groups_kept", plan.stats.groups_kept},
          {"dropped_impressions", plan.stats.dropped_impressions},
          {"dropped_purchases", plan.stats.dropped_purchases},
          {"kept_per_week", per_week},
          {"train_weeks", {0, plan.train_end_week - 1}},
          {"valid_week", plan.valid_week},
          {"test_week", plan.test_week},
          {"train_groups", plan.train.size()},
          {"valid_groups", plan.valid.size()},
          {"test_groups", plan.test.size()}};
}

Json WeightsJson(const LabelWeights& w) { return {w.a, w.b, w.c, w.d}; }

// ---- subcommands ----------------------------------------------------------

struct GenerateOpts {
  std::string out;
  std::string config;
  int queries = 0, items = 0, weeks = 0, n_k = 0;
  double kappa = -1, trend = -1;
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
};

int RunGenerate(const GenerateOpts& o, std::ostream& out) {
  WorldConfig wc;
  if (!o.config.empty()) wc = LoadExperimentConfig(o.config).world;
  if (o.queries > 0) wc.num_queries = o.queries;
  if (o.items > 0) wc.num_items = o.items;
  if (o.weeks > 0) wc.num_weeks = o.weeks;
  if (o.n_k > 0) wc.n_k = o.n_k;
  if (o.kappa >= 0) wc.channel_utility_concentration = o.kappa;
  if (o.trend >= 0) wc.trend_fraction = o.trend;
  if (o.seed_set) wc.seed = o.seed;
  wc.num_threads = o.threads;
  const World world = GenerateWorld(wc);
  WriteWorld(o.out, world);
  out << "wrote " << o.out << ": " << world.config.num_queries << " queries, "
      << world.catalog.size() << " items, " << world.log.events.size() << " events, "
      << world.channels.size() << " weeks\n";
  return 0;
}

struct BuildOpts {
  std::string world, out, labels = "conversion";
  int n_k = 25, threads = 1;
  std::vector<int> windows = {1, 4};
  double half_life = 2.0;
};

int RunBuildDataset(const BuildOpts& o, std::ostream& out) {
  const WorldInputs in = LoadWorldInputs(o.world);
  PipelineConfig pc;
  pc.truncation = TruncationConfig::Uniform(o.n_k);
  pc.lookback.windows = o.windows;
  pc.lookback.decay_half_life = o.half_life;
  pc.lookback.Validate();
  pc.num_threads = o.threads;
  PipelineOutput po = BuildSplits(in.log, in.catalog, in.channel_names, in.channels, pc);
  const LabelWeights conv = po.splits.conversion_weights;
  const LabelWeights labels = ParseLabelMode(o.labels, conv);
  if (!(labels == conv)) {
    po.splits.train = po.splits.train.WithLabels(labels);
    po.splits.valid = po.splits.valid.WithLabels(labels);
    po.splits.test = po.splits.test.WithLabels(labels);
  }
  fs::create_directories(o.out);
  const fs::path dir(o.out);
  SaveDataset((dir / "train.tsv").string(), po.splits.train);
  SaveDataset((dir / "valid.tsv").string(), po.splits.valid);
  SaveDataset((dir / "test.tsv").string(), po.splits.test);

  // Serve-time sidecars, as of the week after the log ends.
  DatasetBuildConfig bc;
  bc.truncation = pc.truncation;
  bc.lookback = pc.lookback;
  bc.label_weights = conv;
  bc.engagement_weights = conv;
  const DatasetBuilder builder(in.log, in.catalog, in.channel_names, bc);
  const int serve_week = in.channels.rbegin()->first + 1;
  FeatureTable items, engagement;
  for (const auto& list : in.channels.rbegin()->second) {
    for (const auto& e : list.entries()) {
      if (items.Find(e.item.value()) == nullptr) {
        items.Put(e.item.value(), builder.ItemFeatures(e.item, serve_week));
      }
      const std::string key = EngagementKey(list.query().value(), e.item.value());
      if (engagement.Find(key) == nullptr) {
        engagement.Put(key, builder.EngagementFeatureMap(list.query().value(), e.item, serve_week));
      }
    }
  }
  {
    auto f = OpenOut((dir / "item_features.tsv").string());
    WriteFeatureTable(f, items, {"item_id"});
  }
  {
    auto f = OpenOut((dir / "engagement.tsv").string());
    WriteFeatureTable(f, engagement, {"query_id", "item_id"});
  }
  const Json meta = {{"conversion_weights", WeightsJson(conv)},
                     {"label_weights", WeightsJson(labels)},
                     {"label_mode", o.labels},
                     {"calibration_totals",
                      {{"purchases", po.calibration_stats.purchases},
                       {"add_to_carts", po.calibration_stats.add_to_carts},
                       {"clicks", po.calibration_stats.clicks}}},
                     {"retention", RetentionJson(po.plan)},
                     {"serve_week", serve_week},
                     {"n_k", o.n_k}};
  WriteText((dir / "split.json").string(), meta.dump(2) + "\n");
  out << "train " << po.splits.train.num_rows() << " rows / " << po.splits.train.groups.size()
      << " groups, valid " << po.splits.valid.num_rows() << " / " << po.splits.valid.groups.size()
      << ", test " << po.splits.test.num_rows() << " / " << po.splits.test.groups.size()
      << "; weights (" << FormatDouble(conv.a) << ", " << FormatDouble(conv.b) << ", "
      << FormatDouble(conv.c) << ", " << FormatDouble(conv.d) << ")\n";
  return 0;
}

struct TrainOpts {
  std::string data, valid, out, log;
  TrainParams params;
  bool drop_engagement = false;
  bool quiet = false;
};

int RunTrain(const TrainOpts& o, std::ostream& out) {
  Dataset train = LoadDataset(o.data);
  std::optional<Dataset> valid;
  if (!o.valid.empty()) valid = LoadDataset(o.valid);
  if (o.drop_engagement) {
    const auto keep = [](const FeatureColumn& c) { return c.group != FeatureGroup::kEngagement; };
    train = train.SelectColumns(keep);
    if (valid) valid = valid->SelectColumns(keep);
  }
  std::unique_ptr<std::ofstream> log_file;
  if (!o.log.empty()) log_file = std::make_unique<std::ofstream>(OpenOut(o.log));
  const std::string header = "round\ttrain_ndcg@" + std::to_string(o.params.ndcg_truncation) +
                             "\tvalid_ndcg@" + std::to_string(o.params.ndcg_truncation) + "\n";
  if (!o.quiet) out << header;
  if (log_file) *log_file << header;
  const auto on_round = [&](const RoundLog& r) {
    std::ostringstream line;
    line << r.round << '\t' << std::fixed << std::setprecision(6) << r.train_ndcg << '\t';
    if (std::isnan(r.valid_ndcg)) {
      line << "NA";
    } else {
      line << r.valid_ndcg;
    }
    line << '\n';
    if (!o.quiet) out << line.str() << std::flush;
    if (log_file) *log_file << line.str();
  };
  const Model model = Train(train, o.params, valid ? &*valid : nullptr, nullptr, on_round);
  SaveModel(o.out, model);
  out << "saved " << o.out << " (" << model.trees.size() << " trees, " << model.schema.size()
      << " features, fingerprint " << ModelFingerprint(model) << ")\n";
  return 0;
}

struct EvaluateOpts {
  std::string model, data, ranker = "model", out;
  int k = 8, wi_seeds = 20, threads = 1;
  uint64_t seed = 1;
};

int RunEvaluate(const EvaluateOpts& o, std::ostream& out) {
  const Dataset ds = LoadDataset(o.data);
  MetricConfig mc;
  mc.k = o.k;
  std::vector<std::unique_ptr<Ranker>> rankers;
  std::optional<Model> model;
  const bool all = o.ranker == "all";
  if (o.ranker == "model" || all) {
    if (o.model.empty()) throw InvalidInputError("--model is required for the model ranker");
    model = LoadModel(o.model);
    rankers.push_back(std::make_unique<ModelRanker>("model", *model));
  }
  if (o.ranker == "rrf" || all) rankers.push_back(std::make_unique<RrfRanker>());
  if (o.ranker == "wi" || all) {
    rankers.push_back(std::make_unique<InterleaveRanker>(std::map<std::string, double>{}, o.wi_seeds));
  }
  if (rankers.empty()) throw InvalidInputError("unknown ranker '" + o.ranker + "'");
  Json report;
  report["k"] = o.k;
  report["dataset_fingerprint"] = HexDigest(ds.Fingerprint());
  report["seed"] = o.seed;
  out << "ranker\tndcg@" << o.k << "\tgroups\tzero_idcg\tseeds\n";
  for (const auto& r : rankers) {
    const VariantMetrics m = EvaluateVariant(*r, ds, mc, o.seed, o.threads);
    out << m.name << '\t' << std::fixed << std::setprecision(6) << m.mean_ndcg << '\t' << m.groups
        << '\t' << m.zero_idcg_groups << '\t' << m.seeds << '\n';
    report["rankers"].push_back({{"name", m.name},
                                 {"mean_ndcg", m.mean_ndcg},
                                 {"groups", m.groups},
                                 {"zero_idcg_groups", m.zero_idcg_groups},
                                 {"seeds", m.seeds},
                                 {"quantiles", m.quantiles}});
  }
  if (!o.out.empty()) WriteText(o.out, report.dump(2) + "\n");
  return 0;
}

struct AblateOpts {
  std::string config = "default", world, out = "ablation_report.json", table, models_dir;
  int threads = 1, queries = 0, trees = 0;
};

int RunAblate(const AblateOpts& o, std::ostream& out) {
  ExperimentConfig ec = LoadExperimentConfig(o.config);
  if (o.queries > 0) ec.world.num_queries = o.queries;
  if (o.trees > 0) ec.ablation.params.num_trees = o.trees;
  ec.ablation.params.num_threads = o.threads;
  ec.pipeline.num_threads = o.threads;
  ec.world.num_threads = o.threads;

  const auto t0 = std::chrono::steady_clock::now();
  PipelineOutput po;
  if (!o.world.empty()) {
    const WorldInputs in = LoadWorldInputs(o.world);
    po = BuildSplits(in.log, in.catalog, in.channel_names, in.channels, ec.pipeline);
  } else {
    const World w = GenerateWorld(ec.world);
    po = BuildSplits(w.log, w.catalog, w.channel_names, w.channels, ec.pipeline);
  }
  std::vector<Model> models;
  EvalReport report = AblationRun(po.splits, ec.ablation, &models);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.notes["runtime_seconds"] = FormatDouble(std::round(seconds * 10) / 10);
  report.notes["conversion_weights"] =
      FormatDouble(po.splits.conversion_weights.a) + "," + FormatDouble(po.splits.conversion_weights.b) +
      "," + FormatDouble(po.splits.conversion_weights.c) + "," +
      FormatDouble(po.splits.conversion_weights.d);
  report.seeds.push_back(ec.world.seed);

  Json j = report.ToJson();
  j["config"] = ExperimentConfigToJson(ec);
  j["retention"] = RetentionJson(po.plan);
  WriteText(o.out, j.dump(2) + "\n");
  const std::string table = report.ToTable();
  if (!o.table.empty()) WriteText(o.table, table);
  if (!o.models_dir.empty()) {
    fs::create_directories(o.models_dir);
    const char* names[] = {"ur.frm", "ur_ef.frm", "ur_ef_cl.frm"};
    for (size_t i = 0; i < models.size() && i < 3; ++i) {
      SaveModel((fs::path(o.models_dir) / names[i]).string(), models[i]);
    }
  }
  out << table << "report written to " << o.out << "\n";
  return 0;
}

struct FuseOpts {
  std::string channels, method = "rrf", out = "-";
  double k_rrf = kDefaultRrfK;
  std::vector<std::string> weights;
  uint64_t seed = 1;
  int n_k = 0;
};

int RunFuse(const FuseOpts& o, std::ostream& out) {
  std::vector<std::string> names;
  std::vector<ChannelList> lists = LoadChannelListFile(o.channels, names);
  if (o.n_k > 0) {
    for (auto& l : lists) l = Truncate(l, o.n_k);
  }
  std::map<std::string, double> by_name;
  for (const auto& w : o.weights) {
    const auto eq = w.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InvalidInputError("--weight expects channel=value, got '" + w + "'");
    }
    by_name[w.substr(0, eq)] = ParseDouble(w.substr(eq + 1));
  }
  for (const auto& [name, v] : by_name) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw InvalidInputError("--weight names unknown channel '" + name + "'");
    }
  }
  if (o.method != "rrf" && o.method != "wi") {
    throw InvalidInputError("unknown fusion method '" + o.method + "'");
  }
  std::unique_ptr<std::ofstream> file;
  std::ostream* sink = &out;
  if (o.out != "-") {
    file = std::make_unique<std::ofstream>(OpenOut(o.out));
    sink = file.get();
  }
  size_t begin = 0;
  while (begin < lists.size()) {
    size_t end = begin;
    while (end < lists.size() && lists[end].query() == lists[begin].query()) ++end;
    const std::span<const ChannelList> group(lists.data() + begin, end - begin);
    FusedList fused;
    if (o.method == "rrf") {
      fused = RrfFuse(group, o.k_rrf);
    } else {
      InterleaveWeights w;
      if (by_name.empty()) {
        w = InterleaveWeights::Uniform(group);
      } else {
        for (const auto& l : group) {
          const auto it = by_name.find(l.channel().name);
          w.weights[l.channel().index] = it == by_name.end() ? 0.0 : it->second;
        }
      }
      fused = WeightedInterleave(group, w, DeriveSeed(o.seed, HashString(lists[begin].query().value())));
    }
    for (size_t i = 0; i < fused.items.size(); ++i) {
      *sink << fused.query.value() << '\t' << (i + 1) << '\t' << fused.items[i].value() << '\t'
            << (fused.scores ? FormatDouble((*fused.scores)[i]) : std::string("NA")) << '\n';
    }
    begin = end;
  }
  return 0;
}

struct ServeOpts {
  std::string model, bind, item_features, engagement;
  int pool_cap = 0;
  int n_k = 25;
};

int RunServe(const ServeOpts& o, std::ostream& out) {
  auto model = std::make_shared<const Model>(LoadModel(o.model));
  BindAddress bind;
  ScorerConfig sc;
  sc.truncation = TruncationConfig::Uniform(o.n_k);
  ApplyEnvironmentOverrides(bind, sc);
  if (!o.bind.empty()) bind = ParseBindAddress(o.bind);
  if (o.pool_cap > 0) sc.pool_cap = static_cast<size_t>(o.pool_cap);
  std::shared_ptr<const FeatureTable> items, engagement;
  if (!o.item_features.empty()) {
    items = std::make_shared<const FeatureTable>(LoadFeatureTable(o.item_features, 1));
  }
  if (!o.engagement.empty()) {
    engagement = std::make_shared<const FeatureTable>(LoadFeatureTable(o.engagement, 2));
  }
  const Scorer scorer(model, sc, items, engagement);
  ScoringServer server(scorer);
  out << "serving " << o.model << " (fingerprint " << scorer.fingerprint() << ") on " << bind.host
      << ':' << bind.port << ", pool cap " << sc.pool_cap << std::endl;
  server.Run(bind);
  return 0;
}

struct BenchOpts {
  std::string model, out;
  WorkloadConfig workload;
  bool no_e2e = false;
  size_t e2e_requests = 0;
};

int RunBench(const BenchOpts& o, std::ostream& out) {
  auto model = std::make_shared<const Model>(LoadModel(o.model));
  ScorerConfig sc;
  sc.truncation = TruncationConfig::Uniform(o.workload.n_k);
  const Scorer scorer(model, sc);
  const auto requests = GenerateWorkload(model->schema, o.workload);
  Json j;
  j["model"] = {{"path", o.model},
                {"trees", model->trees.size()},
                {"features", model->schema.size()},
                {"fingerprint", scorer.fingerprint()}};
  const LatencyReport in_process = BenchInProcess(scorer, requests);
  out << in_process.ToText();
  j["in_process"] = in_process.ToJson();
  if (!o.no_e2e) {
    std::vector<ScoreRequest> sub = requests;
    if (o.e2e_requests > 0 && o.e2e_requests < sub.size()) sub.resize(o.e2e_requests);
    const LatencyReport e2e = BenchEndToEnd(scorer, sub);
    out << e2e.ToText();
    j["end_to_end"] = e2e.ToJson();
  }
  if (!o.out.empty()) WriteText(o.out, j.dump(2) + "\n");
  return 0;
}

void AddTrainFlags(CLI::App* cmd, TrainParams& p) {
  cmd->add_option("--trees", p.num_trees, "Number of boosting rounds")->capture_default_str();
  cmd->add_option("--shrinkage,--lr", p.shrinkage, "Per-tree learning rate")->capture_default_str();
  cmd->add_option("--depth", p.max_depth, "Maximum tree depth")->capture_default_str();
  cmd->add_option("--min-leaf", p.min_examples_per_leaf, "Minimum examples per leaf")
      ->capture_default_str();
  cmd->add_option("--l2", p.l2, "L2 regularization on leaf values")->capture_default_str();
  cmd->add_option("--ndcg-k", p.ndcg_truncation, "NDCG truncation used by the gradients")
      ->capture_default_str();
  cmd->add_option("--sigma", p.sigma, "Sigmoid steepness")->capture_default_str();
  cmd->add_flag("--oblique", p.oblique, "Enable sparse oblique splits");
  cmd->add_option("--projections", p.oblique_projections, "Oblique projections per node")
      ->capture_default_str();
  cmd->add_option("--sparsity", p.oblique_sparsity, "Feature inclusion probability per projection")
      ->capture_default_str();
  cmd->add_option("--max-thresholds", p.max_thresholds, "Candidate thresholds per feature")
      ->capture_default_str();
  cmd->add_option("--seed", p.seed, "Training seed")->capture_default_str();
  cmd->add_option("--threads", p.num_threads, "Worker threads (never changes the model)")
      ->capture_default_str();
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mcrank: multi-channel learning-to-rank toolkit", "mcrank"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mcrank 0.1.0");

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic multi-channel world");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--config", gen.config, "Experiment config JSON (its world section is used)");
  g->add_option("--queries", gen.queries, "Number of queries");
  g->add_option("--items", gen.items, "Number of items");
  g->add_option("--weeks", gen.weeks, "Number of weeks (>= 5)");
  g->add_option("--n-k", gen.n_k, "Entries per channel list");
  g->add_option("--kappa", gen.kappa, "Channel utility concentration");
  g->add_option("--trend", gen.trend, "Fraction of trending items");
  g->add_option("--seed", gen.seed, "World seed")->each([&](const std::string&) { gen.seed_set = true; });
  g->add_option("--threads", gen.threads, "Worker threads")->capture_default_str();

  BuildOpts build;
  auto* b = app.add_subcommand("build-dataset", "Filter, split, label and featurize a world");
  b->add_option("--world", build.world, "World directory written by generate")->required();
  b->add_option("--out", build.out, "Output directory")->required();
  b->add_option("--n-k", build.n_k, "Per-channel truncation")->capture_default_str()->check(CLI::PositiveNumber);
  b->add_option("--labels", build.labels, "conversion, heuristic or purchase")
      ->capture_default_str()
      ->check(CLI::IsMember({"conversion", "heuristic", "purchase"}));
  b->add_option("--windows", build.windows, "Lookback windows in weeks")->delimiter(',')->capture_default_str();
  b->add_option("--half-life", build.half_life, "Engagement decay half-life in weeks")->capture_default_str();
  b->add_option("--threads", build.threads, "Worker threads")->capture_default_str();

  TrainOpts train;
  auto* t = app.add_subcommand("train", "Train a LambdaMART model");
  t->add_option("--data", train.data, "Training dataset TSV (with .schema sidecar)")->required();
  t->add_option("--valid", train.valid, "Validation dataset TSV");
  t->add_option("--out", train.out, "Output model file")->required();
  t->add_option("--log", train.log, "Also write the round log to this file");
  t->add_flag("--drop-engagement", train.drop_engagement, "Train without engagement features");
  t->add_flag("--quiet", train.quiet, "Do not print the round log");
  AddTrainFlags(t, train.params);

  EvaluateOpts eval;
  auto* e = app.add_subcommand("evaluate", "Mean NDCG@k of a model or baseline on a dataset");
  e->add_option("--data", eval.data, "Evaluation dataset TSV")->required();
  e->add_option("--model", eval.model, "Model file");
  e->add_option("--ranker", eval.ranker, "model, rrf, wi or all")
      ->capture_default_str()
      ->check(CLI::IsMember({"model", "rrf", "wi", "all"}));
  e->add_option("--k", eval.k, "Truncation")->capture_default_str()->check(CLI::PositiveNumber);
  e->add_option("--wi-seeds", eval.wi_seeds, "Seeds averaged for WI")->capture_default_str()->check(CLI::PositiveNumber);
  e->add_option("--seed", eval.seed, "Evaluation seed")->capture_default_str();
  e->add_option("--threads", eval.threads, "Worker threads")->capture_default_str();
  e->add_option("--out", eval.out, "Write a JSON report here");

  AblateOpts abl;
  auto* a = app.add_subcommand("ablate", "Run the WI / UR / UR+EF / UR+EF+CL ablation");
  a->add_option("--config", abl.config, "'default' or an experiment config JSON")->capture_default_str();
  a->add_option("--world", abl.world, "Use this world directory instead of generating one");
  a->add_option("--out", abl.out, "JSON report path")->capture_default_str();
  a->add_option("--table", abl.table, "Also write the text table here");
  a->add_option("--models-dir", abl.models_dir, "Save the three trained models here");
  a->add_option("--queries", abl.queries, "Override the number of generated queries");
  a->add_option("--trees", abl.trees, "Override the number of trees");
  a->add_option("--threads", abl.threads, "Worker threads")->capture_default_str();

  FuseOpts fuse;
  auto* f = app.add_subcommand("fuse", "Fuse channel lists with RRF or weighted interleaving");
  f->add_option("--channels", fuse.channels, "Channel list TSV")->required();
  f->add_option("--method", fuse.method, "rrf or wi")->capture_default_str()->check(CLI::IsMember({"rrf", "wi"}));
  f->add_option("--k-rrf", fuse.k_rrf, "RRF constant")->capture_default_str();
  f->add_option("--weight", fuse.weights, "Interleaving weight, channel=value (repeatable)");
  f->add_option("--seed", fuse.seed, "Interleaving seed")->capture_default_str();
  f->add_option("--n-k", fuse.n_k, "Truncate each list first (0 keeps all)")->capture_default_str();
  f->add_option("--out", fuse.out, "Output TSV, - for stdout")->capture_default_str();

  ServeOpts serve;
  auto* s = app.add_subcommand("serve", "Serve a model over HTTP");
  s->add_option("--model", serve.model, "Model file")->required();
  s->add_option("--bind", serve.bind, "host:port (default 127.0.0.1:8080, env MCRANK_BIND)");
  s->add_option("--pool-cap", serve.pool_cap, "Max candidates per request (default 500, env MCRANK_POOL_CAP)");
  s->add_option("--n-k", serve.n_k, "Per-channel truncation")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--item-features", serve.item_features, "item_features.tsv sidecar");
  s->add_option("--engagement", serve.engagement, "engagement.tsv sidecar");

  BenchOpts bench;
  auto* bn = app.add_subcommand("bench", "Measure scoring latency in-process and over HTTP");
  bn->add_option("--model", bench.model, "Model file")->required();
  bn->add_option("--requests", bench.workload.requests, "Requests to replay")->capture_default_str();
  bn->add_option("--pool-size", bench.workload.pool_size, "Exact pool size (0 draws it)")->capture_default_str();
  bn->add_option("--channels", bench.workload.channels, "Channels per request")->capture_default_str();
  bn->add_option("--n-k", bench.workload.n_k, "Entries per channel")->capture_default_str();
  bn->add_option("--seed", bench.workload.seed, "Workload seed")->capture_default_str();
  bn->add_flag("--no-e2e", bench.no_e2e, "Skip the HTTP run");
  bn->add_option("--e2e-requests", bench.e2e_requests, "Requests for the HTTP run (default all)");
  bn->add_option("--out", bench.out, "Write a JSON report here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    std::string msg = ex.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << " (run with --help for usage)\n";
    return 2;
  }

  try {
    if (*g) return RunGenerate(gen, out);
    if (*b) return RunBuildDataset(build, out);
    if (*t) return RunTrain(train, out);
    if (*e) return RunEvaluate(eval, out);
    if (*a) return RunAblate(abl, out);
    if (*f) return RunFuse(fuse, out);
    if (*s) return RunServe(serve, out);
    if (*bn) return RunBench(bench, out);
  } catch (const std::exception& ex) {
    std::string msg = ex.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mcrank
