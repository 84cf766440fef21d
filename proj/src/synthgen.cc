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

#include "mcrank/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "mcrank/fusion.h"
#include "mcrank/parallel.h"
#include "mcrank/random.h"

namespace mcrank {
namespace {

namespace fs = std::filesystem;

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double Logit(double p) { return std::log(p / (1.0 - p)); }
double Round6(double x) { return std::round(x * 1e6) / 1e6; }

std::string Padded(char prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%0*d", prefix, width, value);
  return buf;
}

// Per-channel affine maps so raw channel scores live on unrelated scales.
struct ScoreScale {
  double scale;
  double offset;
};
ScoreScale ChannelScale(size_t c) {
  static constexpr ScoreScale kScales[] = {{8.0, 20.0}, {0.15, 0.6}, {3.0, 5.0}, {1.0, 0.0}};
  return kScales[c % 4];
}

struct ItemLatent {
  double attractiveness = 0;
  double quality = 0;
  bool trend = false;
  double slope = 0;
  int category = 0;
};

struct RawEvent {
  int64_t timestamp;
  int week;
  uint32_t session;
  uint32_t candidate;
  Action action;
};

struct QueryOutput {
  QueryTruth truth;
  std::vector<std::vector<ChannelList>> lists;  // [week]
  std::vector<RawEvent> events;
};

}  // namespace

void WorldConfig::Validate() const {
  const auto rate = [](double p, const char* name) {
    if (!(p > 0 && p < 1)) throw InvalidInputError(std::string(name) + " must be in (0,1)");
  };
  if (num_queries < 1 || num_items < 1 || num_categories < 1) {
    throw InvalidInputError("world: counts must be positive");
  }
  if (channel_names.empty()) throw InvalidInputError("world: at least one channel required");
  if (std::set<std::string>(channel_names.begin(), channel_names.end()).size() !=
      channel_names.size()) {
    throw InvalidInputError("world: duplicate channel name");
  }
  if (num_weeks < 5) throw InvalidInputError("world: num_weeks must be >= 5");
  if (n_k < 1) throw InvalidInputError("world: n_k must be >= 1");
  if (candidates_per_query < 1 || candidates_per_query > num_items) {
    throw InvalidInputError("world: candidates_per_query must be in [1, num_items]");
  }
  if (!(in_category_fraction >= 0 && in_category_fraction <= 1)) {
    throw InvalidInputError("world: in_category_fraction must be in [0,1]");
  }
  if (!(sessions_min > 0 && sessions_max >= sessions_min && sessions_exponent >= 0)) {
    throw InvalidInputError("world: bad session distribution");
  }
  rate(click_rate, "click_rate");
  rate(atc_rate, "atc_rate");
  rate(purchase_rate, "purchase_rate");
  rate(position_bias, "position_bias");
  if (!(channel_utility_concentration >= 0)) {
    throw InvalidInputError("world: channel_utility_concentration must be >= 0");
  }
  if (!(trend_fraction >= 0 && trend_fraction <= 1)) {
    throw InvalidInputError("world: trend_fraction must be in [0,1]");
  }
}

double GroundTruth::Relevance(const std::string& query, const std::string& item,
                              int week) const {
  const auto q = query_index_.find(query);
  if (q == query_index_.end()) return std::numeric_limits<double>::quiet_NaN();
  const auto& items = item_index_[q->second];
  const auto i = items.find(item);
  const auto& rel = queries[q->second].relevance;
  if (i == items.end() || week < 0 || static_cast<size_t>(week) >= rel.size()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return rel[week][i->second];
}

void GroundTruth::Index() {
  query_index_.clear();
  item_index_.assign(queries.size(), {});
  for (size_t q = 0; q < queries.size(); ++q) {
    query_index_[queries[q].query] = q;
    for (size_t i = 0; i < queries[q].items.size(); ++i) {
      item_index_[q][queries[q].items[i]] = i;
    }
  }
}

World GenerateWorld(const WorldConfig& cfg) {
  cfg.Validate();
  const size_t K = cfg.channel_names.size();
  const int W = cfg.num_weeks;

  World world;
  world.config = cfg;
  world.channel_names = cfg.channel_names;
  world.truth.position_bias = cfg.position_bias;

  // Global latents: catalog, item traits, category-by-channel utility.
  Rng global(DeriveSeed(cfg.seed, HashString("catalog")));
  std::vector<ItemLatent> latent(cfg.num_items);
  std::vector<std::string> item_ids(cfg.num_items);
  std::vector<std::vector<uint32_t>> by_category(cfg.num_categories);
  for (int i = 0; i < cfg.num_items; ++i) {
    auto& l = latent[i];
    item_ids[i] = Padded('i', i, 5);
    l.category = static_cast<int>(global.Below(cfg.num_categories));
    l.attractiveness = global.Normal();
    l.quality = cfg.item_quality_sd * global.Normal();
    l.trend = global.NextDouble() < cfg.trend_fraction;
    l.slope = l.trend ? cfg.trend_slope_sd * global.Normal() : 0.0;
    const double price =
        std::round(100.0 * std::exp(2.5 + 0.1 * l.category + 0.6 * global.Normal())) / 100.0;
    const int launch = -static_cast<int>(global.Below(104));
    world.catalog.Add({ItemId(item_ids[i]), price, l.category, launch});
    by_category[l.category].push_back(static_cast<uint32_t>(i));
    world.truth.item_attractiveness[item_ids[i]] = l.attractiveness;
    if (l.trend) world.truth.trend_items.push_back(item_ids[i]);
  }
  std::vector<std::vector<double>> utility(cfg.num_categories, std::vector<double>(K));
  for (auto& row : utility) {
    for (auto& u : row) u = global.NextDouble();
  }
  std::vector<int> popularity(cfg.num_queries);
  std::iota(popularity.begin(), popularity.end(), 0);
  for (int i = cfg.num_queries - 1; i > 0; --i) {
    std::swap(popularity[i], popularity[global.Below(static_cast<uint64_t>(i) + 1)]);
  }

  const double click0 = Logit(cfg.click_rate);
  const double atc0 = Logit(cfg.atc_rate);
  const double purchase0 = Logit(cfg.purchase_rate);

  std::vector<QueryOutput> outputs(cfg.num_queries);
  ParallelFor(cfg.num_threads, outputs.size(), [&](size_t begin, size_t end) {
    for (size_t qi = begin; qi < end; ++qi) {
      QueryOutput& out = outputs[qi];
      QueryTruth& t = out.truth;
      t.query = Padded('q', static_cast<int>(qi), 4);
      Rng rng(DeriveSeed(cfg.seed, HashString(t.query)));
      t.category = static_cast<int>(rng.Below(cfg.num_categories));
      t.session_mean = std::max(
          cfg.sessions_min,
          cfg.sessions_max * std::pow(popularity[qi] + 1.0, -cfg.sessions_exponent));

      // Candidate set: mostly the query's category, the rest from anywhere.
      const auto& home = by_category[t.category];
      const int n_in = std::min<int>(
          static_cast<int>(std::lround(cfg.in_category_fraction * cfg.candidates_per_query)),
          static_cast<int>(home.size()));
      std::set<uint32_t> chosen;
      while (static_cast<int>(chosen.size()) < n_in) chosen.insert(home[rng.Below(home.size())]);
      while (static_cast<int>(chosen.size()) < cfg.candidates_per_query) {
        chosen.insert(static_cast<uint32_t>(rng.Below(cfg.num_items)));
      }
      const std::vector<uint32_t> cand(chosen.begin(), chosen.end());
      const size_t n = cand.size();
      for (uint32_t c : cand) t.items.push_back(item_ids[c]);

      std::vector<double> base(n);
      for (size_t j = 0; j < n; ++j) {
        const auto& l = latent[cand[j]];
        base[j] = rng.Normal() + (l.category == t.category ? 0.5 : -0.5) + l.quality;
      }
      t.relevance.assign(W, std::vector<double>(n));
      for (int w = 0; w < W; ++w) {
        for (size_t j = 0; j < n; ++j) {
          t.relevance[w][j] = base[j] + latent[cand[j]].slope * (w - (W - 1) / 2.0);
        }
      }
      t.channel_quality.resize(K);
      for (size_t c = 0; c < K; ++c) {
        const double q = 0.5 + cfg.channel_utility_concentration * (utility[t.category][c] - 0.5) +
                         0.05 * rng.Normal();
        t.channel_quality[c] = std::clamp(q, 0.0, 1.0);
      }
      std::vector<std::vector<double>> persistent(K, std::vector<double>(n));
      for (auto& row : persistent) {
        for (auto& e : row) e = rng.Normal();
      }

      const QueryId qid(t.query);
      out.lists.resize(W);
      uint32_t session_counter = 0;
      for (int w = 0; w < W; ++w) {
        const auto& rel = t.relevance[w];
        const double mean = std::accumulate(rel.begin(), rel.end(), 0.0) / n;
        double var = 0;
        for (double r : rel) var += (r - mean) * (r - mean);
        const double sd = std::sqrt(var / n) + 1e-12;

        std::unordered_map<std::string_view, uint32_t> local;
        for (size_t j = 0; j < n; ++j) local.emplace(t.items[j], static_cast<uint32_t>(j));
        for (size_t c = 0; c < K; ++c) {
          const double q = t.channel_quality[c];
          std::vector<std::pair<double, uint32_t>> scored(n);
          for (size_t j = 0; j < n; ++j) {
            const double noise =
                cfg.channel_noise_sd * (0.8 * persistent[c][j] + 0.6 * rng.Normal());
            scored[j] = {q * (rel[j] - mean) / sd + (1.0 - q) * noise, static_cast<uint32_t>(j)};
          }
          std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
          });
          const auto s = ChannelScale(c);
          std::vector<ScoredItem> entries;
          for (size_t r = 0; r < scored.size() && r < static_cast<size_t>(cfg.n_k); ++r) {
            entries.push_back({ItemId(t.items[scored[r].second]),
                               Round6(s.scale * scored[r].first + s.offset)});
          }
          out.lists[w].emplace_back(ChannelId{static_cast<int>(c), cfg.channel_names[c]}, qid,
                                    std::move(entries));
        }

        // Logged traffic: each session sees its own uniform interleaving of
        // the pool and examines positions with geometric decay.
        const auto weights = InterleaveWeights::Uniform(out.lists[w]);
        const int sessions = rng.Poisson(t.session_mean);
        for (int s = 0; s < sessions; ++s) {
          const uint32_t session = session_counter++;
          const auto shown = WeightedInterleave(out.lists[w], weights, rng.NextU64());
          int64_t ts = WeekStart(w) + static_cast<int64_t>(rng.Below(kWeekSeconds - 7200));
          double examine = 1.0;
          for (const auto& item : shown.items) {
            const uint32_t j = local.at(item.value());
            const double r = rel[j] - cfg.relevance_center;
            const bool seen = rng.NextDouble() < examine;
            examine *= cfg.position_bias;
            if (!seen) continue;
            ts += 1 + static_cast<int64_t>(rng.Below(8));
            out.events.push_back({ts, w, session, j, Action::kImpression});
            const double a = latent[cand[j]].attractiveness;
            if (!rng.Bernoulli(Sigmoid(click0 + cfg.click_relevance_slope * r +
                                       cfg.click_attractiveness_slope * a))) {
              continue;
            }
            ts += 1 + static_cast<int64_t>(rng.Below(8));
            out.events.push_back({ts, w, session, j, Action::kClick});
            if (!rng.Bernoulli(Sigmoid(atc0 + cfg.atc_relevance_slope * r))) continue;
            ts += 1 + static_cast<int64_t>(rng.Below(8));
            out.events.push_back({ts, w, session, j, Action::kAddToCart});
            if (!rng.Bernoulli(Sigmoid(purchase0 + cfg.purchase_relevance_slope * r))) continue;
            ts += 1 + static_cast<int64_t>(rng.Below(8));
            out.events.push_back({ts, w, session, j, Action::kPurchase});
          }
        }
      }
    }
  });

  // Sequential merge in query order keeps the output thread-count free.
  std::string session_name;
  for (auto& out : outputs) {
    for (const auto& e : out.events) {
      session_name = out.truth.query + ".w" + std::to_string(e.week) + ".s" +
                     std::to_string(e.session);
      world.log.Add(e.timestamp, e.week, session_name, out.truth.query,
                    out.truth.items[e.candidate], e.action);
    }
    out.events = {};
    for (int w = 0; w < W; ++w) {
      auto& dst = world.channels[w];
      for (auto& l : out.lists[w]) dst.push_back(std::move(l));
    }
    world.truth.queries.push_back(std::move(out.truth));
  }

  // Popularity tertiles stand in for head / torso / tail segments.
  std::vector<double> means;
  for (const auto& q : world.truth.queries) means.push_back(q.session_mean);
  std::sort(means.begin(), means.end(), std::greater<>());
  const size_t third = means.size() / 3;
  world.truth.segment_counts = {{"head", third},
                                {"torso", third},
                                {"tail", means.size() - 2 * third}};
  world.truth.Index();
  return world;
}

void WriteWorld(const std::string& dir, const World& world) {
  fs::create_directories(dir);
  const auto open = [&](const std::string& name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw Error("cannot write " + (fs::path(dir) / name).string());
    return out;
  };
  {
    auto out = open("events.tsv");
    WriteEventLog(out, world.log);
  }
  {
    auto out = open("catalog.tsv");
    WriteCatalog(out, world.catalog);
  }
  {
    auto out = open("channels.txt");
    for (const auto& n : world.channel_names) out << n << '\n';
  }
  for (const auto& [week, lists] : world.channels) {
    auto out = open("channels_w" + std::to_string(week) + ".tsv");
    WriteChannelLists(out, lists);
  }
  {
    auto out = open("relevance.tsv");
    for (const auto& q : world.truth.queries) {
      for (size_t w = 0; w < q.relevance.size(); ++w) {
        for (size_t j = 0; j < q.items.size(); ++j) {
          out << q.query << '\t' << q.items[j] << '\t' << w << '\t'
              << FormatDouble(q.relevance[w][j]) << '\n';
        }
      }
    }
  }
  {
    auto out = open("channel_quality.tsv");
    for (const auto& q : world.truth.queries) {
      for (size_t c = 0; c < q.channel_quality.size(); ++c) {
        out << q.query << '\t' << world.channel_names[c] << '\t'
            << FormatDouble(q.channel_quality[c]) << '\n';
      }
    }
  }
  const auto& c = world.config;
  nlohmann::json j;
  j["num_queries"] = c.num_queries;
  j["num_items"] = c.num_items;
  j["num_categories"] = c.num_categories;
  j["channels"] = c.channel_names;
  j["num_weeks"] = c.num_weeks;
  j["n_k"] = c.n_k;
  j["candidates_per_query"] = c.candidates_per_query;
  j["in_category_fraction"] = c.in_category_fraction;
  j["sessions"] = {{"max", c.sessions_max}, {"min", c.sessions_min},
                   {"exponent", c.sessions_exponent}};
  j["funnel"] = {{"click_rate", c.click_rate},
                 {"atc_rate", c.atc_rate},
                 {"purchase_rate", c.purchase_rate},
                 {"click_relevance_slope", c.click_relevance_slope},
                 {"click_attractiveness_slope", c.click_attractiveness_slope},
                 {"atc_relevance_slope", c.atc_relevance_slope},
                 {"purchase_relevance_slope", c.purchase_relevance_slope}};
  j["position_bias"] = {{"model", "geometric"}, {"decay", world.truth.position_bias}};
  j["channel_utility_concentration"] = c.channel_utility_concentration;
  j["trend_fraction"] = c.trend_fraction;
  j["trend_items"] = world.truth.trend_items.size();
  j["segments"] = world.truth.segment_counts;
  j["seed"] = c.seed;
  j["events"] = world.log.events.size();
  auto out = open("world.json");
  out << j.dump(2) << '\n';
}

WorldInputs LoadWorldInputs(const std::string& dir) {
  WorldInputs in;
  const fs::path root(dir);
  {
    std::ifstream names(root / "channels.txt");
    std::string line;
    while (names && std::getline(names, line)) {
      if (!line.empty()) in.channel_names.push_back(line);
    }
  }
  in.log = LoadEventLogFile((root / "events.tsv").string());
  in.catalog = LoadCatalogFile((root / "catalog.tsv").string());
  std::vector<std::pair<int, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("channels_w", 0) != 0 || entry.path().extension() != ".tsv") continue;
    const std::string digits = name.substr(10, name.size() - 14);
    files.emplace_back(static_cast<int>(ParseInt(digits)), entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidInputError("no channels_w<week>.tsv files in " + dir);
  for (const auto& [week, path] : files) {
    in.channels[week] = LoadChannelListFile(path.string(), in.channel_names);
  }
  return in;
}

SplitPlan FilterAndSplit(const EventLog& log, const ChannelListsByWeek& channels,
                         const FilterConfig& cfg) {
  if (channels.empty()) throw InvalidInputError("filter_and_split: no channel lists");
  const int num_weeks = channels.rbegin()->first + 1;
  if (num_weeks < 5) {
    throw InvalidInputError("filter_and_split: log spans " + std::to_string(num_weeks) +
                            " weeks, need at least 5");
  }
  // Per (query, week): max item impressions and total purchases.
  const auto qw = [](uint64_t q, int w) { return (q << 16) | static_cast<uint64_t>(w); };
  std::unordered_map<uint64_t, int64_t> impressions;  // (query, item, week)
  std::unordered_map<uint64_t, int64_t> max_impressions, purchases;
  for (const auto& e : log.events) {
    if (e.action == Action::kImpression) {
      const uint64_t key = (static_cast<uint64_t>(e.query) << 40) |
                           (static_cast<uint64_t>(e.item) << 16) | static_cast<uint64_t>(e.week);
      const int64_t c = ++impressions[key];
      auto& mx = max_impressions[qw(e.query, e.week)];
      mx = std::max(mx, c);
    } else if (e.action == Action::kPurchase) {
      ++purchases[qw(e.query, e.week)];
    }
  }

  SplitPlan plan;
  plan.test_week = num_weeks - 1;
  plan.valid_week = num_weeks - 2;
  plan.train_end_week = num_weeks - 2;
  for (const auto& g : DatasetBuilder::AllGroups(channels)) {
    ++plan.stats.groups_total;
    const auto q = log.queries.Find(g.query);
    int64_t imp = 0, pur = 0;
    if (q) {
      const auto a = max_impressions.find(qw(*q, g.week));
      const auto b = purchases.find(qw(*q, g.week));
      imp = a == max_impressions.end() ? 0 : a->second;
      pur = b == purchases.end() ? 0 : b->second;
    }
    if (imp < cfg.min_impressions) {
      ++plan.stats.dropped_impressions;
      continue;
    }
    if (pur < cfg.min_purchases) {
      ++plan.stats.dropped_purchases;
      continue;
    }
    ++plan.stats.groups_kept;
    ++plan.stats.kept_per_week[g.week];
    if (g.week == plan.test_week) {
      plan.test.push_back(g);
    } else if (g.week == plan.valid_week) {
      plan.valid.push_back(g);
    } else {
      plan.train.push_back(g);
    }
  }
  const auto check = [&](const std::vector<GroupKey>& part, const char* name) {
    if (part.empty()) {
      throw InvalidInputError(std::string("filter_and_split: empty ") + name +
                              " partition (" + std::to_string(plan.stats.groups_kept) + " of " +
                              std::to_string(plan.stats.groups_total) + " groups kept, " +
                              std::to_string(plan.stats.dropped_impressions) +
                              " below the impression threshold, " +
                              std::to_string(plan.stats.dropped_purchases) +
                              " without purchases)");
    }
  };
  check(plan.train, "train");
  check(plan.valid, "validation");
  check(plan.test, "test");
  return plan;
}

PipelineOutput BuildSplits(const EventLog& log, const Catalog& catalog,
                           const std::vector<std::string>& channel_names,
                           const ChannelListsByWeek& channels, const PipelineConfig& cfg) {
  PipelineOutput out;
  out.plan = FilterAndSplit(log, channels, cfg.filter);
  out.calibration_stats = ComputeCorpusStats(log, 0, out.plan.train_end_week);
  const LabelWeights w = CalibrateWeights(out.calibration_stats);
  out.splits.conversion_weights = w;

  DatasetBuildConfig bc;
  bc.truncation = cfg.truncation;
  bc.lookback = cfg.lookback;
  bc.label_weights = w;
  bc.engagement_weights = w;
  bc.num_threads = cfg.num_threads;
  const DatasetBuilder builder(log, catalog, channel_names, bc);
  out.splits.train = builder.Build(channels, out.plan.train);
  out.splits.valid = builder.Build(channels, out.plan.valid);
  out.splits.test = builder.Build(channels, out.plan.test);
  return out;
}

}  // namespace mcrank
