// Acceptance suite: every criterion prints one [PASS]/[FAIL] line and the
// binary exits non-zero when anything fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ses/cli.hpp"
#include "ses/eval.hpp"
#include "ses/features.hpp"
#include "ses/homeloc.hpp"
#include "ses/learn.hpp"
#include "ses/occupation.hpp"
#include "ses/semantics.hpp"
#include "ses/util/rng.hpp"
#include "ses/util/text.hpp"

namespace fs = std::filesystem;
using namespace ses;
using json = nlohmann::ordered_json;

namespace {

struct Check {
  int id;
  std::string name;
  std::function<bool(std::string&)> fn;
};

bool expect(bool ok, const std::string& what, std::string& detail) {
  if (!ok && detail.empty()) detail = what;
  return ok;
}

// ---------- shared helpers ----------

json acceptance_config(const std::string& workspace, double signal, std::uint64_t seed) {
  json j = cli::default_config();
  j["workspace"] = workspace;
  j["seed"] = seed;
  j["track"] = "annotated";
  j["inputs"]["tweets"] = workspace + "/synth/tweets.jsonl";
  j["inputs"]["profiles"] = workspace + "/synth/profiles.tsv";
  j["inputs"]["annotated"] = workspace + "/synth/annotated.tsv";
  j["inputs"]["truth"] = workspace + "/synth/truth.tsv";
  j["synth"]["n_users"] = 2000;
  j["synth"]["signal_strength"] = signal;
  j["synth"]["tweets_min"] = 18;
  j["synth"]["tweets_max"] = 28;
  j["synth"]["geo_points_min"] = 8;
  j["synth"]["geo_points_max"] = 12;
  j["synth"]["bot_fraction"] = 0.0;
  j["embedding"]["dim"] = 50;
  j["embedding"]["window"] = 3;
  j["embedding"]["negatives"] = 5;
  j["embedding"]["epochs"] = 2;
  j["embedding"]["min_count"] = 5;
  j["topics"]["k"] = 100;
  j["topics"]["kmeans_restarts"] = 6;
  j["features"]["unigrams"] = 450;
  j["features"]["bigrams"] = 560;
  j["cv"]["outer_folds"] = 5;
  j["cv"]["inner_folds"] = 5;
  j["cv"]["inner_repetitions"] = 2;
  j["cv"]["configs"] = 20;
  j["cv"]["families"] = json::array({"gbt"});
  j["grid"]["gbt_rounds_min"] = 15;
  j["grid"]["gbt_rounds_max"] = 40;
  j["grid"]["gbt_depth_min"] = 2;
  j["grid"]["gbt_depth_max"] = 4;
  j["grid"]["gbt_eta_min"] = 0.05;
  j["grid"]["gbt_eta_max"] = 0.3;
  j["grid"]["gbt_colsample_min"] = 0.1;
  j["grid"]["gbt_colsample_max"] = 0.4;
  j["grid"]["gbt_subsample_min"] = 0.7;
  return j;
}

double pipeline_auc(const json& config_json, std::string& detail) {
  const cli::PipelineConfig config = cli::config_from_json(config_json);
  std::ostringstream log;
  for (const std::string stage :
       {"synth", "preprocess", "embed", "topics", "features", "train", "evaluate"}) {
    if (cli::run_checked(stage, config, log) != 0) {
      detail = "stage " + stage + " failed: " + log.str();
      return -1.0;
    }
  }
  const auto report = learn::load_cv_report(config.artifact("cv_gbt.json"));
  return report.mean_auc;
}

struct PlantedTrace {
  homeloc::MobilityTrace trace;
  corpus::LatLon home;
  std::string kind;  // "human", "speed", "burst"
};

PlantedTrace plant_trace(Rng& rng, std::size_t idx, const std::string& kind) {
  PlantedTrace u;
  u.kind = kind;
  const double home_lat = std::round(rng.uniform(48.0, 48.9) * 1e4) / 1e4;
  const double home_lon = std::round(rng.uniform(2.0, 2.9) * 1e4) / 1e4;
  u.home = {home_lat, home_lon};
  const double work_lat = home_lat + rng.uniform(0.02, 0.09);
  const double work_lon = home_lon + rng.uniform(0.02, 0.09);
  const std::size_t n = 14 + rng.uniform_int(std::uint64_t{10});
  const std::size_t n_home = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(n)));
  std::vector<homeloc::TracePoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    homeloc::TracePoint p;
    const std::int64_t day = static_cast<std::int64_t>(i) * 2;
    if (i < n_home) {
      const int hour_utc = (21 + static_cast<int>(rng.uniform_int(std::uint64_t{8}))) % 24;
      p.timestamp = day * 86400 + hour_utc * 3600 + 1 +
                    static_cast<std::int64_t>(rng.uniform_int(std::uint64_t{3600}));
      p.lat = home_lat + rng.uniform(-4e-5, 4e-5);
      p.lon = home_lon + rng.uniform(-4e-5, 4e-5);
    } else {
      p.timestamp = day * 86400 + (11 + static_cast<int>(rng.uniform_int(std::uint64_t{6}))) * 3600 + 1;
      if (rng.uniform() < 0.7) {
        p.lat = work_lat + rng.uniform(-4e-5, 4e-5);
        p.lon = work_lon + rng.uniform(-4e-5, 4e-5);
      } else {
        p.lat = home_lat + rng.uniform(-0.03, 0.03);
        p.lon = home_lon + rng.uniform(-0.03, 0.03);
      }
    }
    pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end(), [](const homeloc::TracePoint& a, const homeloc::TracePoint& b) {
    return a.timestamp < b.timestamp;
  });
  if (kind == "speed") {
    homeloc::TracePoint tele = pts[pts.size() / 2];
    tele.timestamp += 900;
    tele.lat += 3.5;  // ~390 km in 15 minutes
    pts.push_back(tele);
    std::sort(pts.begin(), pts.end(), [](const homeloc::TracePoint& a, const homeloc::TracePoint& b) {
      return a.timestamp < b.timestamp;
    });
  } else if (kind == "burst") {
    const homeloc::TracePoint dup = pts[2];
    for (int k = 0; k < 3; ++k) pts.push_back(dup);
    std::sort(pts.begin(), pts.end(), [](const homeloc::TracePoint& a, const homeloc::TracePoint& b) {
      return a.timestamp < b.timestamp;
    });
  }
  u.trace.user_id = "t" + std::to_string(idx);
  u.trace.points = std::move(pts);
  return u;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ca[a[i]] += 1;
    cb[b[i]] += 1;
  }
  auto comb2 = [](double n) { return n * (n - 1) / 2.0; };
  double sj = 0, sa = 0, sb = 0;
  for (const auto& [_, n] : joint) sj += comb2(n);
  for (const auto& [_, n] : ca) sa += comb2(n);
  for (const auto& [_, n] : cb) sb += comb2(n);
  const double total = comb2(static_cast<double>(a.size()));
  const double expected = sa * sb / total;
  const double max_index = (sa + sb) / 2.0;
  if (max_index == expected) return 1.0;
  return (sj - expected) / (max_index - expected);
}

Mat block_similarity(const std::vector<std::size_t>& block_sizes, double noise, Rng* rng) {
  std::size_t v = 0;
  for (const std::size_t s : block_sizes) v += s;
  Mat m(v, v);
  std::vector<int> block_of(v);
  std::size_t start = 0;
  int b = 0;
  for (const std::size_t s : block_sizes) {
    for (std::size_t i = start; i < start + s; ++i) block_of[i] = b;
    start += s;
    ++b;
  }
  for (std::size_t i = 0; i < v; ++i) {
    m.at(i, i) = 1.0;
    for (std::size_t j = i + 1; j < v; ++j) {
      double val = block_of[i] == block_of[j] ? 0.8 : 0.0;
      if (rng != nullptr)
        val = block_of[i] == block_of[j] ? 0.8 - noise * rng->uniform() : noise * 0.5 * rng->uniform();
      m.at(i, j) = val;
      m.at(j, i) = val;
    }
  }
  return m;
}

learn::Dataset planted_dataset(std::size_t n, std::size_t p, double noise, std::uint64_t seed) {
  Rng rng(seed);
  learn::Dataset d;
  d.x = Mat(n, p);
  std::vector<double> w(p, 0.0);
  for (std::size_t f = 0; f < std::min<std::size_t>(4, p); ++f) w[f] = rng.uniform(0.8, 1.6);
  for (std::size_t i = 0; i < n; ++i) {
    double score = 0.0;
    for (std::size_t f = 0; f < p; ++f) {
      d.x.at(i, f) = rng.uniform(-1.0, 1.0);
      score += w[f] * d.x.at(i, f);
    }
    d.y.push_back(score + noise * rng.normal() > 0.0 ? 1 : 0);
    d.user_ids.push_back("u" + std::to_string(i));
  }
  d.y[0] = 0;
  d.y[1] = 1;
  return d;
}

// ---------- criteria ----------

bool criterion_1(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string ws = (fs::temp_directory_path() / "ses_acc_c1").string();
  fs::remove_all(ws);
  fs::remove_all(ws + "_null");
  const double strong = pipeline_auc(acceptance_config(ws, 1.0, 20250101), detail);
  if (strong < 0) return false;
  const double null_auc = pipeline_auc(acceptance_config(ws + "_null", 0.0, 20250102), detail);
  if (null_auc < 0) return false;
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream ss;
  ss << "strong-signal AUC " << fmt_double(strong, 4) << ", null-signal AUC "
     << fmt_double(null_auc, 4) << ", " << fmt_double(seconds, 4) << " s";
  detail = ss.str();
  return strong >= 0.85 && null_auc >= 0.45 && null_auc <= 0.55 && seconds <= 600.0;
}

bool criterion_2(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  // census grid covering the planted home area, for the eligibility rules
  std::vector<census::CensusCell> cells;
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) {
      census::CensusCell cell;
      char id[32];
      std::snprintf(id, sizeof(id), "a%02d_%02d", r, c);
      cell.cell_id = id;
      const double la = 47.9 + r * 0.12, lo = 1.9 + c * 0.12;
      cell.rings = {{{la, lo}, {la, lo + 0.12}, {la + 0.12, lo + 0.12}, {la + 0.12, lo}}};
      for (int d = 0; d < 9; ++d) cell.deciles[static_cast<std::size_t>(d)] = 1000.0 * (d + 1);
      cells.push_back(cell);
    }
  const census::CensusIndex index(std::move(cells));

  Rng rng(224);
  std::size_t humans = 0, recovered = 0, bots = 0, bots_right = 0, ineligible = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const std::string kind = i % 10 == 7 ? "speed" : (i % 10 == 8 ? "burst" : "human");
    const PlantedTrace u = plant_trace(rng, i, kind);
    if (homeloc::eligibility_filter(u.trace, index) != homeloc::FilterStatus::ok) {
      ++ineligible;  // planted traces are constructed to be eligible
      continue;
    }
    const homeloc::FilterStatus status = homeloc::mobility_filter(u.trace);
    if (kind == "human") {
      ++humans;
      if (status != homeloc::FilterStatus::ok) continue;
      const auto h = homeloc::infer_home(u.trace);
      if (std::llround(h.home.lat * 1e4) == std::llround(u.home.lat * 1e4) &&
          std::llround(h.home.lon * 1e4) == std::llround(u.home.lon * 1e4))
        ++recovered;
    } else {
      ++bots;
      const auto want = kind == "speed" ? homeloc::FilterStatus::speed : homeloc::FilterStatus::burst;
      if (status == want) ++bots_right;
    }
  }
  if (ineligible != 0) {
    detail = std::to_string(ineligible) + " planted traces unexpectedly failed eligibility";
    return false;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream ss;
  ss << recovered << "/" << humans << " homes exact, " << bots_right << "/" << bots
     << " bots rejected with the right reason, " << fmt_double(seconds, 3) << " s";
  detail = ss.str();
  return static_cast<double>(recovered) / static_cast<double>(humans) >= 0.95 &&
         bots_right == bots && seconds <= 30.0;
}

bool criterion_3(std::string& detail) {
  Rng rng(33);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 10 + rng.uniform_int(std::uint64_t{491});
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_int(std::uint64_t{25})) / 24.0;  // ties guaranteed
      y[i] = rng.uniform() < 0.45 ? 1 : 0;
    }
    y[0] = 0;
    y[1] = 1;
    double num = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] != 1) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (y[j] != 0) continue;
        pairs += 1;
        if (s[i] > s[j]) num += 1;
        else if (s[i] == s[j]) num += 0.5;
      }
    }
    worst = std::max(worst, std::abs(eval::auc(s, y) - num / pairs));
  }
  detail = "max |rank AUC - pair oracle| = " + fmt_double(worst, 3);
  return worst < 1e-12;
}

bool criterion_4(std::string& detail) {
  if (!expect(std::abs(census::gini({5, 5, 5, 5})) < 1e-12, "equal incomes", detail)) return false;
  for (const std::size_t n : {3ul, 10ul, 41ul}) {
    std::vector<double> x(n, 1e-12);
    x[0] = 100.0;
    const double expected = static_cast<double>(n - 1) / static_cast<double>(n);
    if (!expect(std::abs(census::gini(x) - expected) < 1e-9, "single holder", detail)) return false;
  }
  Rng rng(44);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(5 + rng.uniform_int(std::uint64_t{300}));
    for (auto& v : x) v = std::exp(rng.normal(9.8, 0.9));
    const double g = census::gini(x);
    double sum = 0, total = 0;
    for (const double a : x) total += a;
    for (const double a : x)
      for (const double b : x) sum += std::abs(a - b);
    const double mad = sum / (2.0 * static_cast<double>(x.size()) * static_cast<double>(x.size()) *
                              (total / static_cast<double>(x.size())));
    worst = std::max(worst, std::abs(g - mad));
    for (const double c : {0.5, 3.0, 100.0}) {
      std::vector<double> scaled(x);
      for (auto& v : scaled) v *= c;
      worst = std::max(worst, std::abs(census::gini(scaled) - g));
    }
  }
  detail = "max deviation vs mean-absolute-difference oracle and scaling: " + fmt_double(worst, 3);
  return worst < 1e-9;
}

bool criterion_5(std::string& detail) {
  Rng rng(55);
  const std::size_t d = 50;
  const double eps = 1e-5;
  // component scale 1/sqrt(d) keeps dot products O(1); saturated sigmoids
  // would push the true gradient below finite-difference resolution
  const double comp = 1.0 / std::sqrt(static_cast<double>(d));
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> center(d), context(d);
    std::vector<std::vector<double>> negs(5, std::vector<double>(d));
    for (auto& v : center) v = rng.normal() * comp;
    for (auto& v : context) v = rng.normal() * comp;
    for (auto& nvec : negs)
      for (auto& v : nvec) v = rng.normal() * comp;
    const auto grad = semantics::sgns_pair_grad(center, context, negs);
    auto probe = [&](std::vector<double>& vec, double analytic, std::size_t i) {
      const double keep = vec[i];
      vec[i] = keep + eps;
      const double up = semantics::sgns_pair_loss(center, context, negs);
      vec[i] = keep - eps;
      const double dn = semantics::sgns_pair_loss(center, context, negs);
      vec[i] = keep;
      const double fd = (up - dn) / (2 * eps);
      const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-6});
      worst = std::max(worst, std::abs(fd - analytic) / scale);
    };
    // probe a third of the coordinates per tensor to keep the runtime modest
    for (std::size_t i = 0; i < d; i += 3) {
      probe(center, grad.d_center[i], i);
      probe(context, grad.d_context[i], i);
      for (std::size_t k = 0; k < negs.size(); ++k) probe(negs[k], grad.d_negatives[k][i], i);
    }
  }
  detail = "max relative error vs central differences: " + fmt_double(worst, 3);
  return worst < 1e-4;
}

bool criterion_6(std::string& detail) {
  for (const std::size_t k : {2ul, 5ul, 10ul}) {
    std::vector<std::size_t> sizes(k, 6);
    const Mat m = block_similarity(sizes, 0.0, nullptr);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < m.rows; ++i) words.push_back("w" + std::to_string(i));
    semantics::SpectralParams params;
    params.k = k;
    params.seed = 66;
    params.kmeans_restarts = 10;
    const auto model = semantics::spectral_cluster(m, words, params);
    std::vector<int> planted(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) planted[i] = static_cast<int>(i / 6);
    if (!expect(ari(planted, model.topic_of_word) == 1.0, "noiseless block recovery K=" + std::to_string(k),
                detail))
      return false;
  }
  double worst_ari = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 600);
    const Mat m = block_similarity({8, 8, 8, 8, 8}, 0.25, &rng);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < m.rows; ++i) words.push_back("w" + std::to_string(i));
    semantics::SpectralParams params;
    params.k = 5;
    params.seed = seed;
    params.kmeans_restarts = 20;
    const auto model = semantics::spectral_cluster(m, words, params);
    std::vector<int> planted(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) planted[i] = static_cast<int>(i / 8);
    worst_ari = std::min(worst_ari, ari(planted, model.topic_of_word));
  }
  if (!expect(worst_ari >= 0.99, "noisy 5-block ARI " + fmt_double(worst_ari, 4), detail)) return false;
  for (const std::size_t components : {1ul, 2ul, 3ul, 4ul}) {
    std::vector<std::size_t> sizes(components, 5);
    const auto ev = semantics::laplacian_eigenvalues(block_similarity(sizes, 0.0, nullptr));
    std::size_t zeros = 0;
    for (const double v : ev)
      if (std::abs(v) < 1e-8) ++zeros;
    if (!expect(zeros == components,
                "zero-eigenvalue multiplicity " + std::to_string(zeros) + " for " +
                    std::to_string(components) + " components",
                detail))
      return false;
  }
  detail = "block recovery exact, noisy ARI >= " + fmt_double(worst_ari, 4) +
           ", eigenvalue multiplicities match";
  return true;
}

bool criterion_7(std::string& detail) {
  const learn::Dataset d = planted_dataset(300, 15, 0.4, 77);
  learn::GBTParams params;
  params.rounds = 50;
  params.max_depth = 4;
  params.eta = 0.2;
  params.lambda = 1.7;
  const auto model = learn::train_gbt(d, params, 7);
  const double base_margin = std::log(params.base_score / (1.0 - params.base_score));
  std::vector<double> margin(d.size(), base_margin);
  double worst = 0.0;
  for (const auto& tree : model.trees) {
    std::map<int, std::pair<double, double>> gh;
    for (std::size_t i = 0; i < d.size(); ++i) {
      int node = 0;
      while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
        node = d.x.at(i, static_cast<std::size_t>(nd.feature)) < nd.threshold ? nd.left : nd.right;
      }
      const double p = 1.0 / (1.0 + std::exp(-margin[i]));
      gh[node].first += p - static_cast<double>(d.y[i]);
      gh[node].second += std::max(1e-16, p * (1.0 - p));
    }
    for (const auto& [leaf, sums] : gh) {
      const double expected = -sums.first / (sums.second + params.lambda);
      const double got = tree.nodes[static_cast<std::size_t>(leaf)].value;
      worst = std::max(worst, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
      int node = 0;
      while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
        node = d.x.at(i, static_cast<std::size_t>(nd.feature)) < nd.threshold ? nd.left : nd.right;
      }
      margin[i] += params.eta * tree.nodes[static_cast<std::size_t>(node)].value;
    }
  }
  if (!expect(worst < 1e-9, "leaf identity deviation " + fmt_double(worst, 3), detail)) return false;

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const learn::Dataset data = planted_dataset(150, 10, 0.8, seed * 13);
    learn::GBTParams p2;
    p2.rounds = 40;
    p2.max_depth = 3;
    p2.eta = 0.1;
    const auto m2 = learn::train_gbt(data, p2, seed);
    for (std::size_t r = 1; r < m2.train_logloss.size(); ++r) {
      if (!expect(m2.train_logloss[r] <= m2.train_logloss[r - 1] + 1e-12,
                  "log-loss increased at round " + std::to_string(r), detail))
        return false;
    }
  }
  detail = "leaf identity max deviation " + fmt_double(worst, 3) +
           "; log-loss monotone on 5 datasets";
  return true;
}

bool criterion_8(std::string& detail) {
  const learn::Dataset d = planted_dataset(150, 6, 0.3, 88);
  learn::CVPlan plan;
  plan.outer_folds = 5;
  plan.inner_folds = 5;
  plan.inner_repetitions = 10;  // 50 inner AUC samples per config
  plan.configs = 3;
  plan.seed = 8;
  plan.space.gbt_rounds_min = 8;
  plan.space.gbt_rounds_max = 12;
  plan.space.gbt_depth_min = 2;
  plan.space.gbt_depth_max = 2;
  const auto report = learn::nested_cv(d, learn::Family::gbt, plan);
  double global_pos = 0;
  for (const int y : d.y) global_pos += y;
  for (const auto& fold : report.folds) {
    for (const std::size_t samples : fold.config_auc_samples)
      if (!expect(samples == 50, "inner AUC samples = " + std::to_string(samples), detail))
        return false;
    std::set<std::uint32_t> train_set(fold.train_rows.begin(), fold.train_rows.end());
    for (const std::uint32_t r : fold.test_rows)
      if (!expect(train_set.count(r) == 0, "outer-test row leaked into inner splits", detail))
        return false;
    if (!expect(fold.inner_partitions.size() == plan.inner_repetitions, "partition count", detail))
      return false;
    for (const auto& part : fold.inner_partitions) {
      if (!expect(part.size() == fold.train_rows.size(), "partition length", detail)) return false;
      // inner fold class counts within one of each other
      std::vector<double> pos(plan.inner_folds, 0), tot(plan.inner_folds, 0);
      for (std::size_t i = 0; i < part.size(); ++i) {
        tot[part[i]] += 1;
        pos[part[i]] += d.y[fold.train_rows[i]];
      }
      for (std::size_t f = 0; f < plan.inner_folds; ++f) {
        for (std::size_t g = 0; g < plan.inner_folds; ++g) {
          if (!expect(std::abs(pos[f] - pos[g]) <= 1.0, "inner stratification", detail)) return false;
        }
      }
    }
    const double expected = global_pos * static_cast<double>(fold.test_rows.size()) /
                            static_cast<double>(d.size());
    double pos = 0;
    for (const std::uint32_t r : fold.test_rows) pos += d.y[r];
    if (!expect(std::abs(pos - expected) <= 1.0, "outer stratification", detail)) return false;
  }
  if (!expect(report.total_inner_fits == 5 * 3 * 50, "total inner fits", detail)) return false;
  detail = "exactly 50 inner AUC samples per config, no leakage, folds stratified within one";
  return true;
}

bool criterion_9(std::string& detail) {
  const std::string fixture = std::string(SES_SOURCE_DIR) + "/data/fixture";
  corpus::ParseStats stats;
  const auto tweets = corpus::parse_stream_file(fixture + "/tweets.jsonl", stats);
  const auto profiles = corpus::parse_profiles_file(fixture + "/profiles.tsv", stats);
  const auto timelines = corpus::build_timelines(tweets, profiles);
  if (!expect(!timelines.empty(), "fixture parse", detail)) return false;
  std::vector<features::UserDocument> docs;
  for (const auto& [_, tl] : timelines) docs.push_back(features::build_document(tl));
  const auto sel = features::select_ngrams(docs, 450, 560);
  const auto schema = features::build_schema(sel, 100);
  const auto schema2 = features::build_schema(features::select_ngrams(docs, 450, 560), 100);
  const auto& first = timelines.begin()->second;
  const auto fv = features::assemble(first, docs[0], schema, std::vector<double>(100, 0.0),
                                     schema.version_hash);
  std::ostringstream ss;
  ss << "schema length " << schema.size() << " = 7+" << schema.n_unigrams << "+" << schema.n_bigrams
     << "+" << schema.n_topics << ", hash " << schema.version_hash;
  detail = ss.str();
  return schema.size() == 1117 && fv.values.size() == 1117 &&
         schema.version_hash == schema2.version_hash && schema.n_unigrams == 450 &&
         schema.n_bigrams == 560 && schema.n_topics == 100;
}

bool criterion_10(std::string& detail) {
  Rng rng(110);
  // 500 random pairs vs the full DP table
  for (int trial = 0; trial < 500; ++trial) {
    std::string a, b;
    const std::size_t la = rng.uniform_int(std::uint64_t{15});
    const std::size_t lb = rng.uniform_int(std::uint64_t{15});
    for (std::size_t i = 0; i < la; ++i) a += static_cast<char>('a' + rng.uniform_int(std::uint64_t{8}));
    for (std::size_t i = 0; i < lb; ++i) b += static_cast<char>('a' + rng.uniform_int(std::uint64_t{8}));
    std::vector<std::vector<std::size_t>> dp(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) dp[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) dp[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
      for (std::size_t j = 1; j <= b.size(); ++j)
        dp[i][j] = std::min({dp[i - 1][j] + 1, dp[i][j - 1] + 1,
                             dp[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    const double expected =
        (a.empty() && b.empty())
            ? 1.0
            : 1.0 - static_cast<double>(dp[a.size()][b.size()]) /
                        static_cast<double>(std::max(a.size(), b.size()));
    if (!expect(occupation::seq_similarity(a, b) == expected, "dp oracle mismatch", detail))
      return false;
  }

  // 50 noisy titles with exactly-k substitutions from a disjoint alphabet
  occupation::SalaryTable table;
  table.entries = {{"n1", "abcdefghij", {}, 10000},
                   {"n2", "klmnopqrstuv", {}, 20000},
                   {"n3", "wxyzabcdwxyzabcdwxyz", {}, 30000}};
  std::set<std::string> set90, set95;
  int analytic_mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto& entry = table.entries[rng.uniform_int(std::uint64_t{3})];
    const std::size_t L = entry.canonical_title.size();
    const std::size_t k = rng.uniform_int(std::uint64_t{4});
    std::string noisy = entry.canonical_title;
    std::set<std::size_t> positions;
    while (positions.size() < k) positions.insert(rng.uniform_int(std::uint64_t{L}));
    int digit = 0;
    for (const std::size_t pos : positions) noisy[pos] = static_cast<char>('0' + (digit++ % 10));
    const double sim = 1.0 - static_cast<double>(k) / static_cast<double>(L);
    const std::string user = "u" + std::to_string(trial);
    const auto at90 = occupation::match_title(user, noisy, table, 0.90);
    const auto at95 = occupation::match_title(user, noisy, table, 0.95);
    if (at90.occupation_id.has_value() != (sim >= 0.90)) ++analytic_mismatches;
    if (at95.occupation_id.has_value() != (sim >= 0.95)) ++analytic_mismatches;
    if (at90.occupation_id) set90.insert(user);
    if (at95.occupation_id) set95.insert(user);
  }
  const bool monotone = std::includes(set90.begin(), set90.end(), set95.begin(), set95.end());
  detail = "dp oracle exact on 500 pairs; analytic mismatches " +
           std::to_string(analytic_mismatches) + "; matched@0.95 subset of matched@0.90: " +
           (monotone ? "yes" : "no");
  return analytic_mismatches == 0 && monotone;
}

bool criterion_11(std::string& detail) {
  std::vector<census::CensusCell> cells;
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 25; ++c) {
      census::CensusCell cell;
      char id[32];
      std::snprintf(id, sizeof(id), "g%02d_%02d", r, c);
      cell.cell_id = id;
      const double la = 48.0 + r * 0.05, lo = 2.0 + c * 0.05;
      cell.rings = {{{la, lo}, {la, lo + 0.05}, {la + 0.05, lo + 0.05}, {la + 0.05, lo}}};
      for (int d = 0; d < 9; ++d) cell.deciles[static_cast<std::size_t>(d)] = 1000.0 * (d + 1);
      cells.push_back(cell);
    }
  std::sort(cells.begin(), cells.end(),
            [](const census::CensusCell& a, const census::CensusCell& b) {
              return a.cell_id < b.cell_id;
            });
  const census::CensusIndex index(cells);
  if (!expect(index.size() == 500, "grid size", detail)) return false;
  Rng rng(111);
  for (int i = 0; i < 10000; ++i) {
    const corpus::LatLon p{rng.uniform(47.8, 49.2), rng.uniform(1.8, 3.5)};
    std::optional<std::string> oracle;
    for (const auto& cell : cells) {
      if (census::cell_contains(cell, p)) {
        oracle = cell.cell_id;
        break;
      }
    }
    if (index.locate(p) != oracle) {
      detail = "locate mismatch at " + fmt_double(p.lat, 10) + "," + fmt_double(p.lon, 10);
      return false;
    }
  }
  // deterministic shared-edge resolution
  bool boundary_ok = index.locate({48.025, 2.05}) == std::string("g00_00") &&
                     index.locate({48.05, 2.025}) == std::string("g00_00") &&
                     index.locate({48.05, 2.05}) == std::string("g00_00");
  if (!expect(boundary_ok, "shared-edge winner must be the smallest cell_id", detail)) return false;
  detail = "10000 random points agree with the exhaustive scan; boundary ties deterministic";
  return true;
}

bool criterion_12(std::string& detail) {
  const std::string base = (fs::temp_directory_path() / "ses_acc_c12").string();
  fs::remove_all(base);
  for (const std::string run : {"r1", "r2"}) {
    const std::string root = base + "/" + run;
    fs::create_directories(root);
    const fs::path old = fs::current_path();
    fs::current_path(root);
    json config = acceptance_config("work", 1.0, 777);
    config["synth"]["n_users"] = 150;
    config["cv"]["configs"] = 2;
    config["cv"]["inner_repetitions"] = 1;
    config["topics"]["k"] = 20;
    config["embedding"]["dim"] = 16;
    config["embedding"]["epochs"] = 2;
    config["features"]["unigrams"] = 80;
    config["features"]["bigrams"] = 60;
    config["inputs"]["cells"] = "work/synth/cells.txt";
    config["inputs"]["home_patterns"] = "work/synth/home_patterns.txt";
    const cli::PipelineConfig pc = cli::config_from_json(config);
    std::ostringstream log;
    for (const std::string stage : {"synth", "preprocess", "homes", "census-join", "embed",
                                    "topics", "features", "train", "evaluate", "report"}) {
      if (cli::run_checked(stage, pc, log) != 0) {
        fs::current_path(old);
        detail = "stage " + stage + " failed in " + run + ": " + log.str();
        return false;
      }
    }
    fs::current_path(old);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(base + "/r1/work")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), base + "/r1/work");
    const fs::path other = fs::path(base) / "r2" / "work" / rel;
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
      detail = "artifact differs between runs: " + rel.string();
      return false;
    }
    ++compared;
  }
  detail = std::to_string(compared) + " artifacts byte-identical across reruns";
  return compared >= 15;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Check> checks = {
      {1, "planted-signal end-to-end AUC and null-signal control", criterion_1},
      {2, "home inference recovery and bot rejection", criterion_2},
      {3, "rank AUC equals the pair-counting oracle", criterion_3},
      {4, "gini/lorenz closed forms, oracle and scale invariance", criterion_4},
      {5, "skip-gram analytic gradients vs finite differences", criterion_5},
      {6, "spectral clustering block recovery and eigenvalue multiplicity", criterion_6},
      {7, "gbt leaf-weight identity and monotone training loss", criterion_7},
      {8, "nested cv bookkeeping, leakage and stratification", criterion_8},
      {9, "feature schema length 1117 and stable hash", criterion_9},
      {10, "occupation matching oracle and threshold monotonicity", criterion_10},
      {11, "point-in-polygon agreement and boundary determinism", criterion_11},
      {12, "byte-identical pipeline reruns", criterion_12},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failures = 0;
  for (const auto& check : checks) {
    if (only != 0 && check.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = check.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", check.id, check.name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures == 0) std::printf("all criteria passed\n");
  else std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
