#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ses/learn.hpp"

namespace ses::learn {

namespace {

using json = nlohmann::ordered_json;

json node_to_json(const Tree& tree, int i) {
  const TreeNode& nd = tree.nodes[static_cast<std::size_t>(i)];
  if (nd.feature < 0) return json{{"leaf", nd.value}};
  return json{{"feature", nd.feature},
              {"threshold", nd.threshold},
              {"left", node_to_json(tree, nd.left)},
              {"right", node_to_json(tree, nd.right)}};
}

int node_from_json(const json& j, Tree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back({});
  if (j.contains("leaf")) {
    tree.nodes[static_cast<std::size_t>(id)].value = j.at("leaf").get<double>();
    return id;
  }
  tree.nodes[static_cast<std::size_t>(id)].feature = j.at("feature").get<int>();
  tree.nodes[static_cast<std::size_t>(id)].threshold = j.at("threshold").get<double>();
  const int left = node_from_json(j.at("left"), tree);
  const int right = node_from_json(j.at("right"), tree);
  tree.nodes[static_cast<std::size_t>(id)].left = left;
  tree.nodes[static_cast<std::size_t>(id)].right = right;
  return id;
}

json tree_to_json(const Tree& tree) { return node_to_json(tree, 0); }

Tree tree_from_json(const json& j) {
  Tree t;
  node_from_json(j, t);
  return t;
}

json hp_to_json(const HyperParams& hp) {
  json j = json::object();
  for (const auto& [k, v] : hp) j[k] = v;
  return j;
}

HyperParams hp_from_json(const json& j) {
  HyperParams hp;
  for (const auto& [k, v] : j.items()) hp[k] = v.get<double>();
  return hp;
}

}  // namespace

void save_classifier(const Classifier& c, const std::string& path, const std::string& config_hash,
                     std::uint64_t seed) {
  json j;
  j["format"] = "ses-model-v1";
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["family"] = family_name(c.family);
  switch (c.family) {
    case Family::gbt: {
      const GBTModel& m = *c.gbt;
      j["params"] = {{"rounds", m.params.rounds},
                     {"max_depth", m.params.max_depth},
                     {"eta", m.params.eta},
                     {"lambda", m.params.lambda},
                     {"min_child_weight", m.params.min_child_weight},
                     {"subsample", m.params.subsample},
                     {"colsample", m.params.colsample},
                     {"base_score", m.params.base_score}};
      j["n_features"] = m.n_features;
      j["degenerate"] = m.degenerate;
      json trees = json::array();
      for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
      j["trees"] = std::move(trees);
      break;
    }
    case Family::random_forest: {
      const RFModel& m = *c.forest;
      j["params"] = {{"trees", m.params.trees},
                     {"max_depth", m.params.max_depth},
                     {"feature_fraction", m.params.feature_fraction},
                     {"bootstrap", m.params.bootstrap},
                     {"min_leaf", m.params.min_leaf}};
      j["n_features"] = m.n_features;
      j["degenerate"] = m.degenerate;
      json trees = json::array();
      for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
      j["trees"] = std::move(trees);
      break;
    }
    case Family::adaboost: {
      const AdaModel& m = *c.ada;
      j["params"] = {{"learners", m.params.learners}, {"stump_depth", m.params.stump_depth}};
      j["n_features"] = m.n_features;
      j["degenerate"] = m.degenerate;
      j["alphas"] = m.alphas;
      json trees = json::array();
      for (const auto& t : m.stumps) trees.push_back(tree_to_json(t));
      j["trees"] = std::move(trees);
      break;
    }
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model: " + path);
  out << j.dump(1) << "\n";
}

Classifier load_classifier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model: " + path);
  json j = json::parse(in);
  if (j.value("format", "") != "ses-model-v1") throw std::runtime_error("unknown model format");
  Classifier c;
  const auto family = family_from_name(j.at("family").get<std::string>());
  if (!family) throw std::runtime_error("unknown model family");
  c.family = *family;
  switch (c.family) {
    case Family::gbt: {
      GBTModel m;
      const json& p = j.at("params");
      m.params.rounds = p.at("rounds").get<std::size_t>();
      m.params.max_depth = p.at("max_depth").get<int>();
      m.params.eta = p.at("eta").get<double>();
      m.params.lambda = p.at("lambda").get<double>();
      m.params.min_child_weight = p.at("min_child_weight").get<double>();
      m.params.subsample = p.at("subsample").get<double>();
      m.params.colsample = p.at("colsample").get<double>();
      m.params.base_score = p.at("base_score").get<double>();
      m.n_features = j.at("n_features").get<std::size_t>();
      m.degenerate = j.at("degenerate").get<bool>();
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
      c.gbt = std::move(m);
      break;
    }
    case Family::random_forest: {
      RFModel m;
      const json& p = j.at("params");
      m.params.trees = p.at("trees").get<std::size_t>();
      m.params.max_depth = p.at("max_depth").get<int>();
      m.params.feature_fraction = p.at("feature_fraction").get<double>();
      m.params.bootstrap = p.at("bootstrap").get<bool>();
      m.params.min_leaf = p.at("min_leaf").get<std::size_t>();
      m.n_features = j.at("n_features").get<std::size_t>();
      m.degenerate = j.at("degenerate").get<bool>();
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
      c.forest = std::move(m);
      break;
    }
    case Family::adaboost: {
      AdaModel m;
      const json& p = j.at("params");
      m.params.learners = p.at("learners").get<std::size_t>();
      m.params.stump_depth = p.at("stump_depth").get<int>();
      m.n_features = j.at("n_features").get<std::size_t>();
      m.degenerate = j.at("degenerate").get<bool>();
      m.alphas = j.at("alphas").get<std::vector<double>>();
      for (const auto& t : j.at("trees")) m.stumps.push_back(tree_from_json(t));
      c.ada = std::move(m);
      break;
    }
  }
  return c;
}

void save_cv_report(const CVReport& report, const std::string& path, const std::string& config_hash) {
  json j;
  j["format"] = "ses-cv-v1";
  j["config_hash"] = config_hash;
  j["family"] = family_name(report.family);
  j["plan"] = {{"outer_folds", report.plan.outer_folds},
               {"inner_folds", report.plan.inner_folds},
               {"inner_repetitions", report.plan.inner_repetitions},
               {"configs", report.plan.configs},
               {"seed", report.plan.seed}};
  j["mean_auc"] = report.mean_auc;
  j["std_auc"] = report.std_auc;
  j["total_inner_fits"] = report.total_inner_fits;
  json folds = json::array();
  for (const auto& f : report.folds) {
    json jf;
    jf["fold"] = f.fold;
    jf["train_rows"] = f.train_rows;
    jf["test_rows"] = f.test_rows;
    jf["inner_partitions"] = f.inner_partitions;
    json cfgs = json::array();
    for (const auto& c : f.configs) cfgs.push_back(hp_to_json(c));
    jf["configs"] = std::move(cfgs);
    jf["config_mean_auc"] = f.config_mean_auc;
    jf["config_auc_samples"] = f.config_auc_samples;
    jf["chosen_config"] = f.chosen_config;
    jf["test_auc"] = f.test_auc;
    jf["test_scores"] = f.test_scores;
    jf["test_labels"] = f.test_labels;
    folds.push_back(std::move(jf));
  }
  j["folds"] = std::move(folds);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write cv report: " + path);
  out << j.dump(1) << "\n";
}

CVReport load_cv_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cv report: " + path);
  json j = json::parse(in);
  if (j.value("format", "") != "ses-cv-v1") throw std::runtime_error("unknown cv report format");
  CVReport r;
  const auto family = family_from_name(j.at("family").get<std::string>());
  if (!family) throw std::runtime_error("unknown cv family");
  r.family = *family;
  r.plan.outer_folds = j.at("plan").at("outer_folds").get<std::size_t>();
  r.plan.inner_folds = j.at("plan").at("inner_folds").get<std::size_t>();
  r.plan.inner_repetitions = j.at("plan").at("inner_repetitions").get<std::size_t>();
  r.plan.configs = j.at("plan").at("configs").get<std::size_t>();
  r.plan.seed = j.at("plan").at("seed").get<std::uint64_t>();
  r.mean_auc = j.at("mean_auc").get<double>();
  r.std_auc = j.at("std_auc").get<double>();
  r.total_inner_fits = j.at("total_inner_fits").get<std::size_t>();
  for (const auto& jf : j.at("folds")) {
    OuterFoldResult f;
    f.fold = jf.at("fold").get<std::size_t>();
    f.train_rows = jf.at("train_rows").get<std::vector<std::uint32_t>>();
    f.test_rows = jf.at("test_rows").get<std::vector<std::uint32_t>>();
    f.inner_partitions = jf.at("inner_partitions").get<std::vector<std::vector<std::uint8_t>>>();
    for (const auto& c : jf.at("configs")) f.configs.push_back(hp_from_json(c));
    f.config_mean_auc = jf.at("config_mean_auc").get<std::vector<double>>();
    f.config_auc_samples = jf.at("config_auc_samples").get<std::vector<std::size_t>>();
    f.chosen_config = jf.at("chosen_config").get<std::size_t>();
    f.test_auc = jf.at("test_auc").get<double>();
    f.test_scores = jf.at("test_scores").get<std::vector<double>>();
    f.test_labels = jf.at("test_labels").get<std::vector<int>>();
    r.folds.push_back(std::move(f));
  }
  return r;
}

}  // namespace ses::learn
