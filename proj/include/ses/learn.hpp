#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ses/util/mat.hpp"
#include "ses/util/rng.hpp"

namespace ses::learn {

// Per-column presorted row order, shared by every fit on the same data.
struct ColumnSet {
  Mat cols;                                        // p x n, transposed copy
  std::vector<std::vector<std::uint32_t>> sorted;  // per feature, rows by ascending value
};

struct Dataset {
  std::vector<std::string> user_ids;
  Mat x;               // n x p
  std::vector<int> y;  // 0 = low, 1 = high

  std::size_t size() const { return x.rows; }
  std::size_t width() const { return x.cols; }
  const ColumnSet& columns() const;  // built lazily, cached

  // throws std::invalid_argument on non-finite entries or a missing class
  void validate() const;

 private:
  mutable std::shared_ptr<ColumnSet> columns_;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] < threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf weight (boosting) or class-1 fraction (forest)
};

struct Tree {
  std::vector<TreeNode> nodes;
  double leaf_value(const double* row) const;
  int leaf_index(const double* row) const;
};

// ---- gradient-boosted trees (logistic loss, second-order splits) ----

struct GBTParams {
  std::size_t rounds = 100;
  int max_depth = 6;
  double eta = 0.3;
  double lambda = 1.0;  // L2 on leaf weights
  double min_child_weight = 1.0;
  double subsample = 1.0;
  double colsample = 1.0;
  double base_score = 0.5;  // probability; margin starts at logit(base_score)
};

struct GBTModel {
  GBTParams params;
  std::vector<Tree> trees;
  std::size_t n_features = 0;
  bool degenerate = false;  // single-class input, constant prediction
  std::vector<double> train_logloss;  // per round, after the round's update
};

GBTModel train_gbt(const Dataset& data, const GBTParams& params, std::uint64_t seed);
GBTModel train_gbt(const Dataset& data, const std::vector<std::uint32_t>& rows,
                   const GBTParams& params, std::uint64_t seed);
std::vector<double> predict_proba(const GBTModel& model, const Dataset& data,
                                  const std::vector<std::uint32_t>& rows);

// ---- random forest ----

struct RFParams {
  std::size_t trees = 300;
  int max_depth = 12;
  double feature_fraction = 0.0;  // 0 = sqrt(p) heuristic
  bool bootstrap = true;
  std::size_t min_leaf = 1;
};

struct RFModel {
  RFParams params;
  std::vector<Tree> trees;
  std::size_t n_features = 0;
  bool degenerate = false;
};

RFModel train_random_forest(const Dataset& data, const RFParams& params, std::uint64_t seed);
RFModel train_random_forest(const Dataset& data, const std::vector<std::uint32_t>& rows,
                            const RFParams& params, std::uint64_t seed);
std::vector<double> predict_proba(const RFModel& model, const Dataset& data,
                                  const std::vector<std::uint32_t>& rows);

// ---- AdaBoost over shallow stumps ----

struct AdaParams {
  std::size_t learners = 200;
  int stump_depth = 1;
};

struct AdaModel {
  AdaParams params;
  std::vector<Tree> stumps;
  std::vector<double> alphas;
  std::size_t n_features = 0;
  bool degenerate = false;
  std::vector<double> train_error;  // ensemble 0/1 error after each learner
};

AdaModel train_adaboost(const Dataset& data, const AdaParams& params, std::uint64_t seed);
AdaModel train_adaboost(const Dataset& data, const std::vector<std::uint32_t>& rows,
                        const AdaParams& params, std::uint64_t seed);
std::vector<double> predict_proba(const AdaModel& model, const Dataset& data,
                                  const std::vector<std::uint32_t>& rows);

// ---- family-generic layer used by the cross-validation driver ----

enum class Family { gbt, random_forest, adaboost };
const char* family_name(Family f);
std::optional<Family> family_from_name(const std::string& name);

using HyperParams = std::map<std::string, double>;

// Random-search bounds; defaults follow the documented grids.
struct ParamSpace {
  int gbt_depth_min = 2, gbt_depth_max = 8;
  double gbt_eta_min = 0.01, gbt_eta_max = 0.3;        // log-uniform
  double gbt_lambda_min = 0.1, gbt_lambda_max = 10.0;  // log-uniform
  double gbt_subsample_min = 0.5, gbt_subsample_max = 1.0;
  double gbt_colsample_min = 0.3, gbt_colsample_max = 1.0;
  int gbt_rounds_min = 50, gbt_rounds_max = 500;

  int rf_trees_min = 100, rf_trees_max = 500;
  int rf_depth_min = 4, rf_depth_max = 16;
  double rf_feat_min = 0.1, rf_feat_max = 0.5;
  bool rf_sqrt_option = true;  // half the draws use the sqrt(p) heuristic

  int ada_learners_min = 50, ada_learners_max = 500;
  int ada_depth_min = 1, ada_depth_max = 2;
};

HyperParams sample_config(Family family, const ParamSpace& space, ses::Rng& rng);

struct Classifier {
  Family family = Family::gbt;
  std::optional<GBTModel> gbt;
  std::optional<RFModel> forest;
  std::optional<AdaModel> ada;
};

Classifier train_family(Family family, const Dataset& data, const std::vector<std::uint32_t>& rows,
                        const HyperParams& hp, std::uint64_t seed);
std::vector<double> predict_family(const Classifier& c, const Dataset& data,
                                   const std::vector<std::uint32_t>& rows);

// ---- nested stratified cross-validation ----

struct CVPlan {
  std::size_t outer_folds = 5;
  std::size_t inner_folds = 5;
  std::size_t inner_repetitions = 10;
  std::size_t configs = 500;
  std::uint64_t seed = 0;
  ParamSpace space;
};

struct OuterFoldResult {
  std::size_t fold = 0;
  std::vector<std::uint32_t> train_rows;
  std::vector<std::uint32_t> test_rows;
  // inner partitions over train_rows positions: partitions[rep][i] = inner fold
  std::vector<std::vector<std::uint8_t>> inner_partitions;
  std::vector<HyperParams> configs;
  std::vector<double> config_mean_auc;
  std::vector<std::size_t> config_auc_samples;  // inner AUC count per config
  std::size_t chosen_config = 0;
  double test_auc = 0.0;
  std::vector<double> test_scores;
  std::vector<int> test_labels;
};

struct CVReport {
  Family family = Family::gbt;
  CVPlan plan;
  std::vector<OuterFoldResult> folds;
  double mean_auc = 0.0;
  double std_auc = 0.0;  // sample std over outer folds
  std::size_t total_inner_fits = 0;
};

// Stratified k-fold assignment (fold id per element), seeded; each class is
// dealt round-robin after a seeded shuffle, so per-fold class counts differ
// by at most one.
std::vector<std::uint8_t> stratified_kfold(const std::vector<int>& labels, std::size_t k,
                                           ses::Rng& rng);

CVReport nested_cv(const Dataset& data, Family family, const CVPlan& plan);

// ---- persistence ----

void save_classifier(const Classifier& c, const std::string& path, const std::string& config_hash,
                     std::uint64_t seed);
Classifier load_classifier(const std::string& path);

void save_cv_report(const CVReport& report, const std::string& path, const std::string& config_hash);
CVReport load_cv_report(const std::string& path);

}  // namespace ses::learn
