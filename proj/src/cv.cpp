#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ses/eval.hpp"
#include "ses/learn.hpp"

namespace ses::learn {

const char* family_name(Family f) {
  switch (f) {
    case Family::gbt: return "gbt";
    case Family::random_forest: return "rf";
    case Family::adaboost: return "ada";
  }
  return "?";
}

std::optional<Family> family_from_name(const std::string& name) {
  if (name == "gbt" || name == "xgboost") return Family::gbt;
  if (name == "rf" || name == "random_forest") return Family::random_forest;
  if (name == "ada" || name == "adaboost") return Family::adaboost;
  return std::nullopt;
}

HyperParams sample_config(Family family, const ParamSpace& s, Rng& rng) {
  HyperParams hp;
  switch (family) {
    case Family::gbt:
      hp["depth"] = static_cast<double>(rng.uniform_int(s.gbt_depth_min, s.gbt_depth_max));
      hp["eta"] = rng.log_uniform(s.gbt_eta_min, s.gbt_eta_max);
      hp["lambda"] = rng.log_uniform(s.gbt_lambda_min, s.gbt_lambda_max);
      hp["subsample"] = rng.uniform(s.gbt_subsample_min, s.gbt_subsample_max);
      hp["colsample"] = rng.uniform(s.gbt_colsample_min, s.gbt_colsample_max);
      hp["rounds"] = static_cast<double>(rng.uniform_int(s.gbt_rounds_min, s.gbt_rounds_max));
      break;
    case Family::random_forest:
      hp["trees"] = static_cast<double>(rng.uniform_int(s.rf_trees_min, s.rf_trees_max));
      hp["depth"] = static_cast<double>(rng.uniform_int(s.rf_depth_min, s.rf_depth_max));
      // feature fraction 0 selects the sqrt(p) heuristic
      hp["feat_frac"] = (s.rf_sqrt_option && rng.uniform() < 0.5)
                            ? 0.0
                            : rng.uniform(s.rf_feat_min, s.rf_feat_max);
      break;
    case Family::adaboost:
      hp["learners"] = static_cast<double>(rng.uniform_int(s.ada_learners_min, s.ada_learners_max));
      hp["depth"] = static_cast<double>(rng.uniform_int(s.ada_depth_min, s.ada_depth_max));
      break;
  }
  return hp;
}

namespace {
double hp_get(const HyperParams& hp, const char* key, double fallback) {
  const auto it = hp.find(key);
  return it == hp.end() ? fallback : it->second;
}
}  // namespace

Classifier train_family(Family family, const Dataset& data, const std::vector<std::uint32_t>& rows,
                        const HyperParams& hp, std::uint64_t seed) {
  Classifier c;
  c.family = family;
  switch (family) {
    case Family::gbt: {
      GBTParams p;
      p.max_depth = static_cast<int>(hp_get(hp, "depth", p.max_depth));
      p.eta = hp_get(hp, "eta", p.eta);
      p.lambda = hp_get(hp, "lambda", p.lambda);
      p.subsample = hp_get(hp, "subsample", p.subsample);
      p.colsample = hp_get(hp, "colsample", p.colsample);
      p.rounds = static_cast<std::size_t>(hp_get(hp, "rounds", static_cast<double>(p.rounds)));
      p.min_child_weight = hp_get(hp, "min_child_weight", p.min_child_weight);
      c.gbt = train_gbt(data, rows, p, seed);
      break;
    }
    case Family::random_forest: {
      RFParams p;
      p.trees = static_cast<std::size_t>(hp_get(hp, "trees", static_cast<double>(p.trees)));
      p.max_depth = static_cast<int>(hp_get(hp, "depth", p.max_depth));
      p.feature_fraction = hp_get(hp, "feat_frac", p.feature_fraction);
      c.forest = train_random_forest(data, rows, p, seed);
      break;
    }
    case Family::adaboost: {
      AdaParams p;
      p.learners = static_cast<std::size_t>(hp_get(hp, "learners", static_cast<double>(p.learners)));
      p.stump_depth = static_cast<int>(hp_get(hp, "depth", p.stump_depth));
      c.ada = train_adaboost(data, rows, p, seed);
      break;
    }
  }
  return c;
}

std::vector<double> predict_family(const Classifier& c, const Dataset& data,
                                   const std::vector<std::uint32_t>& rows) {
  switch (c.family) {
    case Family::gbt: return predict_proba(*c.gbt, data, rows);
    case Family::random_forest: return predict_proba(*c.forest, data, rows);
    case Family::adaboost: return predict_proba(*c.ada, data, rows);
  }
  throw std::logic_error("predict_family: unknown family");
}

std::vector<std::uint8_t> stratified_kfold(const std::vector<int>& labels, std::size_t k, Rng& rng) {
  if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
  std::vector<std::uint8_t> fold_of(labels.size(), 0);
  for (const int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold_of[members[i]] = static_cast<std::uint8_t>(i % k);
  }
  return fold_of;
}

CVReport nested_cv(const Dataset& data, Family family, const CVPlan& plan) {
  data.validate();
  if (plan.outer_folds < 2 || plan.inner_folds < 2 || plan.inner_repetitions < 1 ||
      plan.configs < 1)
    throw std::invalid_argument("nested_cv: invalid plan");

  CVReport report;
  report.family = family;
  report.plan = plan;

  Rng master(plan.seed);
  Rng outer_rng = master.child("outer");
  const std::vector<std::uint8_t> outer_fold = stratified_kfold(data.y, plan.outer_folds, outer_rng);

  // broken stratification is fatal per contract
  for (std::size_t f = 0; f < plan.outer_folds; ++f) {
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (outer_fold[i] == f) (data.y[i] ? has1 : has0) = true;
    if (!has0 || !has1) throw std::runtime_error("nested_cv: class missing from an outer fold");
  }

  for (std::size_t f = 0; f < plan.outer_folds; ++f) {
    OuterFoldResult fold;
    fold.fold = f;
    for (std::uint32_t i = 0; i < data.size(); ++i)
      (outer_fold[i] == f ? fold.test_rows : fold.train_rows).push_back(i);

    std::vector<int> train_labels;
    train_labels.reserve(fold.train_rows.size());
    for (const std::uint32_t r : fold.train_rows) train_labels.push_back(data.y[r]);

    // shared inner partitions: one stratified k-fold per repetition
    for (std::size_t rep = 0; rep < plan.inner_repetitions; ++rep) {
      Rng rep_rng = master.child("inner", f * 1000 + rep);
      fold.inner_partitions.push_back(stratified_kfold(train_labels, plan.inner_folds, rep_rng));
    }

    Rng config_rng = master.child("configs", f);
    for (std::size_t c = 0; c < plan.configs; ++c)
      fold.configs.push_back(sample_config(family, plan.space, config_rng));

    fold.config_mean_auc.assign(plan.configs, 0.0);
    fold.config_auc_samples.assign(plan.configs, 0);
    for (std::size_t c = 0; c < plan.configs; ++c) {
      double sum_auc = 0.0;
      std::size_t samples = 0;
      for (std::size_t rep = 0; rep < plan.inner_repetitions; ++rep) {
        const auto& part = fold.inner_partitions[rep];
        for (std::size_t inner = 0; inner < plan.inner_folds; ++inner) {
          std::vector<std::uint32_t> fit_rows, val_rows;
          for (std::size_t i = 0; i < fold.train_rows.size(); ++i)
            (part[i] == inner ? val_rows : fit_rows).push_back(fold.train_rows[i]);
          const std::uint64_t fit_seed =
              master.child("fit", ((f * plan.configs + c) * plan.inner_repetitions + rep) *
                                      plan.inner_folds + inner)
                  .next_u64();
          const Classifier clf = train_family(family, data, fit_rows, fold.configs[c], fit_seed);
          const std::vector<double> scores = predict_family(clf, data, val_rows);
          std::vector<int> val_labels;
          val_labels.reserve(val_rows.size());
          for (const std::uint32_t r : val_rows) val_labels.push_back(data.y[r]);
          sum_auc += eval::auc(scores, val_labels);
          ++samples;
          ++report.total_inner_fits;
        }
      }
      fold.config_mean_auc[c] = sum_auc / static_cast<double>(samples);
      fold.config_auc_samples[c] = samples;
    }

    fold.chosen_config = 0;
    for (std::size_t c = 1; c < plan.configs; ++c)
      if (fold.config_mean_auc[c] > fold.config_mean_auc[fold.chosen_config]) fold.chosen_config = c;

    const std::uint64_t final_seed = master.child("final", f).next_u64();
    const Classifier best =
        train_family(family, data, fold.train_rows, fold.configs[fold.chosen_config], final_seed);
    fold.test_scores = predict_family(best, data, fold.test_rows);
    for (const std::uint32_t r : fold.test_rows) fold.test_labels.push_back(data.y[r]);
    fold.test_auc = eval::auc(fold.test_scores, fold.test_labels);
    report.folds.push_back(std::move(fold));
  }

  double mean = 0.0;
  for (const auto& fold : report.folds) mean += fold.test_auc;
  mean /= static_cast<double>(report.folds.size());
  double var = 0.0;
  for (const auto& fold : report.folds) var += (fold.test_auc - mean) * (fold.test_auc - mean);
  report.mean_auc = mean;
  report.std_auc = report.folds.size() > 1
                       ? std::sqrt(var / static_cast<double>(report.folds.size() - 1))
                       : 0.0;
  return report;
}

}  // namespace ses::learn
