#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ses/learn.hpp"

namespace ses::learn {

namespace {

std::vector<std::uint32_t> all_rows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

struct WeightedTreeParams {
  int max_depth = 1;
  std::size_t min_leaf = 1;
  std::size_t mtry = 0;  // 0 = all features
};

// CART with weighted gini impurity; leaves carry the weighted class-1 share.
class WeightedTreeBuilder {
 public:
  WeightedTreeBuilder(const Dataset& data, const std::vector<int>& y, WeightedTreeParams params,
                      Rng& rng)
      : data_(data), y_(y), params_(params), rng_(rng) {}

  Tree fit(std::vector<std::uint32_t> rows, const std::vector<double>& weights) {
    tree_.nodes.clear();
    weights_ = &weights;
    build(std::move(rows), params_.max_depth);
    return std::move(tree_);
  }

 private:
  int build(std::vector<std::uint32_t> rows, int depth_left) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});

    double w_total = 0.0, w_pos = 0.0;
    for (const std::uint32_t r : rows) {
      const double w = (*weights_)[r];
      w_total += w;
      if (y_[r] == 1) w_pos += w;
    }
    auto make_leaf = [&]() {
      tree_.nodes[static_cast<std::size_t>(id)].feature = -1;
      tree_.nodes[static_cast<std::size_t>(id)].value = w_total > 0.0 ? w_pos / w_total : 0.5;
      return id;
    };
    if (depth_left <= 0 || rows.size() < 2 * params_.min_leaf || w_pos <= 0.0 || w_pos >= w_total)
      return make_leaf();

    const std::size_t p = data_.width();
    std::vector<std::uint32_t> feats(p);
    std::iota(feats.begin(), feats.end(), 0u);
    if (params_.mtry > 0 && params_.mtry < p) {
      // partial Fisher-Yates, then sorted for a deterministic scan order
      for (std::size_t i = 0; i < params_.mtry; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng_.uniform_int(static_cast<std::uint64_t>(p - i)));
        std::swap(feats[i], feats[j]);
      }
      feats.resize(params_.mtry);
      std::sort(feats.begin(), feats.end());
    }

    const double parent_gini = 1.0 - (w_pos / w_total) * (w_pos / w_total) -
                               ((w_total - w_pos) / w_total) * ((w_total - w_pos) / w_total);
    double best_gain = 1e-12;
    int best_feat = -1;
    double best_thr = 0.0;

    std::vector<std::uint32_t> order(rows);
    for (const std::uint32_t f : feats) {
      std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double va = data_.x.at(a, f), vb = data_.x.at(b, f);
        if (va != vb) return va < vb;
        return a < b;
      });
      double wl = 0.0, wl_pos = 0.0;
      std::size_t count_left = 0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const std::uint32_t r = order[i];
        const double w = (*weights_)[r];
        wl += w;
        if (y_[r] == 1) wl_pos += w;
        ++count_left;
        const double v = data_.x.at(r, f);
        const double v_next = data_.x.at(order[i + 1], f);
        if (v_next <= v) continue;  // not a value boundary
        if (count_left < params_.min_leaf || order.size() - count_left < params_.min_leaf) continue;
        const double wr = w_total - wl;
        if (wl <= 0.0 || wr <= 0.0) continue;
        const double wr_pos = w_pos - wl_pos;
        const double gini_l = 1.0 - (wl_pos / wl) * (wl_pos / wl) -
                              ((wl - wl_pos) / wl) * ((wl - wl_pos) / wl);
        const double gini_r = 1.0 - (wr_pos / wr) * (wr_pos / wr) -
                              ((wr - wr_pos) / wr) * ((wr - wr_pos) / wr);
        const double gain = parent_gini - (wl / w_total) * gini_l - (wr / w_total) * gini_r;
        if (gain > best_gain) {
          best_gain = gain;
          best_feat = static_cast<int>(f);
          best_thr = v_next;  // right-boundary anchor, see the boosting trainer
        }
      }
    }
    if (best_feat < 0) return make_leaf();

    std::vector<std::uint32_t> left_rows, right_rows;
    for (const std::uint32_t r : rows) {
      (data_.x.at(r, static_cast<std::size_t>(best_feat)) < best_thr ? left_rows : right_rows)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int left = build(std::move(left_rows), depth_left - 1);
    const int right = build(std::move(right_rows), depth_left - 1);
    TreeNode& nd = tree_.nodes[static_cast<std::size_t>(id)];
    nd.feature = best_feat;
    nd.threshold = best_thr;
    nd.left = left;
    nd.right = right;
    return id;
  }

  const Dataset& data_;
  const std::vector<int>& y_;
  WeightedTreeParams params_;
  Rng& rng_;
  Tree tree_;
  const std::vector<double>* weights_ = nullptr;
};

}  // namespace

RFModel train_random_forest(const Dataset& data, const RFParams& params, std::uint64_t seed) {
  return train_random_forest(data, all_rows(data.size()), params, seed);
}

RFModel train_random_forest(const Dataset& data, const std::vector<std::uint32_t>& view,
                            const RFParams& params, std::uint64_t seed) {
  if (view.size() < 2) throw std::invalid_argument("train_random_forest: need at least 2 rows");
  if (params.trees == 0 || params.max_depth < 0)
    throw std::invalid_argument("train_random_forest: invalid parameters");
  RFModel model;
  model.params = params;
  model.n_features = data.width();

  bool has0 = false, has1 = false;
  for (const std::uint32_t r : view) (data.y[r] ? has1 : has0) = true;
  if (!has0 || !has1) {
    model.degenerate = true;
    return model;
  }

  const std::size_t p = data.width();
  std::size_t mtry = p;
  if (params.feature_fraction > 0.0 && params.feature_fraction < 1.0) {
    mtry = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(params.feature_fraction * static_cast<double>(p))));
  } else if (params.feature_fraction == 0.0) {
    mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(p)))));
  }

  Rng master(seed);
  std::vector<double> weights(data.size(), 0.0);
  for (std::size_t t = 0; t < params.trees; ++t) {
    Rng rng = master.child("tree", t);
    std::fill(weights.begin(), weights.end(), 0.0);
    std::vector<std::uint32_t> rows;
    if (params.bootstrap) {
      for (std::size_t i = 0; i < view.size(); ++i) {
        const std::uint32_t r = view[static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::uint64_t>(view.size())))];
        if (weights[r] == 0.0) rows.push_back(r);
        weights[r] += 1.0;
      }
      std::sort(rows.begin(), rows.end());
    } else {
      rows = view;
      for (const std::uint32_t r : view) weights[r] = 1.0;
    }
    WeightedTreeParams tp;
    tp.max_depth = params.max_depth;
    tp.min_leaf = params.min_leaf;
    tp.mtry = mtry;
    WeightedTreeBuilder builder(data, data.y, tp, rng);
    model.trees.push_back(builder.fit(std::move(rows), weights));
  }
  return model;
}

std::vector<double> predict_proba(const RFModel& model, const Dataset& data,
                                  const std::vector<std::uint32_t>& rows) {
  if (data.width() != model.n_features)
    throw std::invalid_argument("predict_proba: feature width mismatch");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const std::uint32_t r : rows) {
    if (model.degenerate || model.trees.empty()) {
      out.push_back(0.5);
      continue;
    }
    double s = 0.0;
    for (const auto& tree : model.trees) s += tree.leaf_value(data.x.row(r));
    const double p = s / static_cast<double>(model.trees.size());
    out.push_back(std::min(1.0 - 1e-15, std::max(1e-15, p)));
  }
  return out;
}

AdaModel train_adaboost(const Dataset& data, const AdaParams& params, std::uint64_t seed) {
  return train_adaboost(data, all_rows(data.size()), params, seed);
}

AdaModel train_adaboost(const Dataset& data, const std::vector<std::uint32_t>& view,
                        const AdaParams& params, std::uint64_t seed) {
  if (view.size() < 2) throw std::invalid_argument("train_adaboost: need at least 2 rows");
  if (params.learners == 0 || params.stump_depth < 1)
    throw std::invalid_argument("train_adaboost: invalid parameters");
  AdaModel model;
  model.params = params;
  model.n_features = data.width();

  bool has0 = false, has1 = false;
  for (const std::uint32_t r : view) (data.y[r] ? has1 : has0) = true;
  if (!has0 || !has1) {
    model.degenerate = true;
    return model;
  }

  Rng master(seed);
  std::vector<double> weights(data.size(), 0.0);
  for (const std::uint32_t r : view) weights[r] = 1.0 / static_cast<double>(view.size());

  std::vector<double> margins(data.size(), 0.0);  // sum of alpha * h over learners
  for (std::size_t t = 0; t < params.learners; ++t) {
    Rng rng = master.child("stump", t);
    WeightedTreeParams tp;
    tp.max_depth = params.stump_depth;
    tp.min_leaf = 1;
    tp.mtry = 0;
    WeightedTreeBuilder builder(data, data.y, tp, rng);
    Tree stump = builder.fit(view, weights);

    double eps = 0.0;
    for (const std::uint32_t r : view) {
      const int pred = stump.leaf_value(data.x.row(r)) >= 0.5 ? 1 : 0;
      if (pred != data.y[r]) eps += weights[r];
    }
    if (eps >= 0.5) break;  // weak learner no better than chance
    const double eps_safe = std::max(eps, 1e-10);
    const double alpha = 0.5 * std::log((1.0 - eps_safe) / eps_safe);

    for (const std::uint32_t r : view) {
      const double h = stump.leaf_value(data.x.row(r)) >= 0.5 ? 1.0 : -1.0;
      margins[r] += alpha * h;
    }
    double err = 0.0;
    for (const std::uint32_t r : view) {
      const int pred = margins[r] >= 0.0 ? 1 : 0;
      if (pred != data.y[r]) err += 1.0;
    }
    model.train_error.push_back(err / static_cast<double>(view.size()));

    model.stumps.push_back(std::move(stump));
    model.alphas.push_back(alpha);
    if (eps == 0.0) break;  // perfect learner, nothing left to reweight

    double norm = 0.0;
    for (const std::uint32_t r : view) {
      const int pred = model.stumps.back().leaf_value(data.x.row(r)) >= 0.5 ? 1 : 0;
      weights[r] *= std::exp(pred != data.y[r] ? alpha : -alpha);
      norm += weights[r];
    }
    for (const std::uint32_t r : view) weights[r] /= norm;
  }
  return model;
}

std::vector<double> predict_proba(const AdaModel& model, const Dataset& data,
                                  const std::vector<std::uint32_t>& rows) {
  if (data.width() != model.n_features)
    throw std::invalid_argument("predict_proba: feature width mismatch");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const std::uint32_t r : rows) {
    double f = 0.0;
    for (std::size_t t = 0; t < model.stumps.size(); ++t) {
      const double h = model.stumps[t].leaf_value(data.x.row(r)) >= 0.5 ? 1.0 : -1.0;
      f += model.alphas[t] * h;
    }
    // logistic link on the additive margin keeps probabilities inside (0,1)
    const double p = 1.0 / (1.0 + std::exp(-2.0 * f));
    out.push_back(std::min(1.0 - 1e-15, std::max(1e-15, p)));
  }
  return out;
}

}  // namespace ses::learn
