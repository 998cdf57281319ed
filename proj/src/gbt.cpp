#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ses/learn.hpp"

namespace ses::learn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

double clamp_prob(double p) { return std::min(1.0 - 1e-15, std::max(1e-15, p)); }

std::vector<std::uint32_t> all_rows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

}  // namespace

const ColumnSet& Dataset::columns() const {
  if (!columns_) {
    auto cs = std::make_shared<ColumnSet>();
    const std::size_t n = x.rows;
    const std::size_t p = x.cols;
    cs->cols = Mat(p, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t f = 0; f < p; ++f) cs->cols.at(f, r) = x.at(r, f);
    cs->sorted.resize(p);
    for (std::size_t f = 0; f < p; ++f) {
      auto& idx = cs->sorted[f];
      idx.resize(n);
      std::iota(idx.begin(), idx.end(), 0u);
      const double* col = cs->cols.row(f);
      std::sort(idx.begin(), idx.end(), [col](std::uint32_t a, std::uint32_t b) {
        if (col[a] != col[b]) return col[a] < col[b];
        return a < b;
      });
    }
    columns_ = std::move(cs);
  }
  return *columns_;
}

void Dataset::validate() const {
  if (x.rows != y.size()) throw std::invalid_argument("dataset: row/label count mismatch");
  for (const double v : x.data)
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature value");
  bool has0 = false, has1 = false;
  for (const int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw std::invalid_argument("dataset: labels must be 0/1");
  }
  if (!has0 || !has1) throw std::invalid_argument("dataset: both classes required");
}

double Tree::leaf_value(const double* row) const { return nodes[static_cast<std::size_t>(leaf_index(row))].value; }

int Tree::leaf_index(const double* row) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(i)];
    i = (row[nd.feature] < nd.threshold) ? nd.left : nd.right;
  }
  return i;
}

GBTModel train_gbt(const Dataset& data, const GBTParams& params, std::uint64_t seed) {
  return train_gbt(data, all_rows(data.size()), params, seed);
}

GBTModel train_gbt(const Dataset& data, const std::vector<std::uint32_t>& view,
                   const GBTParams& params, std::uint64_t seed) {
  if (view.size() < 2) throw std::invalid_argument("train_gbt: need at least 2 rows");
  if (params.rounds == 0 || params.eta <= 0.0 || params.lambda < 0.0 || params.max_depth < 0 ||
      params.subsample <= 0.0 || params.subsample > 1.0 || params.colsample <= 0.0 ||
      params.colsample > 1.0 || params.base_score <= 0.0 || params.base_score >= 1.0)
    throw std::invalid_argument("train_gbt: invalid parameters");

  GBTModel model;
  model.params = params;
  model.n_features = data.width();

  bool has0 = false, has1 = false;
  for (const std::uint32_t r : view) (data.y[r] ? has1 : has0) = true;
  if (!has0 || !has1) {
    model.degenerate = true;
    return model;
  }

  const ColumnSet& cs = data.columns();
  const std::size_t n_all = data.size();
  const std::size_t p = data.width();
  const double base_margin = logit(params.base_score);

  Rng rng(seed);
  std::vector<double> margin(n_all, base_margin);
  std::vector<double> grad(n_all, 0.0), hess(n_all, 0.0);
  std::vector<int> node_of(n_all, -1);

  // per-node scratch, indexed by frontier slot
  struct NodeAcc {
    double g_total = 0, h_total = 0;
    double g_acc = 0, h_acc = 0;
    double prev_val = 0;
    bool seen = false;
    std::size_t count = 0;
    double best_gain = 0;
    int best_feat = -1;
    double best_thr = 0;
    int tree_node = -1;
  };

  std::vector<std::uint32_t> sample;
  sample.reserve(view.size());
  std::vector<std::uint32_t> feats;

  for (std::size_t round = 0; round < params.rounds; ++round) {
    // gradients on the sampled rows
    sample = view;
    if (params.subsample < 1.0) {
      rng.shuffle(sample);
      const std::size_t m = std::max<std::size_t>(
          2, static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(view.size()))));
      sample.resize(std::min(m, sample.size()));
    }
    for (const std::uint32_t r : sample) {
      const double prob = sigmoid(margin[r]);
      grad[r] = prob - static_cast<double>(data.y[r]);
      hess[r] = std::max(1e-16, prob * (1.0 - prob));
    }

    // feature subset for this tree
    feats.resize(p);
    std::iota(feats.begin(), feats.end(), 0u);
    if (params.colsample < 1.0) {
      rng.shuffle(feats);
      const std::size_t m = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(params.colsample * static_cast<double>(p))));
      feats.resize(std::min(m, feats.size()));
      std::sort(feats.begin(), feats.end());
    }

    Tree tree;
    tree.nodes.push_back({});
    for (const std::uint32_t r : sample) node_of[r] = 0;

    std::vector<NodeAcc> frontier(1);
    for (const std::uint32_t r : sample) {
      frontier[0].g_total += grad[r];
      frontier[0].h_total += hess[r];
      ++frontier[0].count;
    }
    frontier[0].tree_node = 0;
    std::vector<int> slot_of_node{0};  // tree node id -> frontier slot

    for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
      for (auto& acc : frontier) {
        acc.best_gain = 0.0;
        acc.best_feat = -1;
      }
      for (const std::uint32_t f : feats) {
        for (auto& acc : frontier) {
          acc.g_acc = 0.0;
          acc.h_acc = 0.0;
          acc.seen = false;
        }
        const double* col = cs.cols.row(f);
        for (const std::uint32_t r : cs.sorted[f]) {
          const int nd = node_of[r];
          if (nd < 0) continue;
          const int slot = slot_of_node[static_cast<std::size_t>(nd)];
          if (slot < 0) continue;
          NodeAcc& acc = frontier[static_cast<std::size_t>(slot)];
          const double v = col[r];
          if (acc.seen && v > acc.prev_val && acc.h_acc >= params.min_child_weight &&
              acc.h_total - acc.h_acc >= params.min_child_weight) {
            const double gl = acc.g_acc, hl = acc.h_acc;
            const double gr = acc.g_total - gl, hr = acc.h_total - hl;
            const double gain = 0.5 * (gl * gl / (hl + params.lambda) + gr * gr / (hr + params.lambda) -
                                       acc.g_total * acc.g_total / (acc.h_total + params.lambda));
            if (gain > acc.best_gain + 1e-12) {
              acc.best_gain = gain;
              acc.best_feat = static_cast<int>(f);
              // threshold anchored at the right boundary value keeps routing
              // equivariant under any strictly monotone feature rescaling
              acc.best_thr = v;
            }
          }
          acc.g_acc += grad[r];
          acc.h_acc += hess[r];
          acc.prev_val = v;
          acc.seen = true;
        }
      }

      // materialize splits; unsplit nodes become leaves
      std::vector<NodeAcc> next;
      std::vector<int> new_slot_of_node(tree.nodes.size(), -1);
      bool any_split = false;
      for (auto& acc : frontier) {
        TreeNode& nd = tree.nodes[static_cast<std::size_t>(acc.tree_node)];
        if (acc.best_feat < 0) {
          nd.feature = -1;
          nd.value = -acc.g_total / (acc.h_total + params.lambda);
          continue;
        }
        any_split = true;
        nd.feature = acc.best_feat;
        nd.threshold = acc.best_thr;
        nd.left = static_cast<int>(tree.nodes.size());
        nd.right = static_cast<int>(tree.nodes.size() + 1);
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        NodeAcc l, r;
        l.tree_node = nd.left;
        r.tree_node = nd.right;
        next.push_back(l);
        next.push_back(r);
        new_slot_of_node.resize(tree.nodes.size(), -1);
        new_slot_of_node[static_cast<std::size_t>(nd.left)] = static_cast<int>(next.size()) - 2;
        new_slot_of_node[static_cast<std::size_t>(nd.right)] = static_cast<int>(next.size()) - 1;
      }
      if (!any_split) {
        frontier.clear();
        break;
      }
      // reroute sampled rows and rebuild child stats
      for (const std::uint32_t r : sample) {
        int nd = node_of[r];
        if (nd < 0) continue;
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(nd)];
        if (node.feature < 0) {
          node_of[r] = nd;  // settled in a leaf
          continue;
        }
        nd = (cs.cols.at(static_cast<std::size_t>(node.feature), r) < node.threshold) ? node.left
                                                                                      : node.right;
        node_of[r] = nd;
        const int slot = new_slot_of_node[static_cast<std::size_t>(nd)];
        NodeAcc& acc = next[static_cast<std::size_t>(slot)];
        acc.g_total += grad[r];
        acc.h_total += hess[r];
        ++acc.count;
      }
      frontier = std::move(next);
      slot_of_node = std::move(new_slot_of_node);
    }
    // depth limit reached: finish remaining frontier nodes as leaves
    for (auto& acc : frontier) {
      TreeNode& nd = tree.nodes[static_cast<std::size_t>(acc.tree_node)];
      nd.feature = -1;
      nd.value = -acc.g_total / (acc.h_total + params.lambda);
    }
    for (const std::uint32_t r : sample) node_of[r] = -1;

    // margins update for the whole training view
    for (const std::uint32_t r : view) margin[r] += params.eta * tree.leaf_value(data.x.row(r));
    model.trees.push_back(std::move(tree));

    double ll = 0.0;
    for (const std::uint32_t r : view) {
      const double prob = clamp_prob(sigmoid(margin[r]));
      ll -= data.y[r] ? std::log(prob) : std::log(1.0 - prob);
    }
    model.train_logloss.push_back(ll / static_cast<double>(view.size()));
  }
  return model;
}

std::vector<double> predict_proba(const GBTModel& model, const Dataset& data,
                                  const std::vector<std::uint32_t>& rows) {
  if (data.width() != model.n_features)
    throw std::invalid_argument("predict_proba: feature width mismatch");
  std::vector<double> out;
  out.reserve(rows.size());
  const double base_margin = logit(model.params.base_score);
  for (const std::uint32_t r : rows) {
    double m = base_margin;
    for (const auto& tree : model.trees) m += model.params.eta * tree.leaf_value(data.x.row(r));
    out.push_back(clamp_prob(sigmoid(m)));
  }
  return out;
}

}  // namespace ses::learn
