#include "ses/eval.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ses::eval {

namespace {

void check_binary_both(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("scores/labels must be non-empty and equal length");
  bool has0 = false;
  bool has1 = false;
  for (const int y : labels) {
    if (y == 0) has0 = true;
    else if (y == 1) has1 = true;
    else throw std::invalid_argument("labels must be 0 or 1");
  }
  if (!has0 || !has1) throw std::invalid_argument("both classes must be present");
}

}  // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_binary_both(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // ranks i+1 .. j share the average rank
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

ROCCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_binary_both(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double n_pos = 0;
  double n_neg = 0;
  for (const int y : labels) (y == 1 ? n_pos : n_neg) += 1.0;

  ROCCurve curve;
  curve.points.push_back({0.0, 0.0});
  double tp = 0;
  double fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) tp += 1.0;
      else fp += 1.0;
    }
    curve.points.push_back({fp / n_neg, tp / n_pos});
    i = j;
  }
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  curve.auc = area;
  return curve;
}

ConfusionSummary precision_recall_f1(const std::vector<int>& pred_labels,
                                     const std::vector<int>& true_labels) {
  if (pred_labels.size() != true_labels.size())
    throw std::invalid_argument("prediction/label length mismatch");
  // counts[t][p]
  double c[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < pred_labels.size(); ++i) {
    const int t = true_labels[i] ? 1 : 0;
    const int p = pred_labels[i] ? 1 : 0;
    c[t][p] += 1.0;
  }
  ConfusionSummary s;
  for (int cls = 0; cls < 2; ++cls) {
    ClassMetrics& m = (cls == 0) ? s.low : s.high;
    const double tp = c[cls][cls];
    const double fp = c[1 - cls][cls];
    const double fn = c[cls][1 - cls];
    m.support = static_cast<std::size_t>(c[cls][0] + c[cls][1]);
    if (tp + fp > 0) {
      m.precision = tp / (tp + fp);
    } else {
      m.precision = 0.0;
      m.degenerate = true;
    }
    if (tp + fn > 0) {
      m.recall = tp / (tp + fn);
    } else {
      m.recall = 0.0;
      m.degenerate = true;
    }
    if (m.precision + m.recall > 0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
      m.f1 = 0.0;
      m.degenerate = true;
    }
  }
  return s;
}

AgreementStats agreement(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("agreement: label vectors must be non-empty and equal length");
  const double n = static_cast<double>(a.size());
  double match = 0.0;
  double pa[2] = {0, 0};
  double pb[2] = {0, 0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int x = a[i] ? 1 : 0;
    const int y = b[i] ? 1 : 0;
    if (x == y) match += 1.0;
    pa[x] += 1.0;
    pb[y] += 1.0;
  }
  AgreementStats s;
  s.percent_agreement = match / n;
  const double pe = (pa[0] / n) * (pb[0] / n) + (pa[1] / n) * (pb[1] / n);
  if (pe >= 1.0) {
    s.kappa = 0.0;
    s.degenerate = true;
  } else {
    s.kappa = (s.percent_agreement - pe) / (1.0 - pe);
  }
  return s;
}

}  // namespace ses::eval
