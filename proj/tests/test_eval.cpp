#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "ses/eval.hpp"
#include "ses/util/rng.hpp"

using namespace ses;

namespace {

// O(n^2) pair-counting oracle with half credit for ties
double auc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) num += 1.0;
      else if (s[i] == s[j]) num += 0.5;
    }
  }
  return num / pairs;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("auc basics") {
  CHECK(eval::auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == doctest::Approx(1.0));
  CHECK(eval::auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == doctest::Approx(0.5));
  CHECK_THROWS_AS((void)eval::auc({0.1, 0.2}, {1, 1}), std::invalid_argument);
}

TEST_CASE("auc equals the pair-counting oracle on 200 random instances") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 10 + rng.uniform_int(std::uint64_t{491});
    std::vector<double> s(n);
    std::vector<int> y(n);
    // coarse score grid forces plenty of ties
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_int(std::uint64_t{20})) / 19.0;
      y[i] = rng.uniform() < 0.4 ? 1 : 0;
    }
    y[0] = 0;
    y[1] = 1;
    CHECK(std::abs(eval::auc(s, y) - auc_oracle(s, y)) < 1e-12);
  }
}

TEST_CASE("auc invariances") {
  Rng rng(12);
  std::vector<double> s(300);
  std::vector<int> y(300);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    y[i] = rng.uniform() < 0.5 ? 1 : 0;
  }
  y[0] = 0;
  y[1] = 1;
  const double base = eval::auc(s, y);
  // strictly increasing transform
  std::vector<double> t(s);
  for (auto& v : t) v = std::exp(3.0 * v) + 1.0;
  CHECK(eval::auc(t, y) == doctest::Approx(base).epsilon(1e-12));
  // complement symmetry
  std::vector<int> yc(y);
  for (auto& v : yc) v = 1 - v;
  CHECK(eval::auc(s, y) + eval::auc(s, yc) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("roc curve endpoints, monotonicity and area consistency") {
  Rng rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 20 + rng.uniform_int(std::uint64_t{300});
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_int(std::uint64_t{15})) / 14.0;
      y[i] = rng.uniform() < 0.5 ? 1 : 0;
    }
    y[0] = 0;
    y[1] = 1;
    const auto curve = eval::roc_curve(s, y);
    CHECK(curve.points.front().fpr == 0.0);
    CHECK(curve.points.front().tpr == 0.0);
    CHECK(curve.points.back().fpr == doctest::Approx(1.0));
    CHECK(curve.points.back().tpr == doctest::Approx(1.0));
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
      CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
    }
    CHECK(std::abs(curve.auc - eval::auc(s, y)) < 1e-12);
  }
}

TEST_CASE("roc on perfect and random scores") {
  const auto perfect = eval::roc_curve({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1});
  bool through_corner = false;
  for (const auto& p : perfect.points)
    if (p.fpr == 0.0 && p.tpr == 1.0) through_corner = true;
  CHECK(through_corner);

  Rng rng(14);
  std::vector<double> s(10000);
  std::vector<int> y(10000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    y[i] = rng.uniform() < 0.5 ? 1 : 0;
  }
  CHECK(std::abs(eval::roc_curve(s, y).auc - 0.5) < 0.03);
}

TEST_CASE("precision/recall/f1") {
  const auto perfect = eval::precision_recall_f1({0, 1, 0, 1}, {0, 1, 0, 1});
  CHECK(perfect.low.precision == doctest::Approx(1.0));
  CHECK(perfect.high.f1 == doctest::Approx(1.0));

  const auto all_low = eval::precision_recall_f1({0, 0, 0, 0}, {0, 1, 0, 1});
  CHECK(all_low.high.precision == 0.0);
  CHECK(all_low.high.degenerate);

  // random confusion table vs direct counting
  Rng rng(15);
  std::vector<int> pred(500), truth(500);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pred[i] = rng.uniform() < 0.45 ? 1 : 0;
    truth[i] = rng.uniform() < 0.55 ? 1 : 0;
  }
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 1 && truth[i] == 1) tp += 1;
    if (pred[i] == 1 && truth[i] == 0) fp += 1;
    if (pred[i] == 0 && truth[i] == 1) fn += 1;
  }
  const auto cs = eval::precision_recall_f1(pred, truth);
  CHECK(cs.high.precision == doctest::Approx(tp / (tp + fp)).epsilon(1e-12));
  CHECK(cs.high.recall == doctest::Approx(tp / (tp + fn)).epsilon(1e-12));
  const double f1 = 2 * cs.high.precision * cs.high.recall / (cs.high.precision + cs.high.recall);
  CHECK(cs.high.f1 == doctest::Approx(f1).epsilon(1e-12));
}

TEST_CASE("agreement and kappa") {
  const auto same = eval::agreement({0, 1, 0, 1}, {0, 1, 0, 1});
  CHECK(same.percent_agreement == doctest::Approx(1.0));
  CHECK(same.kappa == doctest::Approx(1.0));

  // 2x2 table fixed by hand: counts 40,10 / 20,30 -> po 0.7, pe 0.5, kappa 0.4
  std::vector<int> a, b;
  auto push = [&](int x, int y, int count) {
    for (int i = 0; i < count; ++i) {
      a.push_back(x);
      b.push_back(y);
    }
  };
  push(0, 0, 40);
  push(0, 1, 10);
  push(1, 0, 20);
  push(1, 1, 30);
  const auto stats = eval::agreement(a, b);
  CHECK(stats.percent_agreement == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(stats.kappa == doctest::Approx(0.4).epsilon(1e-12));

  // independent labels: kappa near zero
  Rng rng(16);
  std::vector<int> u(10000), v(10000);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = rng.uniform() < 0.5 ? 1 : 0;
    v[i] = rng.uniform() < 0.5 ? 1 : 0;
  }
  CHECK(std::abs(eval::agreement(u, v).kappa) < 0.05);

  // degenerate marginals: expected agreement 1
  const auto degen = eval::agreement({1, 1, 1}, {1, 1, 1});
  CHECK(degen.kappa == 0.0);
  CHECK(degen.degenerate);
}

}  // TEST_SUITE
