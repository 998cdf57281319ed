#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "ses/semantics.hpp"
#include "ses/util/rng.hpp"

namespace ses::semantics {

namespace {

void validate_similarity(const Mat& m) {
  if (m.rows != m.cols || m.rows == 0) throw std::invalid_argument("similarity matrix must be square");
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (std::abs(m.at(i, i) - 1.0) > 1e-9)
      throw std::invalid_argument("similarity matrix must have unit diagonal");
    for (std::size_t j = 0; j < m.cols; ++j) {
      const double v = m.at(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("similarity entries must be in [0,1]");
      if (std::abs(v - m.at(j, i)) > 1e-9)
        throw std::invalid_argument("similarity matrix must be symmetric");
    }
  }
}

Eigen::MatrixXd normalized_laplacian(const Mat& m) {
  const auto n = static_cast<Eigen::Index>(m.rows);
  Eigen::MatrixXd sim(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      sim(i, j) = m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  // full row sums; the unit diagonal keeps every degree >= 1
  Eigen::VectorXd dinv_sqrt = sim.rowwise().sum().cwiseInverse().cwiseSqrt();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n) -
                        dinv_sqrt.asDiagonal() * sim * dinv_sqrt.asDiagonal();
  // symmetrize against rounding so the self-adjoint solver sees an exact input
  lap = ((lap + lap.transpose()) / 2.0).eval();
  return lap;
}

struct KmeansResult {
  std::vector<int> assignment;
  double inertia = std::numeric_limits<double>::infinity();
};

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

KmeansResult kmeans_once(const Mat& pts, std::size_t k, Rng& rng, std::size_t max_iter) {
  const std::size_t n = pts.rows;
  const std::size_t d = pts.cols;
  Mat centroids(k, d);

  // k-means++ seeding
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  std::size_t first = static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  std::copy(pts.row(first), pts.row(first) + d, centroids.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist2[i] = std::min(dist2[i], sq_dist(pts.row(i), centroids.row(c - 1), d));
      total += dist2[i];
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc >= r) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    }
    std::copy(pts.row(chosen), pts.row(chosen) + d, centroids.row(c));
  }

  std::vector<int> assign(n, -1);
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double s = sq_dist(pts.row(i), centroids.row(c), d);
        if (s < best) {
          best = s;
          best_c = static_cast<int>(c);
        }
      }
      if (assign[i] != best_c) {
        assign[i] = best_c;
        changed = true;
      }
    }
    std::fill(sizes.begin(), sizes.end(), 0);
    std::fill(centroids.data.begin(), centroids.data.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(assign[i]);
      ++sizes[c];
      for (std::size_t t = 0; t < d; ++t) centroids.at(c, t) += pts.at(i, t);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        // move the centroid onto the point farthest from its own centroid
        double worst = -1.0;
        std::size_t worst_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto ci = static_cast<std::size_t>(assign[i]);
          if (sizes[ci] <= 1) continue;
          const double s = sq_dist(pts.row(i), centroids.row(ci), d);
          if (s > worst) {
            worst = s;
            worst_i = i;
          }
        }
        std::copy(pts.row(worst_i), pts.row(worst_i) + d, centroids.row(c));
        sizes[c] = 1;  // provisional; fixed on the next assignment sweep
        changed = true;
        continue;
      }
      for (std::size_t t = 0; t < d; ++t) centroids.at(c, t) /= static_cast<double>(sizes[c]);
    }
    if (!changed) break;
  }

  KmeansResult res;
  res.assignment = assign;
  res.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    res.inertia += sq_dist(pts.row(i), centroids.row(static_cast<std::size_t>(assign[i])), d);
  return res;
}

}  // namespace

std::vector<double> laplacian_eigenvalues(const Mat& similarity) {
  validate_similarity(similarity);
  const Eigen::MatrixXd lap = normalized_laplacian(similarity);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  std::vector<double> ev(static_cast<std::size_t>(lap.rows()));
  for (Eigen::Index i = 0; i < lap.rows(); ++i) ev[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return ev;
}

TopicModel spectral_cluster(const Mat& similarity, const std::vector<std::string>& words,
                            const SpectralParams& params) {
  validate_similarity(similarity);
  const std::size_t v = similarity.rows;
  if (words.size() != v) throw std::invalid_argument("spectral_cluster: words/matrix size mismatch");
  if (params.k == 0 || params.k > v)
    throw std::invalid_argument("spectral_cluster: need 1 <= K <= vocabulary size");

  const Eigen::MatrixXd lap = normalized_laplacian(similarity);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  // rows of the K bottom eigenvectors, unit-normalized
  Mat pts(v, params.k);
  for (std::size_t i = 0; i < v; ++i) {
    double norm2 = 0.0;
    for (std::size_t c = 0; c < params.k; ++c) {
      const double val = solver.eigenvectors()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      pts.at(i, c) = val;
      norm2 += val * val;
    }
    if (norm2 > 1e-300) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t c = 0; c < params.k; ++c) pts.at(i, c) *= inv;
    }
  }

  Rng master(params.seed);
  KmeansResult best;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, params.kmeans_restarts); ++r) {
    Rng rng = master.child("kmeans", r);
    KmeansResult res = kmeans_once(pts, params.k, rng, params.kmeans_max_iter);
    if (res.inertia < best.inertia) best = std::move(res);
  }

  TopicModel model;
  model.k = params.k;
  model.words = words;
  model.topic_of_word = best.assignment;
  return model;
}

}  // namespace ses::semantics
