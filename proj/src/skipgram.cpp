#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ses/semantics.hpp"
#include "ses/util/rng.hpp"

namespace ses::semantics {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double dot(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

// Sentences = vocabulary index sequences, one per tweet, in deterministic
// user/time order.
std::vector<std::vector<std::size_t>> index_sentences(
    const std::map<std::string, corpus::UserTimeline>& timelines, const Vocabulary& vocab) {
  std::vector<std::vector<std::size_t>> sentences;
  for (const auto& [_, tl] : timelines) {
    for (const auto& tweet : tl.tweets) {
      const auto tokens = corpus::tokenize(corpus::clean_text(tweet.text));
      std::vector<std::size_t> ids;
      ids.reserve(tokens.size());
      for (const auto& t : tokens) {
        if (const auto idx = vocab.lookup(t)) ids.push_back(*idx);
      }
      if (ids.size() >= 2) sentences.push_back(std::move(ids));
    }
  }
  return sentences;
}

}  // namespace

double sgns_pair_loss(const std::vector<double>& center, const std::vector<double>& context,
                      const std::vector<std::vector<double>>& negatives) {
  const std::size_t d = center.size();
  double loss = -std::log(std::max(1e-300, sigmoid(dot(center.data(), context.data(), d))));
  for (const auto& neg : negatives)
    loss += -std::log(std::max(1e-300, sigmoid(-dot(center.data(), neg.data(), d))));
  return loss;
}

SgnsGrad sgns_pair_grad(const std::vector<double>& center, const std::vector<double>& context,
                        const std::vector<std::vector<double>>& negatives) {
  const std::size_t d = center.size();
  SgnsGrad g;
  g.d_center.assign(d, 0.0);
  g.d_context.assign(d, 0.0);
  g.d_negatives.assign(negatives.size(), std::vector<double>(d, 0.0));

  const double pos_err = sigmoid(dot(center.data(), context.data(), d)) - 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    g.d_center[i] += pos_err * context[i];
    g.d_context[i] = pos_err * center[i];
  }
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    const double neg_err = sigmoid(dot(center.data(), negatives[k].data(), d));
    for (std::size_t i = 0; i < d; ++i) {
      g.d_center[i] += neg_err * negatives[k][i];
      g.d_negatives[k][i] = neg_err * center[i];
    }
  }
  return g;
}

Vocabulary build_vocabulary(const std::map<std::string, corpus::UserTimeline>& timelines,
                            std::size_t min_count) {
  if (min_count < 1) throw std::invalid_argument("build_vocabulary: min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& [_, tl] : timelines) {
    for (const auto& tweet : tl.tweets) {
      for (const auto& tok : corpus::tokenize(corpus::clean_text(tweet.text))) ++counts[tok];
    }
  }
  if (counts.empty()) throw std::invalid_argument("build_vocabulary: empty corpus");
  Vocabulary v;
  for (const auto& [word, count] : counts) {
    if (count >= min_count) {
      v.words.push_back(word);
      v.counts.push_back(count);
    }
  }
  if (v.words.empty()) throw std::invalid_argument("build_vocabulary: nothing above min_count");
  std::vector<std::size_t> order(v.words.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (v.counts[a] != v.counts[b]) return v.counts[a] > v.counts[b];
    return v.words[a] < v.words[b];
  });
  Vocabulary out;
  out.words.reserve(order.size());
  out.counts.reserve(order.size());
  for (const std::size_t i : order) {
    out.index[v.words[i]] = out.words.size();
    out.words.push_back(v.words[i]);
    out.counts.push_back(v.counts[i]);
  }
  return out;
}

EmbeddingMatrix train_skipgram(const std::map<std::string, corpus::UserTimeline>& timelines,
                               const Vocabulary& vocab, const SkipgramParams& params) {
  const std::size_t v_size = vocab.size();
  const std::size_t d = params.dim;
  if (v_size == 0) throw std::invalid_argument("train_skipgram: empty vocabulary");
  if (v_size < params.negatives + 1)
    throw std::invalid_argument("train_skipgram: vocabulary smaller than negatives+1");
  if (d == 0 || params.window == 0 || params.epochs == 0 || params.learning_rate <= 0.0)
    throw std::invalid_argument("train_skipgram: hyperparameters must be positive");

  const auto sentences = index_sentences(timelines, vocab);

  Rng rng(params.seed);
  EmbeddingMatrix emb;
  emb.params = params;
  emb.vectors = Mat(v_size, d);
  Mat context(v_size, d, 0.0);
  for (std::size_t i = 0; i < v_size; ++i)
    for (std::size_t j = 0; j < d; ++j)
      emb.vectors.at(i, j) = (rng.uniform() - 0.5) / static_cast<double>(d);

  // cumulative unigram^(3/4) table for negative sampling
  std::vector<double> cum(v_size);
  double acc = 0.0;
  for (std::size_t i = 0; i < v_size; ++i) {
    acc += std::pow(static_cast<double>(vocab.counts[i]), 0.75);
    cum[i] = acc;
  }
  auto sample_negative = [&](std::size_t avoid) {
    for (int tries = 0; tries < 32; ++tries) {
      const double r = rng.uniform() * acc;
      const std::size_t idx = static_cast<std::size_t>(
          std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
      const std::size_t clamped = std::min(idx, v_size - 1);
      if (clamped != avoid) return clamped;
    }
    return avoid == 0 ? std::size_t{1} : std::size_t{0};
  };

  std::size_t total_centers = 0;
  for (const auto& s : sentences) total_centers += s.size();
  total_centers *= params.epochs;
  std::size_t processed = 0;

  std::vector<double> d_center(d);
  std::vector<std::size_t> negs(params.negatives);

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t loss_pairs = 0;
    for (const auto& sent : sentences) {
      for (std::size_t i = 0; i < sent.size(); ++i) {
        const double progress =
            total_centers ? static_cast<double>(processed) / static_cast<double>(total_centers) : 0.0;
        const double lr = params.learning_rate * std::max(1e-4, 1.0 - progress);
        ++processed;
        const std::size_t center = sent[i];
        double* u = emb.vectors.row(center);
        const std::size_t lo = (i >= params.window) ? i - params.window : 0;
        const std::size_t hi = std::min(sent.size() - 1, i + params.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const std::size_t ctx = sent[j];
          for (std::size_t k = 0; k < params.negatives; ++k) negs[k] = sample_negative(ctx);

          // forward + backward in place
          double* vc = context.row(ctx);
          const double pos_dot = dot(u, vc, d);
          const double pos_sig = sigmoid(pos_dot);
          loss_sum += -std::log(std::max(1e-300, pos_sig));
          const double pos_err = pos_sig - 1.0;
          for (std::size_t t = 0; t < d; ++t) d_center[t] = pos_err * vc[t];
          for (std::size_t t = 0; t < d; ++t) vc[t] -= lr * pos_err * u[t];
          for (std::size_t k = 0; k < params.negatives; ++k) {
            double* vn = context.row(negs[k]);
            const double neg_sig = sigmoid(dot(u, vn, d));
            loss_sum += -std::log(std::max(1e-300, 1.0 - neg_sig));
            for (std::size_t t = 0; t < d; ++t) d_center[t] += neg_sig * vn[t];
            for (std::size_t t = 0; t < d; ++t) vn[t] -= lr * neg_sig * u[t];
          }
          for (std::size_t t = 0; t < d; ++t) u[t] -= lr * d_center[t];
          ++loss_pairs;
        }
      }
    }
    emb.epoch_losses.push_back(loss_pairs ? loss_sum / static_cast<double>(loss_pairs) : 0.0);
  }
  return emb;
}

}  // namespace ses::semantics
