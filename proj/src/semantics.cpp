#include "ses/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ses/util/text.hpp"

namespace ses::semantics {

Mat similarity_matrix(const EmbeddingMatrix& embedding, const Vocabulary& vocab) {
  const std::size_t v = embedding.vectors.rows;
  const std::size_t d = embedding.vectors.cols;
  std::vector<double> norms(v);
  for (std::size_t i = 0; i < v; ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t < d; ++t) s += embedding.vectors.at(i, t) * embedding.vectors.at(i, t);
    norms[i] = std::sqrt(s);
    if (!(norms[i] > 0.0)) {
      const std::string word = (i < vocab.words.size()) ? vocab.words[i] : std::to_string(i);
      throw std::invalid_argument("similarity_matrix: zero-norm embedding for word '" + word + "'");
    }
  }
  Mat m(v, v);
  for (std::size_t i = 0; i < v; ++i) {
    m.at(i, i) = 1.0;
    for (std::size_t j = i + 1; j < v; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < d; ++t) s += embedding.vectors.at(i, t) * embedding.vectors.at(j, t);
      const double cos = s / (norms[i] * norms[j]);
      const double clamped = std::min(1.0, std::max(0.0, cos));
      m.at(i, j) = clamped;
      m.at(j, i) = clamped;
    }
  }
  return m;
}

std::vector<double> user_topic_distribution(const corpus::UserTimeline& timeline,
                                            const Vocabulary& vocab, const TopicModel& model) {
  if (model.topic_of_word.size() != vocab.size())
    throw std::invalid_argument("user_topic_distribution: model/vocabulary mismatch");
  std::vector<double> dist(model.k, 0.0);
  std::size_t total = 0;
  for (const auto& tweet : timeline.tweets) {
    for (const auto& tok : corpus::tokenize(corpus::clean_text(tweet.text))) {
      const auto idx = vocab.lookup(tok);
      if (!idx) continue;
      dist[static_cast<std::size_t>(model.topic_of_word[*idx])] += 1.0;
      ++total;
    }
  }
  if (total == 0) return dist;  // exact zero vector
  for (auto& v : dist) v /= static_cast<double>(total);
  return dist;
}

namespace {

// Average-linkage agglomerative clustering over distance 1-r; returns a leaf
// permutation for display.
std::vector<std::size_t> linkage_order(const Mat& corr) {
  const std::size_t k = corr.rows;
  struct Cluster {
    std::vector<std::size_t> leaves;
    bool alive = true;
  };
  std::vector<Cluster> clusters(k);
  for (std::size_t i = 0; i < k; ++i) clusters[i].leaves = {i};
  Mat dist(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) dist.at(i, j) = 1.0 - corr.at(i, j);

  std::vector<std::size_t> alive_ids(k);
  for (std::size_t i = 0; i < k; ++i) alive_ids[i] = i;

  while (alive_ids.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t a = 0; a < alive_ids.size(); ++a) {
      for (std::size_t b = a + 1; b < alive_ids.size(); ++b) {
        const std::size_t i = alive_ids[a];
        const std::size_t j = alive_ids[b];
        double sum = 0.0;
        for (const std::size_t li : clusters[i].leaves)
          for (const std::size_t lj : clusters[j].leaves) sum += dist.at(li, lj);
        const double avg =
            sum / static_cast<double>(clusters[i].leaves.size() * clusters[j].leaves.size());
        if (avg < best) {
          best = avg;
          bi = i;
          bj = j;
        }
      }
    }
    auto& keep = clusters[bi];
    auto& drop = clusters[bj];
    keep.leaves.insert(keep.leaves.end(), drop.leaves.begin(), drop.leaves.end());
    drop.alive = false;
    alive_ids.erase(std::remove(alive_ids.begin(), alive_ids.end(), bj), alive_ids.end());
  }
  return clusters[alive_ids[0]].leaves;
}

}  // namespace

TopicCorrelation topic_correlation(const std::vector<std::vector<double>>& distributions) {
  if (distributions.size() < 2)
    throw std::invalid_argument("topic_correlation: need at least 2 users");
  const std::size_t n = distributions.size();
  const std::size_t k = distributions[0].size();
  for (const auto& d : distributions)
    if (d.size() != k) throw std::invalid_argument("topic_correlation: ragged distributions");

  std::vector<double> mean(k, 0.0);
  for (const auto& d : distributions)
    for (std::size_t t = 0; t < k; ++t) mean[t] += d[t];
  for (auto& m : mean) m /= static_cast<double>(n);

  std::vector<double> var(k, 0.0);
  std::vector<double> lo(k, std::numeric_limits<double>::infinity());
  std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
  for (const auto& d : distributions)
    for (std::size_t t = 0; t < k; ++t) {
      const double c = d[t] - mean[t];
      var[t] += c * c;
      lo[t] = std::min(lo[t], d[t]);
      hi[t] = std::max(hi[t], d[t]);
    }

  TopicCorrelation out;
  out.pearson = Mat(k, k);
  out.zero_variance.assign(k, false);
  // a column is constant when its range is empty; the naive variance can pick
  // up accumulation noise on constant columns
  for (std::size_t t = 0; t < k; ++t) out.zero_variance[t] = !(var[t] > 0.0) || lo[t] == hi[t];

  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      double r = 0.0;
      if (!out.zero_variance[a] && !out.zero_variance[b]) {
        double cov = 0.0;
        for (const auto& d : distributions) cov += (d[a] - mean[a]) * (d[b] - mean[b]);
        r = cov / std::sqrt(var[a] * var[b]);
        r = std::min(1.0, std::max(-1.0, r));
      }
      if (a == b && !out.zero_variance[a]) r = 1.0;
      out.pearson.at(a, b) = r;
      out.pearson.at(b, a) = r;
    }
  }
  out.order = linkage_order(out.pearson);
  return out;
}

std::vector<TopicIncomeStat> topic_income_discrimination(
    const std::vector<std::pair<std::string, std::vector<double>>>& distributions,
    const std::map<std::string, double>& incomes) {
  if (distributions.empty())
    throw std::invalid_argument("topic_income_discrimination: no distributions");
  const std::size_t k = distributions[0].second.size();
  for (const auto& [user, _] : distributions) {
    if (incomes.find(user) == incomes.end())
      throw std::invalid_argument("topic_income_discrimination: missing income for user " + user);
  }
  std::vector<TopicIncomeStat> stats(k);
  for (std::size_t t = 0; t < k; ++t) {
    double sum_m = 0.0, sum_n = 0.0;
    std::size_t cnt_m = 0, cnt_n = 0;
    for (const auto& [user, dist] : distributions) {
      const double income = incomes.at(user);
      if (dist[t] > 0.0) {
        sum_m += income;
        ++cnt_m;
      } else {
        sum_n += income;
        ++cnt_n;
      }
    }
    stats[t].topic = t;
    stats[t].mentioners = cnt_m;
    stats[t].non_mentioners = cnt_n;
    if (cnt_m) stats[t].mentioner_mean = sum_m / static_cast<double>(cnt_m);
    if (cnt_n) stats[t].non_mentioner_mean = sum_n / static_cast<double>(cnt_n);
  }
  return stats;
}

void save_embedding(const EmbeddingMatrix& e, const Vocabulary& vocab, const std::string& path,
                    const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write embedding: " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "# vocab=" << vocab.size() << " dim=" << e.params.dim << " window=" << e.params.window
      << " negatives=" << e.params.negatives << " epochs=" << e.params.epochs
      << " lr=" << fmt_double(e.params.learning_rate) << " seed=" << e.params.seed
      << " min_count=" << e.min_count << "\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.words[i] << '\t' << vocab.counts[i];
    for (std::size_t t = 0; t < e.params.dim; ++t) out << '\t' << fmt_double(e.vectors.at(i, t), 17);
    out << '\n';
  }
}

EmbeddingMatrix load_embedding(const std::string& path, Vocabulary& vocab_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding: " + path);
  EmbeddingMatrix e;
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (const auto& kv : split_ws(line.substr(1))) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        long long ival = 0;
        double dval = 0.0;
        if (key == "dim" && parse_long(val, ival)) e.params.dim = static_cast<std::size_t>(ival);
        else if (key == "window" && parse_long(val, ival)) e.params.window = static_cast<std::size_t>(ival);
        else if (key == "negatives" && parse_long(val, ival)) e.params.negatives = static_cast<std::size_t>(ival);
        else if (key == "epochs" && parse_long(val, ival)) e.params.epochs = static_cast<std::size_t>(ival);
        else if (key == "lr" && parse_double(val, dval)) e.params.learning_rate = dval;
        else if (key == "seed" && parse_long(val, ival)) e.params.seed = static_cast<std::uint64_t>(ival);
        else if (key == "min_count" && parse_long(val, ival)) e.min_count = static_cast<std::size_t>(ival);
      }
      continue;
    }
    const auto fields = split(line, '\t');
    if (fields.size() < 3) throw std::runtime_error("embedding: malformed row");
    long long count = 0;
    if (!parse_long(fields[1], count)) throw std::runtime_error("embedding: bad count");
    vocab_out.index[fields[0]] = vocab_out.words.size();
    vocab_out.words.push_back(fields[0]);
    vocab_out.counts.push_back(static_cast<std::size_t>(count));
    std::vector<double> vec;
    vec.reserve(fields.size() - 2);
    for (std::size_t i = 2; i < fields.size(); ++i) {
      double v = 0.0;
      if (!parse_double(fields[i], v)) throw std::runtime_error("embedding: bad value");
      vec.push_back(v);
    }
    rows.push_back(std::move(vec));
  }
  if (rows.empty()) throw std::runtime_error("embedding: empty file");
  e.vectors = Mat(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != e.vectors.cols) throw std::runtime_error("embedding: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), e.vectors.row(i));
  }
  return e;
}

}  // namespace ses::semantics
