#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ses/corpus.hpp"
#include "ses/util/mat.hpp"

namespace ses::semantics {

struct Vocabulary {
  std::vector<std::string> words;   // descending frequency, then lexicographic
  std::vector<std::size_t> counts;  // aligned with words
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return words.size(); }
  std::optional<std::size_t> lookup(const std::string& w) const {
    const auto it = index.find(w);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

struct SkipgramParams {
  std::size_t dim = 50;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;
};

struct EmbeddingMatrix {
  Mat vectors;  // V x dim, center-word embeddings
  SkipgramParams params;
  std::size_t min_count = 1;
  std::vector<double> epoch_losses;  // mean pair loss per epoch
};

// Tokens with corpus frequency >= min_count over the cleaned tweets.
Vocabulary build_vocabulary(const std::map<std::string, corpus::UserTimeline>& timelines,
                            std::size_t min_count);

// Skip-gram with negative sampling; negatives drawn from the unigram
// distribution raised to 3/4. Single pass order is fixed, so a fixed seed
// reproduces the matrix bit for bit.
EmbeddingMatrix train_skipgram(const std::map<std::string, corpus::UserTimeline>& timelines,
                               const Vocabulary& vocab, const SkipgramParams& params);

// Loss and gradients of one (center, context, negatives) step; the trainer
// uses these and the tests difference them numerically.
double sgns_pair_loss(const std::vector<double>& center, const std::vector<double>& context,
                      const std::vector<std::vector<double>>& negatives);
struct SgnsGrad {
  std::vector<double> d_center;
  std::vector<double> d_context;
  std::vector<std::vector<double>> d_negatives;
};
SgnsGrad sgns_pair_grad(const std::vector<double>& center, const std::vector<double>& context,
                        const std::vector<std::vector<double>>& negatives);

// V x V cosine similarities with negatives clamped to 0; unit diagonal.
// Throws naming the word if a row has zero norm.
Mat similarity_matrix(const EmbeddingMatrix& embedding, const Vocabulary& vocab);

struct TopicModel {
  std::size_t k = 0;
  std::vector<int> topic_of_word;  // vocab index -> topic in [0, k)
  std::vector<std::string> words;  // aligned with topic_of_word
  std::map<std::string, std::string> labels;  // optional human-supplied topic labels
};

struct SpectralParams {
  std::size_t k = 100;
  std::uint64_t seed = 0;
  std::size_t kmeans_restarts = 50;
  std::size_t kmeans_max_iter = 100;
};

// Normalized-Laplacian spectral clustering: L = I - D^-1/2 M D^-1/2, rows of
// the K bottom eigenvectors unit-normalized, then seeded k-means++ with
// restarts (best inertia wins). Validates the similarity invariants.
TopicModel spectral_cluster(const Mat& similarity, const std::vector<std::string>& words,
                            const SpectralParams& params);

// Ascending eigenvalues of the normalized Laplacian of `similarity`.
std::vector<double> laplacian_eigenvalues(const Mat& similarity);

// Normalized usage frequency of vocabulary words per topic; exact zero vector
// when the user used no vocabulary word.
std::vector<double> user_topic_distribution(const corpus::UserTimeline& timeline,
                                            const Vocabulary& vocab, const TopicModel& model);

struct TopicCorrelation {
  Mat pearson;                   // K x K, zero-variance pairs set to 0
  std::vector<std::size_t> order;  // display permutation from average-linkage clustering
  std::vector<bool> zero_variance;  // per topic
};

TopicCorrelation topic_correlation(const std::vector<std::vector<double>>& distributions);

struct TopicIncomeStat {
  std::size_t topic = 0;  // 0-based
  std::optional<double> mentioner_mean;
  std::optional<double> non_mentioner_mean;
  std::size_t mentioners = 0;
  std::size_t non_mentioners = 0;
};

// Mean income of users with strictly positive topic usage vs the rest.
std::vector<TopicIncomeStat> topic_income_discrimination(
    const std::vector<std::pair<std::string, std::vector<double>>>& distributions,
    const std::map<std::string, double>& incomes);

// Persistence: text dump with metadata header / word-topic table.
void save_embedding(const EmbeddingMatrix& e, const Vocabulary& vocab, const std::string& path,
                    const std::string& header_comment);
EmbeddingMatrix load_embedding(const std::string& path, Vocabulary& vocab_out);

}  // namespace ses::semantics
