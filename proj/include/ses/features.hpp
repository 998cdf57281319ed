#pragma once

#include <array>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ses/corpus.hpp"

namespace ses::features {

// One user = one document: profile description + all tweets. 2-grams never
// cross a tweet (or the description) boundary.
struct UserDocument {
  std::string user_id;
  std::size_t token_count = 0;  // total 1-gram tokens
  std::unordered_map<std::string, std::size_t> unigrams;
  std::unordered_map<std::string, std::size_t> bigrams;
};

UserDocument build_document(const corpus::UserTimeline& timeline);

struct UserLevelFeatures {
  std::array<double, 7> values{};  // retweet count/rate, mention count/rate,
                                   // friends, followers, friends/followers
  bool zero_followers = false;     // ratio was defined as 0
};

UserLevelFeatures user_level_features(const corpus::UserTimeline& timeline);

struct NgramSelection {
  std::vector<std::string> unigrams;  // top n1 by max tf-idf
  std::vector<std::string> bigrams;   // top n2
  std::size_t padded_unigrams = 0;    // reserved always-zero slots, if short
  std::size_t padded_bigrams = 0;
};

// Rank by max-over-documents tf * ln(N/df); ties by total frequency then
// lexicographic. Pads with reserved names when the corpus is too small.
NgramSelection select_ngrams(const std::vector<UserDocument>& documents, std::size_t n1_count = 450,
                             std::size_t n2_count = 560);

struct FeatureSchema {
  std::vector<std::string> names;  // 7 user-level + n1 + n2 + K topics
  std::size_t n_user_level = 7;
  std::size_t n_unigrams = 0;
  std::size_t n_bigrams = 0;
  std::size_t n_topics = 0;
  std::vector<std::string> selected_unigrams;  // real (non-padding) entries
  std::vector<std::string> selected_bigrams;
  std::string version_hash;

  std::size_t size() const { return names.size(); }
};

FeatureSchema build_schema(const NgramSelection& selection, std::size_t n_topics);

struct FeatureVector {
  std::string user_id;
  std::vector<double> values;
  std::string schema_hash;
};

// n-gram blocks hold the user's relative frequency of each selected n-gram
// over the user's own token count (0 without tokens); the topic block is the
// user's topic distribution. Throws on schema-hash mismatch.
FeatureVector assemble(const corpus::UserTimeline& timeline, const UserDocument& doc,
                       const FeatureSchema& schema, const std::vector<double>& topic_distribution,
                       const std::string& expected_schema_hash);

void save_schema(const FeatureSchema& schema, const std::string& path,
                 const std::string& header_comment);
FeatureSchema load_schema(const std::string& path);

}  // namespace ses::features
