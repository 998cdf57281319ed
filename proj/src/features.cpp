#include "ses/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ses/util/hash.hpp"
#include "ses/util/text.hpp"

namespace ses::features {

UserDocument build_document(const corpus::UserTimeline& timeline) {
  UserDocument doc;
  doc.user_id = timeline.user_id;
  auto ingest = [&](const std::string& raw) {
    const auto tokens = corpus::tokenize(corpus::clean_text(raw));
    doc.token_count += tokens.size();
    for (const auto& t : tokens) ++doc.unigrams[t];
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) ++doc.bigrams[tokens[i] + " " + tokens[i + 1]];
  };
  ingest(timeline.profile_description);
  for (const auto& tweet : timeline.tweets) ingest(tweet.text);
  return doc;
}

UserLevelFeatures user_level_features(const corpus::UserTimeline& tl) {
  UserLevelFeatures f;
  const double raw = static_cast<double>(std::max<long long>(tl.raw_tweet_count, 0));
  f.values[0] = static_cast<double>(tl.retweet_count);
  f.values[1] = raw > 0 ? static_cast<double>(tl.retweet_count) / raw : 0.0;
  f.values[2] = static_cast<double>(tl.mention_total);
  f.values[3] = raw > 0 ? static_cast<double>(tl.mention_total) / raw : 0.0;
  f.values[4] = static_cast<double>(tl.friends);
  f.values[5] = static_cast<double>(tl.followers);
  if (tl.followers > 0) {
    f.values[6] = static_cast<double>(tl.friends) / static_cast<double>(tl.followers);
  } else {
    f.values[6] = 0.0;
    f.zero_followers = true;
  }
  return f;
}

namespace {

struct Scored {
  const std::string* gram;
  double score;       // max over documents of tf * idf
  std::size_t total;  // corpus frequency, first tie-break
};

std::vector<std::string> top_ngrams(const std::vector<UserDocument>& docs, bool bigram,
                                    std::size_t want) {
  const double n_docs = static_cast<double>(docs.size());
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats;  // gram -> (df, total)
  std::unordered_map<std::string, std::size_t> max_tf;
  for (const auto& d : docs) {
    const auto& grams = bigram ? d.bigrams : d.unigrams;
    for (const auto& [g, count] : grams) {
      auto& s = stats[g];
      s.first += 1;
      s.second += count;
      auto& m = max_tf[g];
      m = std::max(m, count);
    }
  }
  std::vector<Scored> scored;
  scored.reserve(stats.size());
  for (const auto& [g, s] : stats) {
    const double idf = std::log(n_docs / static_cast<double>(s.first));
    scored.push_back({&g, static_cast<double>(max_tf[g]) * idf, s.second});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.total != b.total) return a.total > b.total;
    return *a.gram < *b.gram;
  });
  std::vector<std::string> out;
  out.reserve(std::min(want, scored.size()));
  for (std::size_t i = 0; i < scored.size() && i < want; ++i) out.push_back(*scored[i].gram);
  return out;
}

}  // namespace

NgramSelection select_ngrams(const std::vector<UserDocument>& documents, std::size_t n1_count,
                             std::size_t n2_count) {
  if (documents.empty()) throw std::invalid_argument("select_ngrams: no documents");
  NgramSelection sel;
  sel.unigrams = top_ngrams(documents, false, n1_count);
  sel.bigrams = top_ngrams(documents, true, n2_count);
  sel.padded_unigrams = n1_count - sel.unigrams.size();
  sel.padded_bigrams = n2_count - sel.bigrams.size();
  return sel;
}

namespace {
std::string pad_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03zu", prefix, i);
  return buf;
}
}  // namespace

FeatureSchema build_schema(const NgramSelection& selection, std::size_t n_topics) {
  FeatureSchema s;
  s.names = {"u_retweet_count", "u_retweet_rate",  "u_mention_count",         "u_mention_rate",
             "u_friends",       "u_followers",     "u_friend_follower_ratio"};
  s.selected_unigrams = selection.unigrams;
  s.selected_bigrams = selection.bigrams;
  for (const auto& g : selection.unigrams) s.names.push_back("g1_" + g);
  for (std::size_t i = 0; i < selection.padded_unigrams; ++i) s.names.push_back(pad_name("g1_pad_", i));
  for (const auto& g : selection.bigrams) s.names.push_back("g2_" + g);
  for (std::size_t i = 0; i < selection.padded_bigrams; ++i) s.names.push_back(pad_name("g2_pad_", i));
  for (std::size_t t = 0; t < n_topics; ++t) s.names.push_back(pad_name("t_", t + 1));
  s.n_unigrams = selection.unigrams.size() + selection.padded_unigrams;
  s.n_bigrams = selection.bigrams.size() + selection.padded_bigrams;
  s.n_topics = n_topics;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& name : s.names) {
    h = fnv1a64(name, h);
    h = fnv1a64("\x1f", h);
  }
  s.version_hash = hex64(h);
  return s;
}

FeatureVector assemble(const corpus::UserTimeline& timeline, const UserDocument& doc,
                       const FeatureSchema& schema, const std::vector<double>& topic_distribution,
                       const std::string& expected_schema_hash) {
  if (schema.version_hash != expected_schema_hash)
    throw std::invalid_argument("assemble: schema hash mismatch (" + schema.version_hash +
                                " vs " + expected_schema_hash + ")");
  if (topic_distribution.size() != schema.n_topics)
    throw std::invalid_argument("assemble: topic distribution size mismatch");

  FeatureVector fv;
  fv.user_id = timeline.user_id;
  fv.schema_hash = schema.version_hash;
  fv.values.reserve(schema.size());

  const auto ul = user_level_features(timeline);
  fv.values.insert(fv.values.end(), ul.values.begin(), ul.values.end());

  const double denom = doc.token_count > 0 ? static_cast<double>(doc.token_count) : 0.0;
  auto rel_freq = [&](const std::unordered_map<std::string, std::size_t>& grams,
                      const std::string& g) {
    if (denom == 0.0) return 0.0;
    const auto it = grams.find(g);
    return it == grams.end() ? 0.0 : static_cast<double>(it->second) / denom;
  };
  for (const auto& g : schema.selected_unigrams) fv.values.push_back(rel_freq(doc.unigrams, g));
  for (std::size_t i = schema.selected_unigrams.size(); i < schema.n_unigrams; ++i)
    fv.values.push_back(0.0);
  for (const auto& g : schema.selected_bigrams) fv.values.push_back(rel_freq(doc.bigrams, g));
  for (std::size_t i = schema.selected_bigrams.size(); i < schema.n_bigrams; ++i)
    fv.values.push_back(0.0);
  fv.values.insert(fv.values.end(), topic_distribution.begin(), topic_distribution.end());
  return fv;
}

void save_schema(const FeatureSchema& schema, const std::string& path,
                 const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write schema: " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "# schema_hash=" << schema.version_hash << " user_level=" << schema.n_user_level
      << " unigrams=" << schema.n_unigrams << " bigrams=" << schema.n_bigrams
      << " topics=" << schema.n_topics << " real_unigrams=" << schema.selected_unigrams.size()
      << " real_bigrams=" << schema.selected_bigrams.size() << "\n";
  for (const auto& name : schema.names) out << name << "\n";
}

FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema: " + path);
  FeatureSchema s;
  std::size_t real_uni = 0, real_bi = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (const auto& kv : split_ws(line.substr(1))) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        long long v = 0;
        if (!parse_long(kv.substr(eq + 1), v)) continue;
        if (key == "unigrams") s.n_unigrams = static_cast<std::size_t>(v);
        else if (key == "bigrams") s.n_bigrams = static_cast<std::size_t>(v);
        else if (key == "topics") s.n_topics = static_cast<std::size_t>(v);
        else if (key == "real_unigrams") real_uni = static_cast<std::size_t>(v);
        else if (key == "real_bigrams") real_bi = static_cast<std::size_t>(v);
      }
      continue;
    }
    s.names.push_back(line);
  }
  for (std::size_t i = 0; i < real_uni; ++i)
    s.selected_unigrams.push_back(s.names.at(s.n_user_level + i).substr(3));
  for (std::size_t i = 0; i < real_bi; ++i)
    s.selected_bigrams.push_back(s.names.at(s.n_user_level + s.n_unigrams + i).substr(3));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& name : s.names) {
    h = fnv1a64(name, h);
    h = fnv1a64("\x1f", h);
  }
  s.version_hash = hex64(h);
  return s;
}

}  // namespace ses::features
