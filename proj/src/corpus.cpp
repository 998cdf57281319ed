#include "ses/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "ses/util/text.hpp"

namespace ses::corpus {

namespace {

using json = nlohmann::json;

std::set<std::string>& emoticon_set() {
  // Lowercase whitespace-delimited emoticon tokens. Overridden by
  // load_emoticons_file; this built-in list covers the common ASCII ones.
  static std::set<std::string> set = {
      ":)", ":(", ":d", ":p", ":o",  ":s",  ":/",  ":\\", ":|",  ":3",  ":*",  ";)",  ";(",  ";p",
      ";d", ":-)", ":-(", ":-d", ":-p", ":-o", ":-s", ":-/", ":-\\", ":-|", ":-*", ":'(", ":'-(",
      "=)", "=(", "=d", "=p", "x)", "xd", "xdd", "xddd", "^^", "^_^", "o_o", "o.o", "-_-", "<3",
      "</3"};
  return set;
}

bool ci_match(const std::u32string& s, std::size_t pos, std::u32string_view pat) {
  if (pos + pat.size() > s.size()) return false;
  for (std::size_t k = 0; k < pat.size(); ++k) {
    if (to_lower_cp(s[pos + k]) != pat[k]) return false;
  }
  return true;
}

// One cleaning pass. clean_text applies it twice: punctuation stripping can
// uncover emoticon residues ("XD!" -> "xd") that only a second token scan
// removes, and the double pass makes the whole function idempotent.
std::string clean_pass(const std::string& raw) {
  std::u32string cps = utf8_decode(raw);
  std::u32string out;
  out.reserve(cps.size());

  // URL / mention / hashtag spans and emoji codepoints become spaces.
  std::size_t i = 0;
  while (i < cps.size()) {
    const Codepoint c = cps[i];
    if (ci_match(cps, i, U"http://") || ci_match(cps, i, U"https://") || ci_match(cps, i, U"www.")) {
      while (i < cps.size() && !is_space_cp(cps[i])) ++i;
      out.push_back(U' ');
      continue;
    }
    if ((c == U'@' || c == U'#') && i + 1 < cps.size() && is_word_cp(cps[i + 1])) {
      ++i;
      while (i < cps.size() && is_word_cp(cps[i])) ++i;
      out.push_back(U' ');
      continue;
    }
    if (is_emoji_cp(c)) {
      out.push_back(U' ');
      ++i;
      continue;
    }
    out.push_back(c);
    ++i;
  }

  // Drop whitespace-delimited emoticon tokens (case-insensitive).
  std::u32string kept;
  kept.reserve(out.size());
  std::size_t j = 0;
  while (j < out.size()) {
    while (j < out.size() && is_space_cp(out[j])) ++j;
    const std::size_t start = j;
    while (j < out.size() && !is_space_cp(out[j])) ++j;
    if (j > start) {
      std::u32string tok = out.substr(start, j - start);
      for (auto& cp : tok) cp = to_lower_cp(cp);
      if (emoticon_set().count(utf8_encode(tok)) == 0) {
        if (!kept.empty()) kept.push_back(U' ');
        kept += out.substr(start, j - start);
      }
    }
  }

  // Lowercase, keep letters and digits, everything else separates.
  std::u32string result;
  result.reserve(kept.size());
  bool pending_space = false;
  for (Codepoint c : kept) {
    c = to_lower_cp(c);
    if (is_kept_letter_cp(c) || is_digit_cp(c)) {
      if (pending_space && !result.empty()) result.push_back(U' ');
      pending_space = false;
      result.push_back(c);
    } else {
      pending_space = true;
    }
  }
  return utf8_encode(result);
}

bool get_opt_bool(const json& j, const char* key, bool& out) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    out = false;
    return true;
  }
  if (!it->is_boolean()) return false;
  out = it->get<bool>();
  return true;
}

// artifact tables are tab-separated, so ids with whitespace or control
// characters are rejected as malformed records
bool valid_user_id(const std::string& id) {
  if (id.empty()) return false;
  for (const char c : id) {
    const auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u == 0x7F) return false;
  }
  return true;
}

bool get_opt_count(const json& j, const char* key, int& out) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    out = 0;
    return true;
  }
  if (!it->is_number_integer() || it->get<long long>() < 0) return false;
  out = static_cast<int>(it->get<long long>());
  return true;
}

}  // namespace

void set_emoticons(const std::vector<std::string>& emoticons) {
  auto& set = emoticon_set();
  set.clear();
  for (const auto& e : emoticons) {
    std::u32string cps = utf8_decode(e);
    for (auto& cp : cps) cp = to_lower_cp(cp);
    set.insert(utf8_encode(cps));
  }
}

void load_emoticons_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open emoticon list: " + path);
  std::vector<std::string> emoticons;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty()) emoticons.push_back(t);
  }
  set_emoticons(emoticons);
}

std::string clean_text(const std::string& raw) { return clean_pass(clean_pass(raw)); }

std::vector<Token> tokenize(const std::string& cleaned) { return split_ws(cleaned); }

std::map<NGram, std::size_t> extract_ngrams(const std::vector<Token>& tokens, int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("extract_ngrams: n must be 1 or 2");
  std::map<NGram, std::size_t> out;
  if (n == 1) {
    for (const auto& t : tokens) ++out[t];
  } else {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) ++out[tokens[i] + " " + tokens[i + 1]];
  }
  return out;
}

std::vector<GeoTweet> parse_stream(std::istream& in, ParseStats& stats) {
  if (!in) throw std::runtime_error("tweet stream is unreadable");
  std::vector<GeoTweet> tweets;
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;  // comment/header lines
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      ++stats.malformed_lines;
      continue;
    }
    GeoTweet t;
    if (!j.contains("user_id") || !j["user_id"].is_string() ||
        !valid_user_id(j["user_id"].get<std::string>()) ||
        !j.contains("ts") || !j["ts"].is_number_integer() || j["ts"].get<long long>() <= 0 ||
        !j.contains("text") || !j["text"].is_string()) {
      ++stats.malformed_lines;
      continue;
    }
    t.user_id = j["user_id"].get<std::string>();
    t.timestamp = j["ts"].get<long long>();
    t.text = j["text"].get<std::string>();
    if (!get_opt_bool(j, "retweet", t.is_retweet) || !get_opt_bool(j, "place", t.is_place_tag) ||
        !get_opt_count(j, "mentions", t.mention_count) || !get_opt_count(j, "hashtags", t.hashtag_count)) {
      ++stats.malformed_lines;
      continue;
    }
    const bool has_lat = j.contains("lat") && !j["lat"].is_null();
    const bool has_lon = j.contains("lon") && !j["lon"].is_null();
    if (has_lat && has_lon && j["lat"].is_number() && j["lon"].is_number()) {
      const double lat = j["lat"].get<double>();
      const double lon = j["lon"].get<double>();
      if (lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0) {
        t.coordinates = LatLon{lat, lon};
      } else {
        ++stats.coordinates_dropped;
      }
    } else if (has_lat || has_lon) {
      ++stats.coordinates_dropped;
    }
    tweets.push_back(std::move(t));
    ++stats.records;
  }
  return tweets;
}

std::vector<GeoTweet> parse_stream_file(const std::string& path, ParseStats& stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tweet stream: " + path);
  return parse_stream(in, stats);
}

std::map<std::string, ProfileInfo> parse_profiles_file(const std::string& path, ParseStats& stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profiles file: " + path);
  std::map<std::string, ProfileInfo> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, '\t');
    if (first && fields.size() >= 1 && fields[0] == "user_id") {
      first = false;
      continue;  // header row
    }
    first = false;
    long long friends = 0;
    long long followers = 0;
    if (fields.size() < 4 || fields[0].empty() || !parse_long(fields[1], friends) ||
        !parse_long(fields[2], followers) || friends < 0 || followers < 0) {
      ++stats.malformed_lines;
      continue;
    }
    ProfileInfo p;
    p.friends = friends;
    p.followers = followers;
    p.description = fields[3];
    out[fields[0]] = std::move(p);
  }
  return out;
}

std::map<std::string, UserTimeline> build_timelines(const std::vector<GeoTweet>& tweets,
                                                    const std::map<std::string, ProfileInfo>& profiles) {
  std::map<std::string, UserTimeline> out;
  for (const auto& t : tweets) {
    auto& tl = out[t.user_id];
    tl.user_id = t.user_id;
    ++tl.raw_tweet_count;
    tl.mention_total += t.mention_count;
    tl.hashtag_total += t.hashtag_count;
    if (t.is_retweet) {
      ++tl.retweet_count;
      continue;
    }
    tl.tweets.push_back(t);
  }
  for (auto it = out.begin(); it != out.end();) {
    if (it->second.tweets.empty()) {
      it = out.erase(it);
      continue;
    }
    auto& tl = it->second;
    std::stable_sort(tl.tweets.begin(), tl.tweets.end(),
                     [](const GeoTweet& a, const GeoTweet& b) { return a.timestamp < b.timestamp; });
    const auto pit = profiles.find(tl.user_id);
    if (pit != profiles.end()) {
      tl.friends = pit->second.friends;
      tl.followers = pit->second.followers;
      tl.profile_description = pit->second.description;
    }
    ++it;
  }
  return out;
}

}  // namespace ses::corpus
