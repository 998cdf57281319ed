#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ses::corpus {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct GeoTweet {
  std::string user_id;
  std::int64_t timestamp = 0;  // UTC epoch seconds
  std::string text;
  std::optional<LatLon> coordinates;
  bool is_retweet = false;
  bool is_place_tag = false;  // coordinates name a place, not a GPS fix
  int mention_count = 0;
  int hashtag_count = 0;
};

struct ProfileInfo {
  long long friends = 0;
  long long followers = 0;
  std::string description;
};

struct UserTimeline {
  std::string user_id;
  std::vector<GeoTweet> tweets;  // time-ordered, retweets removed
  std::string profile_description;
  long long friends = 0;
  long long followers = 0;
  // Pre-cleaning stream statistics, kept for the user-level features.
  long long raw_tweet_count = 0;
  long long retweet_count = 0;
  long long mention_total = 0;
  long long hashtag_total = 0;
};

using Token = std::string;
// 1- or 2-token n-gram; the two tokens joined by a single space for n = 2.
using NGram = std::string;

struct ParseStats {
  std::size_t records = 0;
  std::size_t malformed_lines = 0;
  std::size_t coordinates_dropped = 0;  // out-of-range lat/lon cleared
};

// Reads line-delimited JSON records (one tweet per line). Malformed lines are
// counted and skipped; out-of-range coordinates are cleared but the record is
// kept. Throws std::runtime_error only if the stream itself is unreadable.
std::vector<GeoTweet> parse_stream(std::istream& in, ParseStats& stats);
std::vector<GeoTweet> parse_stream_file(const std::string& path, ParseStats& stats);

// Profiles table: user_id <TAB> friends <TAB> followers <TAB> description.
std::map<std::string, ProfileInfo> parse_profiles_file(const std::string& path, ParseStats& stats);

// Loads the ASCII emoticon list used by clean_text (one emoticon per line,
// '#' comments allowed). clean_text falls back to a small built-in list when
// none has been loaded.
void load_emoticons_file(const std::string& path);
void set_emoticons(const std::vector<std::string>& emoticons);

// Removes URLs, @mentions, #hashtags and emoticons, downcases (Latin script),
// turns punctuation into separators and collapses whitespace. Total function,
// idempotent.
std::string clean_text(const std::string& raw);

// Whitespace split of an already-cleaned string.
std::vector<Token> tokenize(const std::string& cleaned);

// Contiguous n-grams inside one token sequence (i.e. one tweet); n must be 1
// or 2. Returns a multiset as ngram -> count.
std::map<NGram, std::size_t> extract_ngrams(const std::vector<Token>& tokens, int n);

// Groups tweets per user, drops retweets, sorts by timestamp and attaches
// profile fields. Users left with zero tweets are omitted. The pre-cleaning
// counters (raw/retweet/mention/hashtag) cover the full input stream.
std::map<std::string, UserTimeline> build_timelines(const std::vector<GeoTweet>& tweets,
                                                    const std::map<std::string, ProfileInfo>& profiles);

}  // namespace ses::corpus
