#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ses {

using Codepoint = char32_t;

// Decodes UTF-8 into codepoints. Invalid byte sequences decode to U+FFFD and
// resynchronize at the next lead byte; the pipeline never aborts on mojibake.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(const std::u32string& cps);

// Codepoint-per-wchar conversion so std::wregex character classes treat
// accented letters as single units.
std::wstring to_wide(std::string_view s);

// Latin-script lowercasing: ASCII, Latin-1 supplement and the French digraph
// pairs (Œ/œ, Ÿ/ÿ). Codepoints outside these ranges pass through unchanged.
Codepoint to_lower_cp(Codepoint c);

bool is_space_cp(Codepoint c);
// Letters we keep after cleaning: a-z plus lowercase Latin-1 letters and œ.
bool is_kept_letter_cp(Codepoint c);
bool is_digit_cp(Codepoint c);
// Word constituents for @mention / #hashtag spans (letters incl. accents,
// digits, underscore).
bool is_word_cp(Codepoint c);
// Emoji / pictographic symbol blocks stripped during cleaning.
bool is_emoji_cp(Codepoint c);

// Split on single-character delimiter; keeps empty fields.
std::vector<std::string> split(std::string_view s, char delim);
// Split on runs of ASCII whitespace; drops empty tokens.
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string trim(std::string_view s);

// Locale-independent numeric formatting (printf under the hood); all artifact
// files are written through these so reruns are byte-identical.
std::string fmt_double(double v, int precision = 12);  // %.{p}g
std::string fmt_fixed(double v, int decimals);         // %.{d}f

bool parse_double(std::string_view s, double& out);
bool parse_long(std::string_view s, long long& out);

}  // namespace ses
