#include "ses/util/text.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace ses {

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const auto n = s.size();
  while (i < n) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    Codepoint cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + static_cast<std::size_t>(len) > n) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((bk & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (!ok || cp > 0x10FFFF) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::string utf8_encode(const std::u32string& cps) {
  std::string out;
  out.reserve(cps.size());
  for (const Codepoint cp : cps) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::wstring to_wide(std::string_view s) {
  const std::u32string cps = utf8_decode(s);
  std::wstring out;
  out.reserve(cps.size());
  for (const Codepoint cp : cps) out.push_back(static_cast<wchar_t>(cp));
  return out;
}

Codepoint to_lower_cp(Codepoint c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  // Latin-1: À..Þ map to à..þ, skipping the multiplication sign ×.
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c == 0x0152) return 0x0153;  // Œ -> œ
  if (c == 0x0178) return 0x00FF;  // Ÿ -> ÿ
  return c;
}

bool is_space_cp(Codepoint c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0x00A0 || c == 0x2028 || c == 0x2029 || (c >= 0x2000 && c <= 0x200A) || c == 0x3000;
}

bool is_kept_letter_cp(Codepoint c) {
  if (c >= U'a' && c <= U'z') return true;
  // Lowercase Latin-1 letters à..ö, ø..ÿ (÷ excluded).
  if (c >= 0xDF && c <= 0xFF && c != 0xF7) return true;
  if (c == 0x0153) return true;  // œ
  return false;
}

bool is_digit_cp(Codepoint c) { return c >= U'0' && c <= U'9'; }

bool is_word_cp(Codepoint c) {
  if (c == U'_') return true;
  if (is_digit_cp(c)) return true;
  if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return true;
  if (c >= 0xC0 && c <= 0xFF && c != 0xD7 && c != 0xF7) return true;
  if (c == 0x0152 || c == 0x0153 || c == 0x0178) return true;
  return false;
}

bool is_emoji_cp(Codepoint c) {
  return (c >= 0x1F000 && c <= 0x1FAFF) ||  // cards, emoji, pictographs, extended
         (c >= 0x2600 && c <= 0x27BF) ||    // misc symbols + dingbats
         (c >= 0x2190 && c <= 0x21FF) ||    // arrows
         (c >= 0x2B00 && c <= 0x2BFF) ||    // misc symbols and arrows
         (c >= 0xFE00 && c <= 0xFE0F) ||    // variation selectors
         (c >= 0x1F1E6 && c <= 0x1F1FF) ||  // regional indicators
         c == 0x200D || c == 0x20E3;        // ZWJ, combining keycap
}

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == delim) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string fmt_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  const std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

bool parse_long(std::string_view s, long long& out) {
  if (s.empty()) return false;
  const std::string tmp(s);
  char* end = nullptr;
  out = std::strtoll(tmp.c_str(), &end, 10);
  return end == tmp.c_str() + tmp.size();
}

}  // namespace ses
