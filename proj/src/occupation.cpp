#include "ses/occupation.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <stdexcept>

#include "ses/corpus.hpp"
#include "ses/util/text.hpp"

namespace ses::occupation {

const char* strategy_name(MatchStrategy s) {
  switch (s) {
    case MatchStrategy::regex: return "regex";
    case MatchStrategy::sequence: return "sequence";
    case MatchStrategy::manual: return "manual";
  }
  return "?";
}

const SalaryTableEntry* SalaryTable::find(const std::string& occupation_id) const {
  const auto it = std::lower_bound(
      entries.begin(), entries.end(), occupation_id,
      [](const SalaryTableEntry& e, const std::string& id) { return e.occupation_id < id; });
  if (it == entries.end() || it->occupation_id != occupation_id) return nullptr;
  return &*it;
}

SalaryTable load_salary_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open salary table: " + path);
  SalaryTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, '\t');
    if (first && !fields.empty() && fields[0] == "occupation_id") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 4) throw std::runtime_error("salary table: expected 4 tab-separated fields");
    SalaryTableEntry e;
    e.occupation_id = trim(fields[0]);
    e.canonical_title = fields[1];
    if (!parse_double(fields[2], e.salary) || e.salary <= 0.0)
      throw std::runtime_error("salary table: bad salary for " + e.occupation_id);
    if (e.occupation_id.empty() || e.canonical_title.empty())
      throw std::runtime_error("salary table: empty id or title");
    for (const auto& p : split(fields[3], '|')) {
      const std::string t = trim(p);
      if (!t.empty()) e.patterns.push_back(t);
    }
    table.entries.push_back(std::move(e));
  }
  std::sort(table.entries.begin(), table.entries.end(),
            [](const SalaryTableEntry& a, const SalaryTableEntry& b) {
              return a.occupation_id < b.occupation_id;
            });
  return table;
}

std::map<std::string, std::string> load_manual_overrides(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manual overrides: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, '\t');
    if (first && !fields.empty() && fields[0] == "user_id") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 2) continue;
    out[trim(fields[0])] = trim(fields[1]);
  }
  return out;
}

namespace {
// patterns are tried in occupation_id order no matter how the table was built
std::vector<const SalaryTableEntry*> by_id(const SalaryTable& table) {
  std::vector<const SalaryTableEntry*> view;
  view.reserve(table.entries.size());
  for (const auto& e : table.entries) view.push_back(&e);
  std::sort(view.begin(), view.end(), [](const SalaryTableEntry* a, const SalaryTableEntry* b) {
    return a->occupation_id < b->occupation_id;
  });
  return view;
}
}  // namespace

std::optional<std::string> match_regex(const std::string& cleaned_title, const SalaryTable& table) {
  if (cleaned_title.empty()) return std::nullopt;
  // wide matching keeps accented letters as single regex units
  const std::wstring subject = to_wide(cleaned_title);
  for (const SalaryTableEntry* entry : by_id(table)) {
    for (const auto& pat : entry->patterns) {
      try {
        const std::wregex re(to_wide(pat), std::wregex::ECMAScript);
        if (std::regex_search(subject, re)) return entry->occupation_id;
      } catch (const std::regex_error&) {
        // malformed pattern in the table: skip it, sequence matching still applies
      }
    }
  }
  return std::nullopt;
}

double seq_similarity(const std::string& a, const std::string& b) {
  const std::u32string ua = utf8_decode(a);
  const std::u32string ub = utf8_decode(b);
  const std::size_t n = ua.size();
  const std::size_t m = ub.size();
  if (n == 0 && m == 0) return 1.0;
  std::vector<std::size_t> prev(m + 1);
  std::vector<std::size_t> cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (ua[i - 1] == ub[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  const double dist = static_cast<double>(prev[m]);
  return 1.0 - dist / static_cast<double>(std::max(n, m));
}

MatchResult match_title(const std::string& user_id, const std::string& raw_title,
                        const SalaryTable& table, double threshold) {
  if (table.entries.empty()) throw std::invalid_argument("match_title: empty salary table");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw std::invalid_argument("match_title: threshold must be in (0,1]");
  MatchResult r;
  r.user_id = user_id;
  const std::string cleaned = corpus::clean_text(raw_title);
  if (auto id = match_regex(cleaned, table)) {
    r.occupation_id = *id;
    r.strategy = MatchStrategy::regex;
    r.score = 1.0;
    return r;
  }
  double best = -1.0;
  const SalaryTableEntry* best_entry = nullptr;
  for (const auto& entry : table.entries) {
    const double s = seq_similarity(cleaned, corpus::clean_text(entry.canonical_title));
    if (s > best || (s == best && best_entry != nullptr &&
                     entry.occupation_id < best_entry->occupation_id)) {
      best = s;
      best_entry = &entry;
    }
  }
  if (best_entry != nullptr && best >= threshold) {
    r.occupation_id = best_entry->occupation_id;
    r.strategy = MatchStrategy::sequence;
    r.score = best;
    return r;
  }
  r.strategy = MatchStrategy::manual;
  r.score = 0.0;
  return r;
}

void apply_overrides(std::vector<MatchResult>& results,
                     const std::map<std::string, std::string>& overrides) {
  for (auto& r : results) {
    const auto it = overrides.find(r.user_id);
    if (it == overrides.end()) continue;
    r.occupation_id = it->second;
    r.strategy = MatchStrategy::manual;
    r.score = 1.0;
  }
}

SalaryLabels label_binary_by_salary(const std::vector<MatchResult>& matches,
                                    const SalaryTable& table) {
  std::vector<std::string> unresolved;
  std::map<std::string, double> salaries;
  for (const auto& m : matches) {
    if (!m.occupation_id) {
      unresolved.push_back(m.user_id);
      continue;
    }
    const SalaryTableEntry* e = table.find(*m.occupation_id);
    if (e == nullptr) {
      unresolved.push_back(m.user_id);
      continue;
    }
    salaries[m.user_id] = e->salary;
  }
  if (!unresolved.empty()) {
    std::string msg = "unresolved users:";
    for (const auto& u : unresolved) msg += " " + u;
    throw std::invalid_argument(msg);
  }
  const census::BinaryLabels base = census::label_binary(salaries);
  SalaryLabels out;
  out.labels = base.labels;
  out.mean_salary = base.mean_income;
  out.low_fraction = base.low_fraction;
  out.high_fraction = base.high_fraction;
  return out;
}

}  // namespace ses::occupation
