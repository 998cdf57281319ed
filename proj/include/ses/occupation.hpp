#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ses/census.hpp"

namespace ses::occupation {

struct SalaryTableEntry {
  std::string occupation_id;
  std::string canonical_title;            // raw, as published
  std::vector<std::string> patterns;      // regexes, tried in table order
  double salary = 0.0;                    // euros/year
};

struct ProfileRecord {
  std::string user_id;
  std::string job_title;
  std::vector<std::string> skills;
  std::string description;
};

enum class MatchStrategy { regex, sequence, manual };

struct MatchResult {
  std::string user_id;
  std::optional<std::string> occupation_id;  // nullopt = unresolved
  MatchStrategy strategy = MatchStrategy::manual;
  double score = 0.0;
};

const char* strategy_name(MatchStrategy s);

struct SalaryTable {
  std::vector<SalaryTableEntry> entries;  // sorted by occupation_id

  const SalaryTableEntry* find(const std::string& occupation_id) const;
};

// occupation_id <TAB> canonical_title <TAB> salary <TAB> pattern1|pattern2|...
SalaryTable load_salary_table(const std::string& path);
// user_id <TAB> occupation_id
std::map<std::string, std::string> load_manual_overrides(const std::string& path);

// First matching pattern wins, patterns tried in occupation_id order. The
// title must already be cleaned (corpus::clean_text).
std::optional<std::string> match_regex(const std::string& cleaned_title, const SalaryTable& table);

// Normalized global-alignment similarity: 1 - levenshtein(a,b)/max(|a|,|b|),
// computed on codepoints; sim("","") = 1.
double seq_similarity(const std::string& a, const std::string& b);

// regex stage first; otherwise best seq_similarity against the cleaned
// canonical titles, accepted at >= threshold (ties -> smallest
// occupation_id); otherwise unresolved for the manual queue.
MatchResult match_title(const std::string& user_id, const std::string& raw_title,
                        const SalaryTable& table, double threshold = 0.9);

// Applies manual_overrides (merged last) to unresolved results.
void apply_overrides(std::vector<MatchResult>& results,
                     const std::map<std::string, std::string>& overrides);

struct SalaryLabels {
  std::map<std::string, census::SesClass> labels;
  double mean_salary = 0.0;
  double low_fraction = 0.0;
  double high_fraction = 0.0;
};

// Mean-split rule over the matched users' salaries. Throws
// std::invalid_argument listing unresolved users if any remain.
SalaryLabels label_binary_by_salary(const std::vector<MatchResult>& matches,
                                    const SalaryTable& table);

}  // namespace ses::occupation
