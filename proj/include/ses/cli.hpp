#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ses/homeloc.hpp"
#include "ses/learn.hpp"
#include "ses/semantics.hpp"

namespace ses::cli {

// exit codes: 0 ok, 2 config, 3 dependency, 4 data
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DependencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  nlohmann::ordered_json effective;  // defaults merged with file and overrides
  std::string workspace;
  std::uint64_t seed = 0;
  std::string track;  // census | occupation | annotated
  std::string config_hash;

  std::string input(const std::string& name) const;   // "" when unset
  std::string artifact(const std::string& name) const;  // workspace-relative path

  homeloc::FilterConfig homeloc_config() const;
  semantics::SkipgramParams embedding_params() const;
  semantics::SpectralParams topic_params() const;
  learn::CVPlan cv_plan() const;
  std::vector<learn::Family> cv_families() const;
  std::size_t feature_unigrams() const;
  std::size_t feature_bigrams() const;
};

nlohmann::ordered_json default_config();

// Reads the config file, applies --set key=value dotted-path overrides and an
// optional seed override, validates types and computes the config hash.
PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                           std::optional<std::uint64_t> seed_override);
PipelineConfig config_from_json(nlohmann::ordered_json merged);

struct SynthSpec {
  std::size_t n_users = 200;
  double low_prior = 0.54;           // planted low-class fraction
  double signal_strength = 1.0;      // 0 = no class signal in text
  double night_home_fraction = 0.6;  // share of geo points planted at home
  double commute_km_min = 2.0;
  double commute_km_max = 12.0;
  double bot_fraction = 0.05;        // split evenly between speed and burst bots
  std::size_t tweets_min = 20;
  std::size_t tweets_max = 40;
  std::size_t geo_points_min = 12;
  std::size_t geo_points_max = 25;
  std::size_t grid_rows = 12;
  std::size_t grid_cols = 12;
  double cell_size_deg = 0.02;
  double origin_lat = 48.5;
  double origin_lon = 2.0;
  double rich_cell_fraction = 0.45;
  double income_low_scale = 18000.0;   // poor-cell decile scale, euros/year
  double income_high_scale = 42000.0;  // rich-cell decile scale
  std::size_t vocab_common = 220;
  std::size_t vocab_class = 70;  // per class
  double span_days = 30.0;
  double place_tag_fraction = 0.05;
  double retweet_fraction = 0.12;
  double annotated_noise = 0.0;  // prob. of an annotated score crossing the class boundary

  void validate() const;  // throws ConfigError
};

SynthSpec synth_spec_from_config(const PipelineConfig& config);

struct SynthTruth {
  std::map<std::string, int> klass;  // 0 low, 1 high
  std::map<std::string, corpus::LatLon> home;
  std::map<std::string, std::string> bot_kind;  // "", "speed", "burst"
};

// Writes tweets.jsonl, profiles.tsv, cells.txt, salary_table.tsv,
// occupation_profiles.tsv, manual_overrides.tsv, annotated.tsv,
// home_patterns.txt and truth.tsv under out_dir; returns the ground truth.
SynthTruth synth_generate(const SynthSpec& spec, std::uint64_t seed, const std::string& out_dir,
                          const std::string& header = "");

// Runs one pipeline stage: preprocess, homes, census-join, occupations,
// embed, topics, features, train, evaluate, report, synth. Throws the typed
// errors above; returns 0 on success.
int run(const std::string& subcommand, const PipelineConfig& config, std::ostream& log);

// Process-style wrapper: maps exceptions onto exit codes and prints to log.
int run_checked(const std::string& subcommand, const PipelineConfig& config, std::ostream& log);

}  // namespace ses::cli
