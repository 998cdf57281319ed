#include <fstream>

#include "ses/cli.hpp"
#include "ses/util/hash.hpp"
#include "ses/util/text.hpp"

namespace ses::cli {

using json = nlohmann::ordered_json;

json default_config() {
  return json{
      {"workspace", "out"},
      {"seed", 42},
      {"track", "census"},
      {"inputs",
       {{"tweets", ""},
        {"profiles", ""},
        {"cells", ""},
        {"salary_table", ""},
        {"occupation_profiles", ""},
        {"manual_overrides", ""},
        {"annotated", ""},
        {"home_patterns", ""},
        {"emoticons", ""},
        {"topic_labels", ""},
        {"truth", ""}}},
      {"homeloc",
       {{"min_points", 5},
        {"min_in_cells", 3},
        {"min_span_days", 7.0},
        {"max_median_km", 30.0},
        {"max_speed_kmh", 130.0},
        {"burst_window_s", 2.0},
        {"burst_max", 3},
        {"utc_offset_hours", 1}}},
      {"embedding",
       {{"dim", 50}, {"window", 5}, {"negatives", 5}, {"epochs", 5}, {"learning_rate", 0.025}, {"min_count", 5}}},
      {"topics", {{"k", 100}, {"kmeans_restarts", 50}}},
      {"occupation", {{"threshold", 0.9}}},
      {"features", {{"unigrams", 450}, {"bigrams", 560}}},
      {"cv",
       {{"outer_folds", 5},
        {"inner_folds", 5},
        {"inner_repetitions", 10},
        {"configs", 500},
        {"families", json::array({"gbt", "rf", "ada"})}}},
      {"grid",
       {{"gbt_depth_min", 2},     {"gbt_depth_max", 8},      {"gbt_eta_min", 0.01},
        {"gbt_eta_max", 0.3},     {"gbt_lambda_min", 0.1},   {"gbt_lambda_max", 10.0},
        {"gbt_subsample_min", 0.5}, {"gbt_subsample_max", 1.0}, {"gbt_colsample_min", 0.3},
        {"gbt_colsample_max", 1.0}, {"gbt_rounds_min", 50},   {"gbt_rounds_max", 500},
        {"rf_trees_min", 100},    {"rf_trees_max", 500},     {"rf_depth_min", 4},
        {"rf_depth_max", 16},     {"rf_feat_min", 0.1},      {"rf_feat_max", 0.5},
        {"rf_sqrt_option", true}, {"ada_learners_min", 50},  {"ada_learners_max", 500},
        {"ada_depth_min", 1},     {"ada_depth_max", 2}}},
      {"synth",
       {{"n_users", 200},
        {"low_prior", 0.54},
        {"signal_strength", 1.0},
        {"night_home_fraction", 0.6},
        {"commute_km_min", 2.0},
        {"commute_km_max", 12.0},
        {"bot_fraction", 0.05},
        {"tweets_min", 20},
        {"tweets_max", 40},
        {"geo_points_min", 12},
        {"geo_points_max", 25},
        {"grid_rows", 12},
        {"grid_cols", 12},
        {"cell_size_deg", 0.02},
        {"origin_lat", 48.5},
        {"origin_lon", 2.0},
        {"rich_cell_fraction", 0.45},
        {"income_low_scale", 18000.0},
        {"income_high_scale", 42000.0},
        {"vocab_common", 220},
        {"vocab_class", 70},
        {"span_days", 30.0},
        {"place_tag_fraction", 0.05},
        {"retweet_fraction", 0.12},
        {"annotated_noise", 0.0}}},
  };
}

namespace {

void deep_merge(json& base, const json& overlay, const std::string& path) {
  if (!overlay.is_object()) throw ConfigError("config: expected object at " + path);
  for (const auto& [key, value] : overlay.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      deep_merge(base[key], value, here);
    } else {
      base[key] = value;
    }
  }
}

json parse_scalar(const std::string& text) {
  // try JSON first (numbers, booleans, arrays); fall back to a plain string
  json v = json::parse(text, nullptr, false);
  if (!v.is_discarded()) return v;
  return json(text);
}

void apply_override(json& config, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key.path=value: " + kv);
  const std::string path = kv.substr(0, eq);
  const json value = parse_scalar(kv.substr(eq + 1));
  json* node = &config;
  const auto parts = split(path, '.');
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object())
      (*node)[parts[i]] = json::object();
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = value;
}

double num_at(const json& j, const std::string& section, const std::string& key) {
  const json& s = j.at(section);
  if (!s.contains(key) || !s.at(key).is_number())
    throw ConfigError("config: " + section + "." + key + " must be a number");
  return s.at(key).get<double>();
}

}  // namespace

PipelineConfig config_from_json(json merged) {
  PipelineConfig c;
  c.effective = std::move(merged);
  if (!c.effective.contains("workspace") || !c.effective["workspace"].is_string())
    throw ConfigError("config: workspace must be a string");
  c.workspace = c.effective["workspace"].get<std::string>();
  if (!c.effective.contains("seed") || !c.effective["seed"].is_number_integer())
    throw ConfigError("config: seed must be an integer");
  c.seed = c.effective["seed"].get<std::uint64_t>();
  c.track = c.effective.value("track", "");
  if (c.track != "census" && c.track != "occupation" && c.track != "annotated")
    throw ConfigError("config: track must be census, occupation or annotated");
  // canonical serialization (sorted keys) -> stable hash
  const std::string canon = nlohmann::json(c.effective).dump();
  c.config_hash = hex64(fnv1a64(canon));
  return c;
}

PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                           std::optional<std::uint64_t> seed_override) {
  json merged = default_config();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json file = json::parse(in, nullptr, false);
    if (file.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    deep_merge(merged, file, "");
  }
  for (const auto& kv : overrides) apply_override(merged, kv);
  if (seed_override) merged["seed"] = *seed_override;
  return config_from_json(std::move(merged));
}

std::string PipelineConfig::input(const std::string& name) const {
  const auto& inputs = effective.at("inputs");
  if (!inputs.contains(name) || !inputs.at(name).is_string()) return "";
  return inputs.at(name).get<std::string>();
}

std::string PipelineConfig::artifact(const std::string& name) const {
  return workspace + "/" + name;
}

homeloc::FilterConfig PipelineConfig::homeloc_config() const {
  homeloc::FilterConfig f;
  f.min_points = static_cast<std::size_t>(num_at(effective, "homeloc", "min_points"));
  f.min_in_cells = static_cast<std::size_t>(num_at(effective, "homeloc", "min_in_cells"));
  f.min_span_days = num_at(effective, "homeloc", "min_span_days");
  f.max_median_km = num_at(effective, "homeloc", "max_median_km");
  f.max_speed_kmh = num_at(effective, "homeloc", "max_speed_kmh");
  f.burst_window_s = num_at(effective, "homeloc", "burst_window_s");
  f.burst_max = static_cast<std::size_t>(num_at(effective, "homeloc", "burst_max"));
  f.utc_offset_hours = static_cast<int>(num_at(effective, "homeloc", "utc_offset_hours"));
  return f;
}

semantics::SkipgramParams PipelineConfig::embedding_params() const {
  semantics::SkipgramParams p;
  p.dim = static_cast<std::size_t>(num_at(effective, "embedding", "dim"));
  p.window = static_cast<std::size_t>(num_at(effective, "embedding", "window"));
  p.negatives = static_cast<std::size_t>(num_at(effective, "embedding", "negatives"));
  p.epochs = static_cast<std::size_t>(num_at(effective, "embedding", "epochs"));
  p.learning_rate = num_at(effective, "embedding", "learning_rate");
  p.seed = seed;
  return p;
}

semantics::SpectralParams PipelineConfig::topic_params() const {
  semantics::SpectralParams p;
  p.k = static_cast<std::size_t>(num_at(effective, "topics", "k"));
  p.kmeans_restarts = static_cast<std::size_t>(num_at(effective, "topics", "kmeans_restarts"));
  p.seed = seed;
  return p;
}

learn::CVPlan PipelineConfig::cv_plan() const {
  learn::CVPlan plan;
  plan.outer_folds = static_cast<std::size_t>(num_at(effective, "cv", "outer_folds"));
  plan.inner_folds = static_cast<std::size_t>(num_at(effective, "cv", "inner_folds"));
  plan.inner_repetitions = static_cast<std::size_t>(num_at(effective, "cv", "inner_repetitions"));
  plan.configs = static_cast<std::size_t>(num_at(effective, "cv", "configs"));
  plan.seed = seed;
  const json& g = effective.at("grid");
  learn::ParamSpace& s = plan.space;
  s.gbt_depth_min = g.value("gbt_depth_min", s.gbt_depth_min);
  s.gbt_depth_max = g.value("gbt_depth_max", s.gbt_depth_max);
  s.gbt_eta_min = g.value("gbt_eta_min", s.gbt_eta_min);
  s.gbt_eta_max = g.value("gbt_eta_max", s.gbt_eta_max);
  s.gbt_lambda_min = g.value("gbt_lambda_min", s.gbt_lambda_min);
  s.gbt_lambda_max = g.value("gbt_lambda_max", s.gbt_lambda_max);
  s.gbt_subsample_min = g.value("gbt_subsample_min", s.gbt_subsample_min);
  s.gbt_subsample_max = g.value("gbt_subsample_max", s.gbt_subsample_max);
  s.gbt_colsample_min = g.value("gbt_colsample_min", s.gbt_colsample_min);
  s.gbt_colsample_max = g.value("gbt_colsample_max", s.gbt_colsample_max);
  s.gbt_rounds_min = g.value("gbt_rounds_min", s.gbt_rounds_min);
  s.gbt_rounds_max = g.value("gbt_rounds_max", s.gbt_rounds_max);
  s.rf_trees_min = g.value("rf_trees_min", s.rf_trees_min);
  s.rf_trees_max = g.value("rf_trees_max", s.rf_trees_max);
  s.rf_depth_min = g.value("rf_depth_min", s.rf_depth_min);
  s.rf_depth_max = g.value("rf_depth_max", s.rf_depth_max);
  s.rf_feat_min = g.value("rf_feat_min", s.rf_feat_min);
  s.rf_feat_max = g.value("rf_feat_max", s.rf_feat_max);
  s.rf_sqrt_option = g.value("rf_sqrt_option", s.rf_sqrt_option);
  s.ada_learners_min = g.value("ada_learners_min", s.ada_learners_min);
  s.ada_learners_max = g.value("ada_learners_max", s.ada_learners_max);
  s.ada_depth_min = g.value("ada_depth_min", s.ada_depth_min);
  s.ada_depth_max = g.value("ada_depth_max", s.ada_depth_max);
  return plan;
}

std::vector<learn::Family> PipelineConfig::cv_families() const {
  std::vector<learn::Family> out;
  for (const auto& name : effective.at("cv").at("families")) {
    const auto f = learn::family_from_name(name.get<std::string>());
    if (!f) throw ConfigError("config: unknown family " + name.get<std::string>());
    out.push_back(*f);
  }
  if (out.empty()) throw ConfigError("config: cv.families is empty");
  return out;
}

std::size_t PipelineConfig::feature_unigrams() const {
  return static_cast<std::size_t>(num_at(effective, "features", "unigrams"));
}
std::size_t PipelineConfig::feature_bigrams() const {
  return static_cast<std::size_t>(num_at(effective, "features", "bigrams"));
}

SynthSpec synth_spec_from_config(const PipelineConfig& config) {
  const json& s = config.effective.at("synth");
  SynthSpec spec;
  spec.n_users = s.value("n_users", spec.n_users);
  spec.low_prior = s.value("low_prior", spec.low_prior);
  spec.signal_strength = s.value("signal_strength", spec.signal_strength);
  spec.night_home_fraction = s.value("night_home_fraction", spec.night_home_fraction);
  spec.commute_km_min = s.value("commute_km_min", spec.commute_km_min);
  spec.commute_km_max = s.value("commute_km_max", spec.commute_km_max);
  spec.bot_fraction = s.value("bot_fraction", spec.bot_fraction);
  spec.tweets_min = s.value("tweets_min", spec.tweets_min);
  spec.tweets_max = s.value("tweets_max", spec.tweets_max);
  spec.geo_points_min = s.value("geo_points_min", spec.geo_points_min);
  spec.geo_points_max = s.value("geo_points_max", spec.geo_points_max);
  spec.grid_rows = s.value("grid_rows", spec.grid_rows);
  spec.grid_cols = s.value("grid_cols", spec.grid_cols);
  spec.cell_size_deg = s.value("cell_size_deg", spec.cell_size_deg);
  spec.origin_lat = s.value("origin_lat", spec.origin_lat);
  spec.origin_lon = s.value("origin_lon", spec.origin_lon);
  spec.rich_cell_fraction = s.value("rich_cell_fraction", spec.rich_cell_fraction);
  spec.income_low_scale = s.value("income_low_scale", spec.income_low_scale);
  spec.income_high_scale = s.value("income_high_scale", spec.income_high_scale);
  spec.vocab_common = s.value("vocab_common", spec.vocab_common);
  spec.vocab_class = s.value("vocab_class", spec.vocab_class);
  spec.span_days = s.value("span_days", spec.span_days);
  spec.place_tag_fraction = s.value("place_tag_fraction", spec.place_tag_fraction);
  spec.retweet_fraction = s.value("retweet_fraction", spec.retweet_fraction);
  spec.annotated_noise = s.value("annotated_noise", spec.annotated_noise);
  spec.validate();
  return spec;
}

void SynthSpec::validate() const {
  if (n_users < 2) throw ConfigError("synth: n_users must be >= 2");
  if (!(low_prior > 0.0 && low_prior < 1.0)) throw ConfigError("synth: low_prior must be in (0,1)");
  if (signal_strength < 0.0) throw ConfigError("synth: signal_strength must be >= 0");
  if (!(night_home_fraction >= 0.0 && night_home_fraction <= 1.0))
    throw ConfigError("synth: night_home_fraction must be in [0,1]");
  if (!(bot_fraction >= 0.0 && bot_fraction < 1.0))
    throw ConfigError("synth: bot_fraction must be in [0,1)");
  if (tweets_min < 1 || tweets_max < tweets_min) throw ConfigError("synth: bad tweets range");
  if (geo_points_min < 1 || geo_points_max < geo_points_min)
    throw ConfigError("synth: bad geo_points range");
  if (grid_rows < 1 || grid_cols < 1 || cell_size_deg <= 0.0)
    throw ConfigError("synth: bad census grid shape");
  if (income_low_scale <= 0.0 || income_high_scale <= 0.0)
    throw ConfigError("synth: income scales must be positive");
  if (vocab_common < 10 || vocab_class < 2) throw ConfigError("synth: vocabulary too small");
  if (span_days <= 0.0) throw ConfigError("synth: span_days must be positive");
}

}  // namespace ses::cli
