#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "ses/cli.hpp"
#include "ses/eval.hpp"
#include "ses/features.hpp"
#include "ses/occupation.hpp"
#include "ses/util/text.hpp"

namespace ses::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string header_line(const PipelineConfig& config, const std::string& artifact) {
  return "# ses " + artifact + " config_hash=" + config.config_hash +
         " seed=" + std::to_string(config.seed);
}

std::ofstream open_artifact(const PipelineConfig& config, const std::string& name) {
  fs::create_directories(config.workspace);
  std::ofstream out(config.artifact(name));
  if (!out) throw DataError("cannot write artifact: " + config.artifact(name));
  out << header_line(config, name) << "\n";
  return out;
}

void require_artifact(const PipelineConfig& config, const std::string& name,
                      const std::string& producing_stage) {
  if (!fs::exists(config.artifact(name)))
    throw DependencyError("missing artifact " + config.artifact(name) + "; run `" +
                          producing_stage + "` first");
}

std::string require_input(const PipelineConfig& config, const std::string& name) {
  const std::string path = config.input(name);
  if (path.empty()) throw ConfigError("config: inputs." + name + " is not set");
  if (!fs::exists(path)) throw ConfigError("config: inputs." + name + " does not exist: " + path);
  return path;
}

std::vector<std::vector<std::string>> read_table(const std::string& path, std::size_t min_fields) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() < min_fields) throw DataError(path + ": short row '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

// ---- timeline artifact round-trip ----

void write_timelines(const PipelineConfig& config,
                     const std::map<std::string, corpus::UserTimeline>& timelines) {
  auto tw = open_artifact(config, "timelines.tsv");
  tw << "user_id\tts\tlat\tlon\tplace\ttext\n";
  for (const auto& [user, tl] : timelines) {
    for (const auto& t : tl.tweets) {
      tw << user << "\t" << t.timestamp << "\t";
      if (t.coordinates) {
        tw << fmt_double(t.coordinates->lat, 17) << "\t" << fmt_double(t.coordinates->lon, 17);
      } else {
        tw << "\t";
      }
      tw << "\t" << (t.is_place_tag ? 1 : 0) << "\t" << corpus::clean_text(t.text) << "\n";
    }
  }
  auto uw = open_artifact(config, "users.tsv");
  uw << "user_id\tfriends\tfollowers\traw_tweets\tretweets\tmentions\thashtags\tdescription\n";
  for (const auto& [user, tl] : timelines) {
    uw << user << "\t" << tl.friends << "\t" << tl.followers << "\t" << tl.raw_tweet_count << "\t"
       << tl.retweet_count << "\t" << tl.mention_total << "\t" << tl.hashtag_total << "\t"
       << corpus::clean_text(tl.profile_description) << "\n";
  }
}

std::map<std::string, corpus::UserTimeline> read_timelines(const PipelineConfig& config) {
  require_artifact(config, "timelines.tsv", "preprocess");
  require_artifact(config, "users.tsv", "preprocess");
  std::map<std::string, corpus::UserTimeline> timelines;
  for (const auto& f : read_table(config.artifact("users.tsv"), 8)) {
    if (f[0] == "user_id") continue;
    corpus::UserTimeline tl;
    tl.user_id = f[0];
    long long v = 0;
    if (parse_long(f[1], v)) tl.friends = v;
    if (parse_long(f[2], v)) tl.followers = v;
    if (parse_long(f[3], v)) tl.raw_tweet_count = v;
    if (parse_long(f[4], v)) tl.retweet_count = v;
    if (parse_long(f[5], v)) tl.mention_total = v;
    if (parse_long(f[6], v)) tl.hashtag_total = v;
    tl.profile_description = f[7];
    timelines[f[0]] = std::move(tl);
  }
  for (const auto& f : read_table(config.artifact("timelines.tsv"), 6)) {
    if (f[0] == "user_id") continue;
    corpus::GeoTweet t;
    t.user_id = f[0];
    long long ts = 0;
    if (!parse_long(f[1], ts)) throw DataError("timelines.tsv: bad timestamp");
    t.timestamp = ts;
    double lat = 0, lon = 0;
    if (!f[2].empty() && !f[3].empty() && parse_double(f[2], lat) && parse_double(f[3], lon))
      t.coordinates = corpus::LatLon{lat, lon};
    t.is_place_tag = f[4] == "1";
    t.text = f[5];
    auto it = timelines.find(f[0]);
    if (it == timelines.end()) {
      corpus::UserTimeline tl;
      tl.user_id = f[0];
      it = timelines.emplace(f[0], std::move(tl)).first;
    }
    it->second.tweets.push_back(std::move(t));
  }
  for (auto it = timelines.begin(); it != timelines.end();) {
    if (it->second.tweets.empty()) {
      it = timelines.erase(it);
      continue;
    }
    std::stable_sort(it->second.tweets.begin(), it->second.tweets.end(),
                     [](const corpus::GeoTweet& a, const corpus::GeoTweet& b) {
                       return a.timestamp < b.timestamp;
                     });
    ++it;
  }
  if (timelines.empty()) throw DataError("timelines.tsv: no usable records");
  return timelines;
}

// ---- labels ----

void write_labels(std::ofstream& out, const std::map<std::string, census::SesClass>& labels,
                  const std::map<std::string, double>& values) {
  out << "user_id\tlabel\tvalue\n";
  for (const auto& [user, cls] : labels) {
    const auto vit = values.find(user);
    out << user << "\t" << (cls == census::SesClass::high ? "high" : "low") << "\t"
        << (vit != values.end() ? fmt_double(vit->second, 12) : "") << "\n";
  }
}

std::map<std::string, int> read_labels_artifact(const PipelineConfig& config,
                                                const std::string& name,
                                                const std::string& producing_stage) {
  require_artifact(config, name, producing_stage);
  std::map<std::string, int> labels;
  for (const auto& f : read_table(config.artifact(name), 2)) {
    if (f[0] == "user_id") continue;
    labels[f[0]] = (f[1] == "high") ? 1 : 0;
  }
  if (labels.empty()) throw DataError(name + ": no labels");
  return labels;
}

std::map<std::string, int> annotated_labels(const PipelineConfig& config) {
  const std::string path = require_input(config, "annotated");
  std::map<std::string, int> labels;
  for (const auto& f : read_table(path, 2)) {
    if (f[0] == "user_id") continue;
    long long score = 0;
    if (!parse_long(f[1], score) || score < 1 || score > 9)
      throw DataError("annotated labels: score must be 1..9 for user " + f[0]);
    // lowest five expert scores form the low class
    labels[f[0]] = score <= 5 ? 0 : 1;
  }
  if (labels.empty()) throw DataError("annotated labels: empty file");
  return labels;
}

std::map<std::string, int> track_labels(const PipelineConfig& config) {
  if (config.track == "census") return read_labels_artifact(config, "labels_census.tsv", "census-join");
  if (config.track == "occupation")
    return read_labels_artifact(config, "labels_occupation.tsv", "occupations");
  return annotated_labels(config);
}

void write_profile(std::ofstream& out, const homeloc::HourlyProfile& prof, const char* value_name) {
  out << "hour\t" << value_name << "\tcount\n";
  for (std::size_t h = 0; h < 24; ++h)
    out << h << "\t" << fmt_double(prof.values[h], 12) << "\t" << prof.counts[h] << "\n";
}

// ---- stages ----

void stage_synth(const PipelineConfig& config, std::ostream& log) {
  const SynthSpec spec = synth_spec_from_config(config);
  const std::string dir = config.artifact("synth");
  const SynthTruth truth =
      synth_generate(spec, config.seed, dir,
                     "ses synth config_hash=" + config.config_hash + " seed=" +
                         std::to_string(config.seed) + " file=");
  std::size_t low = 0;
  for (const auto& [_, k] : truth.klass)
    if (k == 0) ++low;
  log << "synth: " << truth.klass.size() << " users (" << low << " low), census "
      << spec.grid_rows << "x" << spec.grid_cols << ", outputs under " << dir << "\n";
}

void stage_preprocess(const PipelineConfig& config, std::ostream& log) {
  const std::string tweets_path = require_input(config, "tweets");
  const std::string profiles_path = require_input(config, "profiles");
  const std::string emoticons = config.input("emoticons");
  if (!emoticons.empty()) corpus::load_emoticons_file(emoticons);

  corpus::ParseStats stats;
  const auto tweets = corpus::parse_stream_file(tweets_path, stats);
  const auto profiles = corpus::parse_profiles_file(profiles_path, stats);
  if (tweets.empty()) throw DataError("tweet stream produced no records");
  const auto timelines = corpus::build_timelines(tweets, profiles);
  write_timelines(config, timelines);
  log << "preprocess: " << stats.records << " records, " << stats.malformed_lines << " malformed, "
      << stats.coordinates_dropped << " coordinate drops, " << timelines.size() << " users\n";
}

void stage_homes(const PipelineConfig& config, std::ostream& log) {
  const auto timelines = read_timelines(config);
  const std::string cells_path = require_input(config, "cells");
  census::LoadReport cell_report;
  const census::CensusIndex index = census::load_cells(cells_path, cell_report);
  if (index.size() == 0) throw DataError("cells file has no valid cells");
  const homeloc::FilterConfig fc = config.homeloc_config();

  std::vector<homeloc::MobilityTrace> passing_traces;
  std::map<std::string, homeloc::HomeInference> homes;

  auto out = open_artifact(config, "homes.tsv");
  out << "user_id\tlat\tlon\tsupport_count\ttotal_points\tfilter_status\n";
  for (const auto& [user, tl] : timelines) {
    const homeloc::MobilityTrace trace = homeloc::trace_from_timeline(tl);
    homeloc::FilterStatus status = homeloc::eligibility_filter(trace, index, fc);
    if (status == homeloc::FilterStatus::ok) status = homeloc::mobility_filter(trace, fc);
    if (status == homeloc::FilterStatus::ok) {
      const homeloc::HomeInference h = homeloc::infer_home(trace, fc);
      out << user << "\t" << fmt_double(h.home.lat, 17) << "\t" << fmt_double(h.home.lon, 17)
          << "\t" << h.support_count << "\t" << h.total_points << "\tok\n";
      homes[user] = h;
      passing_traces.push_back(trace);
    } else {
      out << user << "\t\t\t0\t" << trace.points.size() << "\t"
          << homeloc::filter_status_name(status) << "\n";
    }
  }
  if (homes.empty()) throw DataError("no user passed the home-location filters");

  {
    auto pw = open_artifact(config, "profile_distance.tsv");
    write_profile(pw, homeloc::hourly_distance_profile(passing_traces, homes, fc), "mean_km");
  }
  {
    auto pw = open_artifact(config, "profile_rate_all.tsv");
    write_profile(pw, homeloc::point_rate_profile(passing_traces, fc), "rate");
  }
  const std::string patterns_path = config.input("home_patterns");
  if (!patterns_path.empty()) {
    const auto patterns = homeloc::load_patterns_file(patterns_path);
    auto pw = open_artifact(config, "profile_rate_home.tsv");
    write_profile(pw, homeloc::expression_rate_profile(timelines, patterns, fc), "rate");
  }
  log << "homes: " << homes.size() << "/" << timelines.size() << " users passed ("
      << cell_report.loaded << " cells, " << cell_report.skipped << " rejected)\n";
}

struct HomeRow {
  std::string user;
  corpus::LatLon home;
};

std::vector<HomeRow> read_homes(const PipelineConfig& config) {
  require_artifact(config, "homes.tsv", "homes");
  std::vector<HomeRow> rows;
  for (const auto& f : read_table(config.artifact("homes.tsv"), 6)) {
    if (f[0] == "user_id" || f[5] != "ok") continue;
    double lat = 0, lon = 0;
    if (!parse_double(f[1], lat) || !parse_double(f[2], lon)) continue;
    rows.push_back({f[0], {lat, lon}});
  }
  if (rows.empty()) throw DataError("homes.tsv: no accepted home inferences");
  return rows;
}

void stage_census_join(const PipelineConfig& config, std::ostream& log) {
  const auto homes = read_homes(config);
  const std::string cells_path = require_input(config, "cells");
  census::LoadReport cell_report;
  const census::CensusIndex index = census::load_cells(cells_path, cell_report);

  std::map<std::string, double> medians;
  std::map<std::string, double> ninths;
  auto out = open_artifact(config, "incomes.tsv");
  out << "user_id\tcell_id\tmedian_income\tninth_decile\n";
  std::size_t outside = 0;
  for (const auto& row : homes) {
    const auto a = census::assign_income(row.user, row.home, index);
    if (!a) {
      ++outside;
      continue;
    }
    out << a->user_id << "\t" << a->cell_id << "\t" << fmt_double(a->median_income, 12) << "\t"
        << fmt_double(a->ninth_decile, 12) << "\n";
    medians[a->user_id] = a->median_income;
    ninths[a->user_id] = a->ninth_decile;
  }
  if (medians.empty()) throw DataError("census-join: no home inside census coverage");

  const census::BinaryLabels labels = census::label_binary(medians);
  {
    auto lw = open_artifact(config, "labels_census.tsv");
    write_labels(lw, labels.labels, medians);
  }
  std::vector<double> incomes;
  incomes.reserve(medians.size());
  for (const auto& [_, v] : medians) incomes.push_back(v);
  {
    auto lw = open_artifact(config, "lorenz.tsv");
    lw << "f\tcumulative_share\n";
    for (const auto& [f, c] : census::lorenz_curve(incomes))
      lw << fmt_double(f, 12) << "\t" << fmt_double(c, 12) << "\n";
  }
  {
    auto gw = open_artifact(config, "inequality.txt");
    gw << "users\t" << medians.size() << "\n";
    gw << "outside_coverage\t" << outside << "\n";
    gw << "mean_income\t" << fmt_double(labels.mean_income, 12) << "\n";
    gw << "gini\t" << fmt_double(census::gini(incomes), 12) << "\n";
    gw << "low_fraction\t" << fmt_double(labels.low_fraction, 12) << "\n";
    gw << "high_fraction\t" << fmt_double(labels.high_fraction, 12) << "\n";
  }
  log << "census-join: " << medians.size() << " users assigned, " << outside
      << " outside coverage, gini " << fmt_double(census::gini(incomes), 6) << "\n";
}

void stage_occupations(const PipelineConfig& config, std::ostream& log) {
  const std::string table_path = require_input(config, "salary_table");
  const std::string profiles_path = require_input(config, "occupation_profiles");
  const occupation::SalaryTable table = occupation::load_salary_table(table_path);
  const double threshold = config.effective.at("occupation").value("threshold", 0.9);

  std::vector<occupation::MatchResult> results;
  for (const auto& f : read_table(profiles_path, 2)) {
    if (f[0] == "user_id") continue;
    results.push_back(occupation::match_title(f[0], f[1], table, threshold));
  }
  if (results.empty()) throw DataError("occupation profiles: no records");
  const std::string override_path = config.input("manual_overrides");
  if (!override_path.empty())
    occupation::apply_overrides(results, occupation::load_manual_overrides(override_path));

  occupation::SalaryLabels labels;
  try {
    labels = occupation::label_binary_by_salary(results, table);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("occupations: ") + e.what());
  }

  auto out = open_artifact(config, "occupations.tsv");
  out << "user_id\toccupation_id\tstrategy\tscore\tsalary\tlabel\n";
  std::size_t by_regex = 0, by_seq = 0, by_manual = 0;
  for (const auto& r : results) {
    const occupation::SalaryTableEntry* e = table.find(*r.occupation_id);
    switch (r.strategy) {
      case occupation::MatchStrategy::regex: ++by_regex; break;
      case occupation::MatchStrategy::sequence: ++by_seq; break;
      case occupation::MatchStrategy::manual: ++by_manual; break;
    }
    out << r.user_id << "\t" << *r.occupation_id << "\t" << occupation::strategy_name(r.strategy)
        << "\t" << fmt_double(r.score, 8) << "\t" << fmt_double(e->salary, 12) << "\t"
        << (labels.labels.at(r.user_id) == census::SesClass::high ? "high" : "low") << "\n";
  }
  {
    std::map<std::string, double> salaries;
    for (const auto& r : results) salaries[r.user_id] = table.find(*r.occupation_id)->salary;
    auto lw = open_artifact(config, "labels_occupation.tsv");
    write_labels(lw, labels.labels, salaries);
  }
  log << "occupations: " << results.size() << " users (regex " << by_regex << ", sequence "
      << by_seq << ", manual " << by_manual << "), low fraction "
      << fmt_double(labels.low_fraction, 4) << "\n";
}

void stage_embed(const PipelineConfig& config, std::ostream& log) {
  const auto timelines = read_timelines(config);
  const auto params = config.embedding_params();
  const std::size_t min_count = static_cast<std::size_t>(
      config.effective.at("embedding").value("min_count", 5));
  semantics::Vocabulary vocab;
  semantics::EmbeddingMatrix emb;
  try {
    vocab = semantics::build_vocabulary(timelines, min_count);
    emb = semantics::train_skipgram(timelines, vocab, params);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("embed: ") + e.what());
  }
  emb.min_count = min_count;
  fs::create_directories(config.workspace);
  semantics::save_embedding(emb, vocab, config.artifact("embedding.tsv"),
                            "ses embedding.tsv config_hash=" + config.config_hash +
                                " seed=" + std::to_string(config.seed));
  std::ostringstream losses;
  for (const double l : emb.epoch_losses) losses << " " << fmt_double(l, 6);
  log << "embed: vocabulary " << vocab.size() << ", dim " << params.dim << ", epoch losses"
      << losses.str() << "\n";
}

void stage_topics(const PipelineConfig& config, std::ostream& log) {
  if (!fs::exists(config.artifact("embedding.tsv")))
    throw DependencyError("missing artifact " + config.artifact("embedding.tsv") +
                          "; run `embed` first");
  semantics::Vocabulary vocab;
  const semantics::EmbeddingMatrix emb = semantics::load_embedding(config.artifact("embedding.tsv"), vocab);
  const auto params = config.topic_params();
  if (params.k > vocab.size())
    throw DataError("topics: K=" + std::to_string(params.k) + " exceeds vocabulary size " +
                    std::to_string(vocab.size()));
  semantics::TopicModel model;
  try {
    const Mat sim = semantics::similarity_matrix(emb, vocab);
    model = semantics::spectral_cluster(sim, vocab.words, params);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("topics: ") + e.what());
  }
  {
    auto out = open_artifact(config, "topic_model.tsv");
    out << "word\ttopic_id\n";
    for (std::size_t i = 0; i < model.words.size(); ++i)
      out << model.words[i] << "\t" << model.topic_of_word[i] + 1 << "\n";
  }
  const auto timelines = read_timelines(config);
  std::vector<std::pair<std::string, std::vector<double>>> dists;
  {
    auto out = open_artifact(config, "topic_distributions.tsv");
    out << "user_id";
    for (std::size_t t = 1; t <= model.k; ++t) out << "\tt" << t;
    out << "\n";
    for (const auto& [user, tl] : timelines) {
      const auto dist = semantics::user_topic_distribution(tl, vocab, model);
      out << user;
      for (const double v : dist) out << "\t" << fmt_double(v, 12);
      out << "\n";
      dists.emplace_back(user, dist);
    }
  }
  if (dists.size() >= 2) {
    std::vector<std::vector<double>> cols;
    cols.reserve(dists.size());
    for (const auto& [_, d] : dists) cols.push_back(d);
    const semantics::TopicCorrelation corr = semantics::topic_correlation(cols);
    auto out = open_artifact(config, "topic_correlation.tsv");
    out << "order";
    for (const std::size_t o : corr.order) out << "\t" << o + 1;
    out << "\n";
    for (std::size_t a = 0; a < model.k; ++a) {
      out << "t" << a + 1;
      for (std::size_t b = 0; b < model.k; ++b) out << "\t" << fmt_double(corr.pearson.at(a, b), 8);
      out << "\n";
    }
  }
  log << "topics: K=" << model.k << " over vocabulary " << vocab.size() << ", distributions for "
      << dists.size() << " users\n";
}

std::map<std::string, std::vector<double>> read_distributions(const PipelineConfig& config) {
  require_artifact(config, "topic_distributions.tsv", "topics");
  std::map<std::string, std::vector<double>> out;
  for (const auto& f : read_table(config.artifact("topic_distributions.tsv"), 2)) {
    if (f[0] == "user_id") continue;
    std::vector<double> dist;
    dist.reserve(f.size() - 1);
    for (std::size_t i = 1; i < f.size(); ++i) {
      double v = 0;
      if (!parse_double(f[i], v)) throw DataError("topic_distributions.tsv: bad value");
      dist.push_back(v);
    }
    out[f[0]] = std::move(dist);
  }
  if (out.empty()) throw DataError("topic_distributions.tsv: empty");
  return out;
}

void stage_features(const PipelineConfig& config, std::ostream& log) {
  const auto timelines = read_timelines(config);
  const auto dists = read_distributions(config);
  const std::size_t k = dists.begin()->second.size();

  std::vector<features::UserDocument> docs;
  docs.reserve(timelines.size());
  for (const auto& [_, tl] : timelines) docs.push_back(features::build_document(tl));
  const features::NgramSelection sel =
      features::select_ngrams(docs, config.feature_unigrams(), config.feature_bigrams());
  const features::FeatureSchema schema = features::build_schema(sel, k);
  if (sel.padded_unigrams || sel.padded_bigrams)
    log << "features: padded " << sel.padded_unigrams << " unigram and " << sel.padded_bigrams
        << " bigram slots (corpus smaller than requested)\n";

  features::save_schema(schema, config.artifact("feature_schema.txt"),
                        "ses feature_schema.txt config_hash=" + config.config_hash +
                            " seed=" + std::to_string(config.seed));
  auto out = open_artifact(config, "features.tsv");
  out << "user_id";
  for (const auto& name : schema.names) out << "\t" << name;
  out << "\n";
  std::size_t i = 0;
  for (const auto& [user, tl] : timelines) {
    const auto dit = dists.find(user);
    const std::vector<double> dist =
        dit != dists.end() ? dit->second : std::vector<double>(k, 0.0);
    const features::FeatureVector fv =
        features::assemble(tl, docs[i], schema, dist, schema.version_hash);
    out << user;
    for (const double v : fv.values) out << "\t" << fmt_double(v, 12);
    out << "\n";
    ++i;
  }
  log << "features: " << timelines.size() << " vectors of length " << schema.size() << " (hash "
      << schema.version_hash << ")\n";
}

learn::Dataset read_feature_dataset(const PipelineConfig& config,
                                    const std::map<std::string, int>& labels) {
  require_artifact(config, "features.tsv", "features");
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (const auto& f : read_table(config.artifact("features.tsv"), 2)) {
    if (f[0] == "user_id") continue;
    if (labels.find(f[0]) == labels.end()) continue;
    std::vector<double> vals;
    vals.reserve(f.size() - 1);
    for (std::size_t i = 1; i < f.size(); ++i) {
      double v = 0;
      if (!parse_double(f[i], v)) throw DataError("features.tsv: bad value for " + f[0]);
      vals.push_back(v);
    }
    rows.emplace_back(f[0], std::move(vals));
  }
  if (rows.size() < 4) throw DataError("train: fewer than 4 labeled users with features");
  learn::Dataset data;
  data.x = Mat(rows.size(), rows[0].second.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].second.size() != data.x.cols) throw DataError("features.tsv: ragged rows");
    data.user_ids.push_back(rows[i].first);
    std::copy(rows[i].second.begin(), rows[i].second.end(), data.x.row(i));
    data.y.push_back(labels.at(rows[i].first));
  }
  try {
    data.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("train: ") + e.what());
  }
  return data;
}

void stage_train(const PipelineConfig& config, std::ostream& log) {
  const auto labels = track_labels(config);
  const learn::Dataset data = read_feature_dataset(config, labels);
  const learn::CVPlan plan = config.cv_plan();
  for (const learn::Family family : config.cv_families()) {
    const learn::CVReport report = learn::nested_cv(data, family, plan);
    learn::save_cv_report(report, config.artifact(std::string("cv_") + learn::family_name(family) + ".json"),
                          config.config_hash);
    // export one deployable model: best fold's config refit on all rows
    std::size_t best_fold = 0;
    for (std::size_t f = 1; f < report.folds.size(); ++f)
      if (report.folds[f].test_auc > report.folds[best_fold].test_auc) best_fold = f;
    const learn::HyperParams& hp = report.folds[best_fold].configs[report.folds[best_fold].chosen_config];
    std::vector<std::uint32_t> all(data.size());
    for (std::uint32_t i = 0; i < data.size(); ++i) all[i] = i;
    const learn::Classifier final_model =
        learn::train_family(family, data, all, hp, Rng(plan.seed).child("export").next_u64());
    learn::save_classifier(final_model,
                           config.artifact(std::string("model_") + learn::family_name(family) + ".json"),
                           config.config_hash, config.seed);
    log << "train[" << learn::family_name(family) << "] track=" << config.track << " n=" << data.size()
        << " auc=" << fmt_double(report.mean_auc, 4) << " +/- " << fmt_double(report.std_auc, 4)
        << " (" << report.total_inner_fits << " inner fits)\n";
  }
}

void stage_evaluate(const PipelineConfig& config, std::ostream& log) {
  const auto labels = track_labels(config);
  // row ids in the cv artifacts index the deterministic dataset order, which
  // read_feature_dataset reproduces; needed to line predictions up with the
  // planted truth labels when those are available
  const learn::Dataset data = read_feature_dataset(config, labels);
  std::map<std::string, int> truth;
  const std::string truth_path = config.input("truth");
  if (!truth_path.empty() && fs::exists(truth_path)) {
    for (const auto& f : read_table(truth_path, 2)) {
      if (f[0] == "user_id") continue;
      truth[f[0]] = f[1] == "high" ? 1 : 0;
    }
  }

  auto mw = open_artifact(config, "metrics.tsv");
  mw << "family\tauc_mean\tauc_std\tlow_precision\tlow_recall\tlow_f1\thigh_precision\thigh_recall"
        "\thigh_f1\tagreement\tkappa\n";
  for (const learn::Family family : config.cv_families()) {
    const std::string name = learn::family_name(family);
    const std::string cv_path = config.artifact("cv_" + name + ".json");
    if (!fs::exists(cv_path))
      throw DependencyError("missing artifact " + cv_path + "; run `train` first");
    const learn::CVReport report = learn::load_cv_report(cv_path);

    double p_low = 0, r_low = 0, f_low = 0, p_high = 0, r_high = 0, f_high = 0;
    std::vector<double> pooled_scores;
    std::vector<int> pooled_labels, pooled_preds, pooled_reference;
    for (const auto& fold : report.folds) {
      std::vector<int> preds;
      preds.reserve(fold.test_scores.size());
      for (const double s : fold.test_scores) preds.push_back(s >= 0.5 ? 1 : 0);
      const eval::ConfusionSummary cs = eval::precision_recall_f1(preds, fold.test_labels);
      p_low += cs.low.precision;
      r_low += cs.low.recall;
      f_low += cs.low.f1;
      p_high += cs.high.precision;
      r_high += cs.high.recall;
      f_high += cs.high.f1;
      for (std::size_t i = 0; i < fold.test_rows.size(); ++i) {
        pooled_scores.push_back(fold.test_scores[i]);
        pooled_labels.push_back(fold.test_labels[i]);
        pooled_preds.push_back(preds[i]);
        int reference = fold.test_labels[i];
        if (!truth.empty() && fold.test_rows[i] < data.user_ids.size()) {
          const auto it = truth.find(data.user_ids[fold.test_rows[i]]);
          if (it != truth.end()) reference = it->second;
        }
        pooled_reference.push_back(reference);
      }
    }
    const double nf = static_cast<double>(report.folds.size());

    const eval::ROCCurve curve = eval::roc_curve(pooled_scores, pooled_labels);
    {
      auto rw = open_artifact(config, "roc_" + name + ".tsv");
      rw << "fpr\ttpr\n";
      for (const auto& pt : curve.points)
        rw << fmt_double(pt.fpr, 12) << "\t" << fmt_double(pt.tpr, 12) << "\n";
    }
    // agreement of thresholded predictions against planted truth when given,
    // otherwise against the track labels
    const eval::AgreementStats ag = eval::agreement(pooled_preds, pooled_reference);

    mw << name << "\t" << fmt_double(report.mean_auc, 8) << "\t" << fmt_double(report.std_auc, 8)
       << "\t" << fmt_double(p_low / nf, 8) << "\t" << fmt_double(r_low / nf, 8) << "\t"
       << fmt_double(f_low / nf, 8) << "\t" << fmt_double(p_high / nf, 8) << "\t"
       << fmt_double(r_high / nf, 8) << "\t" << fmt_double(f_high / nf, 8) << "\t"
       << fmt_double(ag.percent_agreement, 8) << "\t" << fmt_double(ag.kappa, 8) << "\n";
    log << "evaluate[" << name << "]: pooled roc points " << curve.points.size() << ", auc "
        << fmt_double(report.mean_auc, 4) << "\n";
  }
}

void stage_report(const PipelineConfig& config, std::ostream& log) {
  // dataset sizes and class fractions per available label source
  {
    auto out = open_artifact(config, "report_datasets.txt");
    out << "dataset size and class fractions\n";
    out << "dataset      size    low     high\n";
    auto row = [&](const std::string& name, const std::map<std::string, int>& labels) {
      std::size_t low = 0;
      for (const auto& [_, v] : labels)
        if (v == 0) ++low;
      const double n = static_cast<double>(labels.size());
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%-12s %-7zu %-7.2f %-7.2f\n", name.c_str(), labels.size(),
                    static_cast<double>(low) / n, 1.0 - static_cast<double>(low) / n);
      out << buf;
    };
    bool any = false;
    if (fs::exists(config.artifact("labels_census.tsv"))) {
      row("census", read_labels_artifact(config, "labels_census.tsv", "census-join"));
      any = true;
    }
    if (fs::exists(config.artifact("labels_occupation.tsv"))) {
      row("occupation", read_labels_artifact(config, "labels_occupation.tsv", "occupations"));
      any = true;
    }
    if (!config.input("annotated").empty() && fs::exists(config.input("annotated"))) {
      row("annotated", annotated_labels(config));
      any = true;
    }
    if (!any) throw DependencyError("report: no label source available; run `census-join`, `occupations` or set inputs.annotated");
  }
  // AUC mean +/- std per family on this track
  {
    auto out = open_artifact(config, "report_auc.txt");
    out << "classification performance (outer CV): AUC mean +/- std, track=" << config.track << "\n";
    bool any = false;
    for (const learn::Family family : config.cv_families()) {
      const std::string name = learn::family_name(family);
      const std::string path = config.artifact("cv_" + name + ".json");
      if (!fs::exists(path)) continue;
      const learn::CVReport report = learn::load_cv_report(path);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%-14s %.3f +/- %.3f\n", name.c_str(), report.mean_auc,
                    report.std_auc);
      out << buf;
      any = true;
    }
    if (!any) throw DependencyError("report: no cv_<family>.json artifacts; run `train` first");
  }
  // per-class precision/recall/F1 from evaluate
  {
    require_artifact(config, "metrics.tsv", "evaluate");
    auto out = open_artifact(config, "report_class_metrics.txt");
    out << "per-class performance on outer test folds, track=" << config.track << "\n";
    out << "family         class  precision recall  f1\n";
    for (const auto& f : read_table(config.artifact("metrics.tsv"), 9)) {
      if (f[0] == "family") continue;
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%-14s low    %-9.3f %-7.3f %-7.3f\n", f[0].c_str(),
                    std::stod(f[3]), std::stod(f[4]), std::stod(f[5]));
      out << buf;
      std::snprintf(buf, sizeof(buf), "%-14s high   %-9.3f %-7.3f %-7.3f\n", f[0].c_str(),
                    std::stod(f[6]), std::stod(f[7]), std::stod(f[8]));
      out << buf;
    }
  }
  // per-topic mean income of mentioners vs non-mentioners (9th decile)
  if (fs::exists(config.artifact("incomes.tsv")) &&
      fs::exists(config.artifact("topic_distributions.tsv"))) {
    std::map<std::string, double> ninth;
    for (const auto& f : read_table(config.artifact("incomes.tsv"), 4)) {
      if (f[0] == "user_id") continue;
      double v = 0;
      if (parse_double(f[3], v)) ninth[f[0]] = v;
    }
    // human-supplied topic labels are an optional input, never inferred
    std::map<std::size_t, std::string> topic_labels;
    const std::string labels_path = config.input("topic_labels");
    if (!labels_path.empty() && fs::exists(labels_path)) {
      for (const auto& f : read_table(labels_path, 2)) {
        std::string id = f[0];
        if (!id.empty() && id[0] == 't') id = id.substr(1);
        long long t = 0;
        if (parse_long(id, t) && t >= 1) topic_labels[static_cast<std::size_t>(t)] = f[1];
      }
    }
    const auto dists = read_distributions(config);
    std::vector<std::pair<std::string, std::vector<double>>> have;
    for (const auto& [user, dist] : dists) {
      if (ninth.count(user)) have.emplace_back(user, dist);
    }
    if (!have.empty()) {
      const auto stats = semantics::topic_income_discrimination(have, ninth);
      auto out = open_artifact(config, "topic_income.tsv");
      out << "topic\tlabel\tmentioner_mean\tnon_mentioner_mean\tmentioners\tnon_mentioners\n";
      for (const auto& s : stats) {
        const auto lit = topic_labels.find(s.topic + 1);
        out << "t" << s.topic + 1 << "\t" << (lit != topic_labels.end() ? lit->second : "") << "\t"
            << (s.mentioner_mean ? fmt_double(*s.mentioner_mean, 12) : "") << "\t"
            << (s.non_mentioner_mean ? fmt_double(*s.non_mentioner_mean, 12) : "") << "\t"
            << s.mentioners << "\t" << s.non_mentioners << "\n";
      }
    }
  }
  log << "report: tables written under " << config.workspace << "\n";
}

}  // namespace

int run(const std::string& subcommand, const PipelineConfig& config, std::ostream& log) {
  if (subcommand == "synth") stage_synth(config, log);
  else if (subcommand == "preprocess") stage_preprocess(config, log);
  else if (subcommand == "homes") stage_homes(config, log);
  else if (subcommand == "census-join") stage_census_join(config, log);
  else if (subcommand == "occupations") stage_occupations(config, log);
  else if (subcommand == "embed") stage_embed(config, log);
  else if (subcommand == "topics") stage_topics(config, log);
  else if (subcommand == "features") stage_features(config, log);
  else if (subcommand == "train") stage_train(config, log);
  else if (subcommand == "evaluate") stage_evaluate(config, log);
  else if (subcommand == "report") stage_report(config, log);
  else throw ConfigError("unknown subcommand: " + subcommand);
  return 0;
}

int run_checked(const std::string& subcommand, const PipelineConfig& config, std::ostream& log) {
  try {
    return run(subcommand, config, log);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DependencyError& e) {
    log << "dependency error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    log << "data error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace ses::cli
