#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "ses/cli.hpp"
#include "ses/util/rng.hpp"
#include "ses/util/text.hpp"

namespace ses::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr std::int64_t kBaseTs = 1412121600;  // 2014-10-01 00:00 UTC
constexpr double kKmPerDegLat = 111.32;

std::string make_word(Rng& rng, std::size_t syllables) {
  static const char* cons[] = {"b", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  static const char* vowels[] = {"a", "e", "i", "o", "u"};
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w += cons[rng.uniform_int(std::uint64_t{13})];
    w += vowels[rng.uniform_int(std::uint64_t{5})];
  }
  return w;
}

std::vector<std::string> make_pool(Rng& rng, std::size_t count, std::set<std::string>& used) {
  std::vector<std::string> pool;
  while (pool.size() < count) {
    const std::string w = make_word(rng, 2 + rng.uniform_int(std::uint64_t{2}));
    if (used.insert(w).second) pool.push_back(w);
  }
  return pool;
}

// zipf-ish draw over a pool
const std::string& draw_word(Rng& rng, const std::vector<std::string>& pool, double skew) {
  const double u = rng.uniform();
  const double x = std::pow(u, skew);  // skew > 1 biases towards the front
  std::size_t i = static_cast<std::size_t>(x * static_cast<double>(pool.size()));
  if (i >= pool.size()) i = pool.size() - 1;
  return pool[i];
}

int utc_hour_for_local(int local_hour, int offset = 1) { return ((local_hour - offset) % 24 + 24) % 24; }

struct GeoPoint {
  std::int64_t ts;
  double lat, lon;
  bool at_home;
  bool at_night;
};

double snap4(double deg) { return std::llround(deg * 1e4) / 1e4; }

}  // namespace

SynthTruth synth_generate(const SynthSpec& spec, std::uint64_t seed, const std::string& out_dir,
                          const std::string& header) {
  spec.validate();
  std::filesystem::create_directories(out_dir);
  const auto open_out = [&](const std::string& name) {
    std::ofstream out(out_dir + "/" + name);
    if (header.empty()) return out;
    out << "# " << header << " " << name << "\n";
    return out;
  };
  Rng root(seed);
  SynthTruth truth;

  // ---- vocabulary pools ----
  Rng vocab_rng = root.child("vocab");
  std::set<std::string> used = {"rt", "dormir", "nuit", "dodo", "chez", "moi"};
  const auto common_pool = make_pool(vocab_rng, spec.vocab_common, used);
  const auto low_pool = make_pool(vocab_rng, spec.vocab_class, used);
  const auto high_pool = make_pool(vocab_rng, spec.vocab_class, used);
  const std::vector<std::string> home_words = {"dormir", "chez moi", "nuit", "dodo"};

  // ---- census grid ----
  Rng cell_rng = root.child("cells");
  struct CellInfo {
    std::string id;
    double lat0, lon0, lat1, lon1;
    bool rich;
    std::array<double, 9> deciles;
  };
  static const double kShape[9] = {0.45, 0.58, 0.70, 0.83, 1.00, 1.18, 1.40, 1.70, 2.15};
  std::vector<CellInfo> cells;
  std::vector<std::size_t> rich_cells, poor_cells;
  for (std::size_t r = 0; r < spec.grid_rows; ++r) {
    for (std::size_t c = 0; c < spec.grid_cols; ++c) {
      CellInfo cell;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "c%03zu_%03zu", r, c);
      cell.id = buf;
      cell.lat0 = spec.origin_lat + static_cast<double>(r) * spec.cell_size_deg;
      cell.lon0 = spec.origin_lon + static_cast<double>(c) * spec.cell_size_deg;
      cell.lat1 = cell.lat0 + spec.cell_size_deg;
      cell.lon1 = cell.lon0 + spec.cell_size_deg;
      cell.rich = cell_rng.uniform() < spec.rich_cell_fraction;
      const double scale = (cell.rich ? spec.income_high_scale : spec.income_low_scale) *
                           cell_rng.uniform(0.88, 1.12);
      for (int d = 0; d < 9; ++d) cell.deciles[static_cast<std::size_t>(d)] = kShape[d] * scale;
      (cell.rich ? rich_cells : poor_cells).push_back(cells.size());
      cells.push_back(cell);
    }
  }
  if (rich_cells.empty()) rich_cells.push_back(0);
  if (poor_cells.empty()) poor_cells.push_back(cells.size() - 1);

  {
    std::ofstream out = open_out("cells.txt");
    out << "# synthetic census cells: cell_id|ring lat lon pairs|d1..d9\n";
    for (const auto& cell : cells) {
      out << cell.id << "|" << fmt_double(cell.lat0, 10) << " " << fmt_double(cell.lon0, 10) << " "
          << fmt_double(cell.lat0, 10) << " " << fmt_double(cell.lon1, 10) << " "
          << fmt_double(cell.lat1, 10) << " " << fmt_double(cell.lon1, 10) << " "
          << fmt_double(cell.lat1, 10) << " " << fmt_double(cell.lon0, 10) << "|";
      for (int d = 0; d < 9; ++d) out << (d ? " " : "") << fmt_double(cell.deciles[static_cast<std::size_t>(d)], 10);
      out << "\n";
    }
  }

  // ---- salary table ----
  Rng occ_rng = root.child("occupations");
  struct Occ {
    std::string id, title, pattern;
    double salary;
    bool high;
  };
  std::vector<Occ> occs;
  for (std::size_t i = 0; i < 24; ++i) {
    Occ o;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "o%02zu", i);
    o.id = buf;
    std::string w1 = make_word(occ_rng, 3), w2 = make_word(occ_rng, 2);
    o.title = w1 + " " + w2;
    o.high = i >= 12;
    o.salary = o.high ? occ_rng.uniform(36000.0, 75000.0) : occ_rng.uniform(15000.0, 27000.0);
    // 60% of rows get a regex on the first title word
    o.pattern = (occ_rng.uniform() < 0.6) ? w1 : "";
    occs.push_back(o);
  }
  {
    std::ofstream out = open_out("salary_table.tsv");
    out << "occupation_id\tcanonical_title\tsalary\tpatterns\n";
    for (const auto& o : occs)
      out << o.id << "\t" << o.title << "\t" << fmt_double(o.salary, 10) << "\t" << o.pattern << "\n";
  }

  // ---- users ----
  const std::size_t n = spec.n_users;
  const std::size_t n_low = static_cast<std::size_t>(std::llround(spec.low_prior * static_cast<double>(n)));
  std::vector<int> klass(n, 1);
  for (std::size_t i = 0; i < std::min(n_low, n); ++i) klass[i] = 0;
  Rng class_rng = root.child("classes");
  class_rng.shuffle(klass);

  const std::size_t n_bots = static_cast<std::size_t>(std::llround(spec.bot_fraction * static_cast<double>(n)));
  std::vector<std::string> bot_kind(n, "");
  for (std::size_t i = 0; i < n_bots; ++i) bot_kind[i] = (i % 2 == 0) ? "speed" : "burst";
  Rng bot_rng = root.child("bots");
  bot_rng.shuffle(bot_kind);

  const int span_days = std::max(9, static_cast<int>(spec.span_days));

  std::vector<json> records;
  std::ofstream profiles = open_out("profiles.tsv");
  profiles << "user_id\tfriends\tfollowers\tdescription\n";
  std::ofstream occ_profiles = open_out("occupation_profiles.tsv");
  occ_profiles << "user_id\tjob_title\tskills\tdescription\n";
  std::ofstream overrides = open_out("manual_overrides.tsv");
  overrides << "user_id\toccupation_id\n";
  std::ofstream annotated = open_out("annotated.tsv");
  annotated << "user_id\tscore\n";
  std::ofstream truth_out = open_out("truth.tsv");
  truth_out << "user_id\tclass\thome_lat\thome_lon\tbot_kind\n";

  for (std::size_t ui = 0; ui < n; ++ui) {
    char ubuf[24];
    std::snprintf(ubuf, sizeof(ubuf), "u%05zu", ui);
    const std::string user = ubuf;
    Rng rng = root.child("user", ui);
    const bool high = klass[ui] == 1;
    const auto& own_pool = high ? high_pool : low_pool;

    // home cell matches the class most of the time
    const bool rich_home = rng.uniform() < (high ? 0.92 : 0.08);
    const auto& cell_ids = rich_home ? rich_cells : poor_cells;
    const CellInfo& cell = cells[cell_ids[rng.uniform_int(std::uint64_t{cell_ids.size()})]];
    const double margin = spec.cell_size_deg * 0.1;
    const double home_lat = snap4(rng.uniform(cell.lat0 + margin, cell.lat1 - margin));
    const double home_lon = snap4(rng.uniform(cell.lon0 + margin, cell.lon1 - margin));

    const double bearing = rng.uniform(0.0, 2.0 * M_PI);
    const double commute = rng.uniform(spec.commute_km_min, spec.commute_km_max);
    const double work_lat = snap4(home_lat + commute * std::cos(bearing) / kKmPerDegLat);
    const double work_lon =
        snap4(home_lon + commute * std::sin(bearing) /
                             (kKmPerDegLat * std::max(0.2, std::cos(home_lat * M_PI / 180.0))));

    truth.klass[user] = klass[ui];
    truth.home[user] = {home_lat, home_lon};
    truth.bot_kind[user] = bot_kind[ui];

    // ---- geo points ----
    std::size_t n_geo = spec.geo_points_min +
                        rng.uniform_int(std::uint64_t{spec.geo_points_max - spec.geo_points_min + 1});
    n_geo = std::min<std::size_t>(n_geo, static_cast<std::size_t>(span_days) - 1);
    std::set<int> day_set;
    while (day_set.size() < n_geo) day_set.insert(static_cast<int>(rng.uniform_int(std::uint64_t{static_cast<std::uint64_t>(span_days)})));
    std::vector<int> days(day_set.begin(), day_set.end());
    days.front() = 0;
    days.back() = span_days - 1;

    const std::size_t n_home = static_cast<std::size_t>(
        std::llround(spec.night_home_fraction * static_cast<double>(n_geo)));
    std::vector<GeoPoint> gpts;
    for (std::size_t g = 0; g < n_geo; ++g) {
      GeoPoint p{};
      const int day = days[g];
      if (g < n_home) {
        static const int night_hours[] = {20, 21, 22, 23, 0, 1, 2, 5, 6, 7};
        const int lh = night_hours[rng.uniform_int(std::uint64_t{10})];
        p.lat = home_lat + rng.uniform(-4e-5, 4e-5);
        p.lon = home_lon + rng.uniform(-4e-5, 4e-5);
        p.at_home = true;
        p.at_night = true;
        p.ts = kBaseTs + static_cast<std::int64_t>(day) * 86400 +
               utc_hour_for_local(lh) * 3600 + static_cast<std::int64_t>(rng.uniform_int(std::uint64_t{3600}));
      } else if (rng.uniform() < 0.6) {
        const int lh = 9 + static_cast<int>(rng.uniform_int(std::uint64_t{10}));  // 9-18 local
        p.lat = work_lat + rng.uniform(-4e-5, 4e-5);
        p.lon = work_lon + rng.uniform(-4e-5, 4e-5);
        p.ts = kBaseTs + static_cast<std::int64_t>(day) * 86400 +
               utc_hour_for_local(lh) * 3600 + static_cast<std::int64_t>(rng.uniform_int(std::uint64_t{3600}));
      } else {
        const int lh = 10 + static_cast<int>(rng.uniform_int(std::uint64_t{10}));  // 10-19 local
        p.lat = home_lat + rng.uniform(-0.04, 0.04);
        p.lon = home_lon + rng.uniform(-0.04, 0.04);
        p.ts = kBaseTs + static_cast<std::int64_t>(day) * 86400 +
               utc_hour_for_local(lh) * 3600 + static_cast<std::int64_t>(rng.uniform_int(std::uint64_t{3600}));
      }
      gpts.push_back(p);
    }
    std::sort(gpts.begin(), gpts.end(), [](const GeoPoint& a, const GeoPoint& b) { return a.ts < b.ts; });

    if (bot_kind[ui] == "speed") {
      // teleport: a far point 30 minutes after an existing one
      GeoPoint p = gpts[gpts.size() / 2];
      p.ts += 1800;
      p.lat = snap4(p.lat + 4.0);  // ~445 km north
      p.at_home = false;
      p.at_night = false;
      gpts.push_back(p);
      std::sort(gpts.begin(), gpts.end(), [](const GeoPoint& a, const GeoPoint& b) { return a.ts < b.ts; });
    } else if (bot_kind[ui] == "burst") {
      // four fixes on the same second at home
      GeoPoint p{};
      p.lat = home_lat;
      p.lon = home_lon;
      p.at_home = true;
      p.at_night = false;
      p.ts = kBaseTs + static_cast<std::int64_t>(days[days.size() / 2]) * 86400 +
             utc_hour_for_local(12) * 3600;
      for (int k = 0; k < 4; ++k) gpts.push_back(p);
      std::sort(gpts.begin(), gpts.end(), [](const GeoPoint& a, const GeoPoint& b) { return a.ts < b.ts; });
    }

    // ---- tweets ----
    std::size_t n_text = spec.tweets_min +
                         rng.uniform_int(std::uint64_t{spec.tweets_max - spec.tweets_min + 1});
    n_text = std::max(n_text, gpts.size());
    const double p_class_token = std::min(0.45, 0.45 * spec.signal_strength);

    auto make_text = [&](bool at_home_night, int& mentions, int& hashtags) {
      std::string text;
      const std::size_t n_tok = 5 + rng.uniform_int(std::uint64_t{7});
      for (std::size_t t = 0; t < n_tok; ++t) {
        std::string w = (rng.uniform() < p_class_token) ? draw_word(rng, own_pool, 1.6)
                                                        : draw_word(rng, common_pool, 2.2);
        if (rng.uniform() < 0.06) w[0] = static_cast<char>(std::toupper(w[0]));
        if (rng.uniform() < 0.05) w = "l'" + w;
        if (!text.empty()) text += " ";
        text += w;
        if (rng.uniform() < 0.08) text += (rng.uniform() < 0.5) ? "," : " !";
      }
      if (at_home_night && rng.uniform() < 0.35) text += " " + home_words[rng.uniform_int(std::uint64_t{home_words.size()})];
      if (rng.uniform() < 0.25) {
        text += " @ami" + std::to_string(rng.uniform_int(std::uint64_t{50}));
        ++mentions;
      }
      if (rng.uniform() < 0.15) {
        text += " #" + draw_word(rng, common_pool, 1.0);
        ++hashtags;
      }
      if (rng.uniform() < 0.10) text += " https://t.co/" + make_word(rng, 2);
      return text;
    };

    for (std::size_t t = 0; t < n_text; ++t) {
      json rec;
      rec["user_id"] = user;
      int mentions = 0, hashtags = 0;
      bool retweet = false;
      if (t < gpts.size()) {
        const GeoPoint& p = gpts[t];
        rec["ts"] = p.ts;
        std::string text = make_text(p.at_home && p.at_night, mentions, hashtags);
        rec["text"] = text;
        rec["lat"] = p.lat;
        rec["lon"] = p.lon;
        rec["place"] = false;
      } else {
        const int day = static_cast<int>(rng.uniform_int(std::uint64_t{static_cast<std::uint64_t>(span_days)}));
        const int lh = 7 + static_cast<int>(rng.uniform_int(std::uint64_t{17}));
        rec["ts"] = kBaseTs + static_cast<std::int64_t>(day) * 86400 +
                    utc_hour_for_local(lh) * 3600 + static_cast<std::int64_t>(rng.uniform_int(std::uint64_t{3600}));
        retweet = rng.uniform() < spec.retweet_fraction;
        std::string text = make_text(false, mentions, hashtags);
        if (retweet) {
          text = "rt @ami" + std::to_string(rng.uniform_int(std::uint64_t{50})) + " " + text;
          ++mentions;
        }
        rec["text"] = text;
        if (!retweet && rng.uniform() < spec.place_tag_fraction) {
          rec["lat"] = spec.origin_lat;  // city-level place tag
          rec["lon"] = spec.origin_lon;
          rec["place"] = true;
        }
      }
      rec["retweet"] = retweet;
      rec["mentions"] = mentions;
      rec["hashtags"] = hashtags;
      records.push_back(std::move(rec));
    }

    // ---- profile ----
    // the follower gap scales with the signal knob: a zero-signal corpus must
    // carry no class-correlated feature at all
    const double follower_mu = 4.4 + 0.5 * std::min(1.0, spec.signal_strength) * (high ? 1.0 : 0.0);
    const long long friends = static_cast<long long>(std::llround(std::exp(rng.normal(4.6, 0.7))));
    const long long followers =
        static_cast<long long>(std::llround(std::exp(rng.normal(follower_mu, 0.8))));
    std::string desc;
    const std::size_t n_desc = 4 + rng.uniform_int(std::uint64_t{5});
    for (std::size_t t = 0; t < n_desc; ++t) {
      if (!desc.empty()) desc += " ";
      desc += (rng.uniform() < p_class_token) ? draw_word(rng, own_pool, 1.3)
                                              : draw_word(rng, common_pool, 2.0);
    }
    profiles << user << "\t" << friends << "\t" << followers << "\t" << desc << "\n";

    // ---- occupation profile ----
    const bool high_occ = rng.uniform() < (high ? 0.9 : 0.1);
    const std::size_t base = high_occ ? 12 : 0;
    const Occ& occ = occs[base + rng.uniform_int(std::uint64_t{12})];
    std::string title = occ.title;
    const double mode = rng.uniform();
    if (mode < 0.4) {
      // keep canonical (regex or exact-sequence match)
    } else if (mode < 0.9) {
      // one edit: mutate a letter away from word boundaries
      const std::size_t pos = 1 + rng.uniform_int(std::uint64_t{title.size() - 2});
      if (title[pos] != ' ') title[pos] = (title[pos] == 'a') ? 'e' : 'a';
    } else {
      title = make_word(rng, 4) + " " + make_word(rng, 3);  // gibberish, manual queue
      overrides << user << "\t" << occ.id << "\n";
    }
    occ_profiles << user << "\t" << title << "\t" << draw_word(rng, common_pool, 1.5) << ","
                 << draw_word(rng, common_pool, 1.5) << "\t" << desc << "\n";

    // ---- annotated score ----
    bool ann_high = high;
    if (rng.uniform() < spec.annotated_noise) ann_high = !ann_high;
    const int score = ann_high ? 6 + static_cast<int>(rng.uniform_int(std::uint64_t{4}))
                               : 1 + static_cast<int>(rng.uniform_int(std::uint64_t{5}));
    annotated << user << "\t" << score << "\n";

    truth_out << user << "\t" << (high ? "high" : "low") << "\t" << fmt_double(home_lat, 10) << "\t"
              << fmt_double(home_lon, 10) << "\t" << bot_kind[ui] << "\n";
  }

  // shuffled stream exercises the sorting downstream
  Rng shuffle_rng = root.child("stream");
  shuffle_rng.shuffle(records);
  {
    std::ofstream out = open_out("tweets.jsonl");
    for (const auto& rec : records) out << rec.dump() << "\n";
  }
  {
    std::ofstream out = open_out("home_patterns.txt");
    out << "dormir\nchez moi\nnuit\ndodo\n";
  }
  return truth;
}

}  // namespace ses::cli
