#include "ses/homeloc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <stdexcept>

#include "ses/util/text.hpp"

namespace ses::homeloc {

namespace {
constexpr double kEarthRadiusKm = 6371.0;

double deg2rad(double d) { return d * M_PI / 180.0; }

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return (n % 2 == 1) ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::int64_t bin_coord(double deg) { return std::llround(deg * 1e4); }
double unbin_coord(std::int64_t b) { return static_cast<double>(b) / 1e4; }
}  // namespace

const char* filter_status_name(FilterStatus s) {
  switch (s) {
    case FilterStatus::ok: return "ok";
    case FilterStatus::too_few_points: return "too_few_points";
    case FilterStatus::too_few_in_cells: return "too_few_in_cells";
    case FilterStatus::span_too_short: return "span_too_short";
    case FilterStatus::median_mobility: return "median_mobility";
    case FilterStatus::speed: return "speed";
    case FilterStatus::burst: return "burst";
  }
  return "?";
}

double haversine_km(LatLon a, LatLon b) {
  const double lat1 = deg2rad(a.lat);
  const double lat2 = deg2rad(b.lat);
  const double dlat = lat2 - lat1;
  const double dlon = deg2rad(b.lon - a.lon);
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

MobilityTrace trace_from_timeline(const corpus::UserTimeline& timeline) {
  MobilityTrace trace;
  trace.user_id = timeline.user_id;
  for (const auto& t : timeline.tweets) {
    if (!t.coordinates || t.is_place_tag) continue;
    trace.points.push_back({t.timestamp, t.coordinates->lat, t.coordinates->lon});
  }
  std::stable_sort(trace.points.begin(), trace.points.end(),
                   [](const TracePoint& a, const TracePoint& b) { return a.timestamp < b.timestamp; });
  return trace;
}

FilterStatus eligibility_filter(const MobilityTrace& trace, const census::CensusIndex& index,
                                const FilterConfig& cfg) {
  if (trace.points.size() < cfg.min_points) return FilterStatus::too_few_points;
  std::size_t in_cells = 0;
  for (const auto& p : trace.points) {
    if (index.locate({p.lat, p.lon})) ++in_cells;
  }
  if (in_cells < cfg.min_in_cells) return FilterStatus::too_few_in_cells;
  if (!(trace.observation_span_days() > cfg.min_span_days)) return FilterStatus::span_too_short;
  return FilterStatus::ok;
}

FilterStatus mobility_filter(const MobilityTrace& trace, const FilterConfig& cfg) {
  const auto& pts = trace.points;
  if (pts.size() >= 2) {
    std::vector<double> dists;
    dists.reserve(pts.size() - 1);
    for (std::size_t i = 1; i < pts.size(); ++i)
      dists.push_back(haversine_km({pts[i - 1].lat, pts[i - 1].lon}, {pts[i].lat, pts[i].lon}));
    // speed is reported before the median rule: an infeasible jump is the
    // stronger signal and a two-point teleport trips both
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double km = dists[i - 1];
      // dt floored to one second: same-second fixes are judged as one second apart
      const double dt = std::max<double>(1.0, static_cast<double>(pts[i].timestamp - pts[i - 1].timestamp));
      if (km / (dt / 3600.0) > cfg.max_speed_kmh) return FilterStatus::speed;
    }
    if (median_of(dists) > cfg.max_median_km) return FilterStatus::median_mobility;
  }
  // sliding window [t_i, t_i + w], inclusive
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t0 = static_cast<double>(pts[i].timestamp);
    std::size_t count = 0;
    for (std::size_t j = i; j < pts.size(); ++j) {
      if (static_cast<double>(pts[j].timestamp) - t0 <= cfg.burst_window_s) ++count;
      else break;
    }
    if (count > cfg.burst_max) return FilterStatus::burst;
  }
  return FilterStatus::ok;
}

HomeInference infer_home(const MobilityTrace& trace, const FilterConfig& cfg) {
  if (trace.points.empty()) throw std::invalid_argument("infer_home: empty trace");
  struct BinStats {
    std::size_t visits = 0;
    std::size_t night_visits = 0;
  };
  std::map<std::pair<std::int64_t, std::int64_t>, BinStats> bins;
  for (const auto& p : trace.points) {
    auto& b = bins[{bin_coord(p.lat), bin_coord(p.lon)}];
    ++b.visits;
    const int h = local_hour(p.timestamp, cfg.utc_offset_hours);
    if (h >= 20 || h < 8) ++b.night_visits;
  }
  const std::pair<std::int64_t, std::int64_t>* best_key = nullptr;
  const BinStats* best = nullptr;
  for (const auto& [key, stats] : bins) {
    bool take = false;
    if (best == nullptr || stats.visits > best->visits) {
      take = true;
    } else if (stats.visits == best->visits) {
      // night share first; the map iterates keys ascending, so on a full tie
      // the earlier (lexicographically smaller) key is kept
      const double night_new = static_cast<double>(stats.night_visits) / static_cast<double>(stats.visits);
      const double night_best = static_cast<double>(best->night_visits) / static_cast<double>(best->visits);
      if (night_new > night_best) take = true;
    }
    if (take) {
      best_key = &key;
      best = &stats;
    }
  }
  HomeInference h;
  h.user_id = trace.user_id;
  h.home = {unbin_coord(best_key->first), unbin_coord(best_key->second)};
  h.support_count = best->visits;
  h.total_points = trace.points.size();
  return h;
}

int local_hour(std::int64_t utc_ts, int utc_offset_hours) {
  std::int64_t sec = (utc_ts + static_cast<std::int64_t>(utc_offset_hours) * 3600) % 86400;
  if (sec < 0) sec += 86400;
  return static_cast<int>(sec / 3600);
}

HourlyProfile hourly_distance_profile(const std::vector<MobilityTrace>& traces,
                                      const std::map<std::string, HomeInference>& homes,
                                      const FilterConfig& cfg) {
  HourlyProfile prof;
  std::array<double, 24> sums{};
  for (const auto& trace : traces) {
    const auto it = homes.find(trace.user_id);
    if (it == homes.end()) continue;
    for (const auto& p : trace.points) {
      const int h = local_hour(p.timestamp, cfg.utc_offset_hours);
      sums[static_cast<std::size_t>(h)] += haversine_km({p.lat, p.lon}, it->second.home);
      ++prof.counts[static_cast<std::size_t>(h)];
    }
  }
  for (std::size_t h = 0; h < 24; ++h) {
    prof.values[h] = prof.counts[h] ? sums[h] / static_cast<double>(prof.counts[h]) : 0.0;
  }
  return prof;
}

HourlyProfile expression_rate_profile(const std::map<std::string, corpus::UserTimeline>& timelines,
                                      const std::vector<std::string>& patterns,
                                      const FilterConfig& cfg) {
  if (patterns.empty()) throw std::invalid_argument("expression_rate_profile: no patterns");
  std::vector<std::wregex> regexes;
  regexes.reserve(patterns.size());
  for (const auto& p : patterns) regexes.emplace_back(to_wide(p), std::wregex::ECMAScript);
  HourlyProfile prof;
  std::size_t total = 0;
  for (const auto& [_, tl] : timelines) {
    for (const auto& t : tl.tweets) {
      const std::wstring cleaned = to_wide(corpus::clean_text(t.text));
      bool hit = false;
      for (const auto& re : regexes) {
        if (std::regex_search(cleaned, re)) {
          hit = true;
          break;
        }
      }
      if (!hit) continue;
      const int h = local_hour(t.timestamp, cfg.utc_offset_hours);
      ++prof.counts[static_cast<std::size_t>(h)];
      ++total;
    }
  }
  if (total == 0) {
    prof.no_matches = true;
    return prof;
  }
  for (std::size_t h = 0; h < 24; ++h)
    prof.values[h] = static_cast<double>(prof.counts[h]) / static_cast<double>(total);
  return prof;
}

HourlyProfile point_rate_profile(const std::vector<MobilityTrace>& traces, const FilterConfig& cfg) {
  HourlyProfile prof;
  std::size_t total = 0;
  for (const auto& trace : traces) {
    for (const auto& p : trace.points) {
      const int h = local_hour(p.timestamp, cfg.utc_offset_hours);
      ++prof.counts[static_cast<std::size_t>(h)];
      ++total;
    }
  }
  if (total == 0) {
    prof.no_matches = true;
    return prof;
  }
  for (std::size_t h = 0; h < 24; ++h)
    prof.values[h] = static_cast<double>(prof.counts[h]) / static_cast<double>(total);
  return prof;
}

std::vector<std::string> load_patterns_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pattern list: " + path);
  std::vector<std::string> patterns;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t[0] != '#') patterns.push_back(t);
  }
  return patterns;
}

}  // namespace ses::homeloc
