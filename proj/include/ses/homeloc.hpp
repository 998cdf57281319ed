#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ses/census.hpp"
#include "ses/corpus.hpp"

namespace ses::homeloc {

using corpus::LatLon;

struct TracePoint {
  std::int64_t timestamp = 0;
  double lat = 0.0;
  double lon = 0.0;
};

struct MobilityTrace {
  std::string user_id;
  std::vector<TracePoint> points;  // time-ordered GPS fixes, place tags excluded
  double observation_span_days() const {
    if (points.size() < 2) return 0.0;
    return static_cast<double>(points.back().timestamp - points.front().timestamp) / 86400.0;
  }
};

struct HomeInference {
  std::string user_id;
  LatLon home;                 // grid-binned coordinate (4 decimal degrees)
  std::size_t support_count = 0;  // visits at the winning bin
  std::size_t total_points = 0;
};

struct HourlyProfile {
  std::array<double, 24> values{};   // mean km per hour, or rate summing to 1
  std::array<std::size_t, 24> counts{};
  bool no_matches = false;  // rate profile had nothing to normalize
};

enum class FilterStatus {
  ok,
  too_few_points,
  too_few_in_cells,
  span_too_short,
  median_mobility,
  speed,
  burst,
};

const char* filter_status_name(FilterStatus s);

struct FilterConfig {
  std::size_t min_points = 5;
  std::size_t min_in_cells = 3;
  double min_span_days = 7.0;      // strict: span must exceed this
  double max_median_km = 30.0;
  double max_speed_kmh = 130.0;
  double burst_window_s = 2.0;     // sliding, inclusive at both ends
  std::size_t burst_max = 3;       // more than this many points in a window fails
  int utc_offset_hours = 1;        // local time for night/day logic
};

// Great-circle distance, Earth radius 6371.0 km.
double haversine_km(LatLon a, LatLon b);

// Geolocated points of a timeline, place tags excluded, sorted by time.
MobilityTrace trace_from_timeline(const corpus::UserTimeline& timeline);

// >= min_points GPS fixes, >= min_in_cells inside valid census cells, span
// strictly longer than min_span_days.
FilterStatus eligibility_filter(const MobilityTrace& trace, const census::CensusIndex& index,
                                const FilterConfig& cfg = {});

// (i) median consecutive-point distance <= max_median_km, (ii) no consecutive
// pair implying speed > max_speed_kmh, (iii) no sliding burst window with more
// than burst_max points; checked in that order.
FilterStatus mobility_filter(const MobilityTrace& trace, const FilterConfig& cfg = {});

// Most frequent 4-decimal-degree bin; ties prefer the larger share of points
// in the 20h-8h local window, then the lexicographically smallest (lat, lon).
HomeInference infer_home(const MobilityTrace& trace, const FilterConfig& cfg = {});

// Mean distance from home per local hour over all points of all users that
// have a home inference.
HourlyProfile hourly_distance_profile(const std::vector<MobilityTrace>& traces,
                                      const std::map<std::string, HomeInference>& homes,
                                      const FilterConfig& cfg = {});

// Hourly rate (sums to 1) of tweets whose cleaned text matches any pattern.
HourlyProfile expression_rate_profile(const std::map<std::string, corpus::UserTimeline>& timelines,
                                      const std::vector<std::string>& patterns,
                                      const FilterConfig& cfg = {});

// Hourly rate of geolocated points regardless of content.
HourlyProfile point_rate_profile(const std::vector<MobilityTrace>& traces,
                                 const FilterConfig& cfg = {});

std::vector<std::string> load_patterns_file(const std::string& path);

int local_hour(std::int64_t utc_ts, int utc_offset_hours);

}  // namespace ses::homeloc
