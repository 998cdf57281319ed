#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "ses/homeloc.hpp"
#include "ses/util/rng.hpp"

using namespace ses;
using corpus::LatLon;
using homeloc::FilterStatus;
using homeloc::MobilityTrace;
using homeloc::TracePoint;

namespace {

census::CensusIndex unit_grid_index(double lat0, double lon0, int n, double size) {
  std::vector<census::CensusCell> cells;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      census::CensusCell cell;
      char id[32];
      std::snprintf(id, sizeof(id), "c%02d_%02d", r, c);
      cell.cell_id = id;
      const double la = lat0 + r * size, lo = lon0 + c * size;
      cell.rings = {{{la, lo}, {la, lo + size}, {la + size, lo + size}, {la + size, lo}}};
      for (int d = 0; d < 9; ++d) cell.deciles[static_cast<std::size_t>(d)] = 1000.0 * (d + 1);
      cells.push_back(cell);
    }
  return census::CensusIndex(std::move(cells));
}

// spherical law of cosines, an independent great-circle formula
double slc_km(LatLon a, LatLon b) {
  const double p1 = a.lat * M_PI / 180, p2 = b.lat * M_PI / 180;
  const double dl = (b.lon - a.lon) * M_PI / 180;
  const double x = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  return 6371.0 * std::acos(std::min(1.0, std::max(-1.0, x)));
}

MobilityTrace make_trace(const std::string& user, std::vector<TracePoint> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const TracePoint& a, const TracePoint& b) { return a.timestamp < b.timestamp; });
  return {user, std::move(pts)};
}

constexpr std::int64_t kDay = 86400;

struct PlantedUser {
  MobilityTrace trace;
  LatLon home;
  std::string bot;  // "", "speed", "burst"
};

// planted-home generator: 60% of points at the home bin during night hours,
// the rest at a work point or scattered nearby during the day
PlantedUser plant_user(Rng& rng, std::size_t idx, double night_fraction = 0.6) {
  PlantedUser u;
  const double home_lat = std::round(rng.uniform(48.0, 49.0) * 1e4) / 1e4;
  const double home_lon = std::round(rng.uniform(2.0, 3.0) * 1e4) / 1e4;
  u.home = {home_lat, home_lon};
  const double work_lat = home_lat + rng.uniform(0.02, 0.08);
  const double work_lon = home_lon + rng.uniform(0.02, 0.08);
  const std::size_t n = 12 + rng.uniform_int(std::uint64_t{14});
  const std::size_t n_home = static_cast<std::size_t>(std::llround(night_fraction * static_cast<double>(n)));
  std::vector<TracePoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    TracePoint p;
    const std::int64_t day = static_cast<std::int64_t>(i) * 2;  // distinct days, span > 7d
    if (i < n_home) {
      const int hour_utc = (21 + static_cast<int>(rng.uniform_int(std::uint64_t{8}))) % 24;
      p.timestamp = day * kDay + hour_utc * 3600 + static_cast<std::int64_t>(rng.uniform_int(std::uint64_t{3600}));
      p.lat = home_lat + rng.uniform(-4e-5, 4e-5);
      p.lon = home_lon + rng.uniform(-4e-5, 4e-5);
    } else {
      p.timestamp = day * kDay + (10 + static_cast<int>(rng.uniform_int(std::uint64_t{7}))) * 3600;
      if (rng.uniform() < 0.7) {
        p.lat = work_lat + rng.uniform(-4e-5, 4e-5);
        p.lon = work_lon + rng.uniform(-4e-5, 4e-5);
      } else {
        p.lat = home_lat + rng.uniform(-0.03, 0.03);
        p.lon = home_lon + rng.uniform(-0.03, 0.03);
      }
    }
    p.timestamp += 1;  // keep timestamps positive and distinct enough
    pts.push_back(p);
  }
  u.trace = make_trace("u" + std::to_string(idx), std::move(pts));
  return u;
}

}  // namespace

TEST_SUITE("homeloc") {

TEST_CASE("haversine fixed values and the independent oracle") {
  CHECK(homeloc::haversine_km({48.85, 2.35}, {48.85, 2.35}) == doctest::Approx(0.0));
  CHECK(homeloc::haversine_km({0, 0}, {0, 180}) == doctest::Approx(6371.0 * M_PI).epsilon(1e-9));
  // Paris - Lyon vs the spherical law of cosines
  const LatLon paris{48.8566, 2.3522}, lyon{45.7640, 4.8357};
  CHECK(homeloc::haversine_km(paris, lyon) == doctest::Approx(slc_km(paris, lyon)).epsilon(1e-9));
  CHECK(homeloc::haversine_km(paris, lyon) == doctest::Approx(391.5).epsilon(0.01));
  // symmetry + triangle inequality on random triples
  Rng rng(41);
  for (int i = 0; i < 300; ++i) {
    const LatLon a{rng.uniform(-89, 89), rng.uniform(-180, 180)};
    const LatLon b{rng.uniform(-89, 89), rng.uniform(-180, 180)};
    const LatLon c{rng.uniform(-89, 89), rng.uniform(-180, 180)};
    CHECK(homeloc::haversine_km(a, b) == doctest::Approx(homeloc::haversine_km(b, a)).epsilon(1e-12));
    CHECK(homeloc::haversine_km(a, c) <=
          homeloc::haversine_km(a, b) + homeloc::haversine_km(b, c) + 1e-9);
  }
}

TEST_CASE("eligibility filter fixed cases") {
  const auto index = unit_grid_index(48.0, 2.0, 4, 0.25);
  std::vector<TracePoint> in_cells;
  for (int i = 0; i < 5; ++i)
    in_cells.push_back({i * 2 * kDay + 1, 48.1 + i * 0.001, 2.1});
  // 5 points, all in cells, span 8 days -> pass
  CHECK(homeloc::eligibility_filter(make_trace("u", in_cells), index) == FilterStatus::ok);

  // 4 points -> too few
  auto four = in_cells;
  four.pop_back();
  CHECK(homeloc::eligibility_filter(make_trace("u", four), index) == FilterStatus::too_few_points);

  // only 2 inside cells, long span -> too_few_in_cells
  std::vector<TracePoint> two_in;
  two_in.push_back({1, 48.1, 2.1});
  two_in.push_back({15 * kDay, 48.2, 2.2});
  for (int i = 0; i < 3; ++i) two_in.push_back({(2 + i) * kDay, 10.0, 10.0});
  CHECK(homeloc::eligibility_filter(make_trace("u", two_in), index) == FilterStatus::too_few_in_cells);

  // short span
  std::vector<TracePoint> brief;
  for (int i = 0; i < 5; ++i) brief.push_back({i * 3600 + 1, 48.1, 2.1});
  CHECK(homeloc::eligibility_filter(make_trace("u", brief), index) == FilterStatus::span_too_short);
}

TEST_CASE("eligibility filter equals a naive re-evaluation on 1000 random traces") {
  const auto index = unit_grid_index(48.0, 2.0, 4, 0.25);
  const homeloc::FilterConfig cfg;
  Rng rng(42);
  for (int t = 0; t < 1000; ++t) {
    std::vector<TracePoint> pts;
    const std::size_t n = 1 + rng.uniform_int(std::uint64_t{9});
    for (std::size_t i = 0; i < n; ++i) {
      TracePoint p;
      p.timestamp = 1 + static_cast<std::int64_t>(rng.uniform_int(std::uint64_t{12 * kDay}));
      p.lat = rng.uniform(47.8, 49.2);
      p.lon = rng.uniform(1.8, 3.2);
      pts.push_back(p);
    }
    const MobilityTrace trace = make_trace("u", pts);
    // oracle: restate the three rules directly
    FilterStatus expected = FilterStatus::ok;
    if (trace.points.size() < 5) {
      expected = FilterStatus::too_few_points;
    } else {
      std::size_t in_cells = 0;
      for (const auto& p : trace.points)
        if (index.locate({p.lat, p.lon})) ++in_cells;
      if (in_cells < 3) {
        expected = FilterStatus::too_few_in_cells;
      } else if (!(static_cast<double>(trace.points.back().timestamp - trace.points.front().timestamp) >
                   7.0 * kDay)) {
        expected = FilterStatus::span_too_short;
      }
    }
    CHECK(homeloc::eligibility_filter(trace, index, cfg) == expected);
  }
}

TEST_CASE("mobility filter fixed cases") {
  // two points 200 km apart in 1 h -> speed
  std::vector<TracePoint> fast = {{1, 48.0, 2.0}, {3601, 48.0 + 200.0 / 111.32, 2.0}};
  CHECK(homeloc::mobility_filter(make_trace("u", fast)) == FilterStatus::speed);

  // 4 identical timestamps -> burst
  std::vector<TracePoint> burst(4, {1000, 48.0, 2.0});
  CHECK(homeloc::mobility_filter(make_trace("u", burst)) == FilterStatus::burst);

  // median consecutive distance above 30 km
  std::vector<TracePoint> wander;
  for (int i = 0; i < 6; ++i) wander.push_back({i * 2 * kDay + 1, 48.0 + 0.4 * i, 2.0});
  CHECK(homeloc::mobility_filter(make_trace("u", wander)) == FilterStatus::median_mobility);

  // calm commuter passes
  std::vector<TracePoint> calm;
  for (int i = 0; i < 6; ++i) calm.push_back({i * 2 * kDay + 1, 48.0 + 0.01 * (i % 2), 2.0});
  CHECK(homeloc::mobility_filter(make_trace("u", calm)) == FilterStatus::ok);
}

TEST_CASE("planted bots are rejected with the right reason, humans retained") {
  Rng rng(43);
  const auto index = unit_grid_index(47.9, 1.9, 6, 0.25);
  int humans = 0, speed_bots = 0, burst_bots = 0;
  for (int i = 0; i < 300; ++i) {
    PlantedUser u = plant_user(rng, static_cast<std::size_t>(i));
    const int kind = i % 3;
    if (kind == 1) {
      TracePoint tele = u.trace.points[u.trace.points.size() / 2];
      tele.timestamp += 600;
      tele.lat += 3.0;  // ~330 km in 10 minutes
      u.trace.points.push_back(tele);
      std::sort(u.trace.points.begin(), u.trace.points.end(),
                [](const TracePoint& a, const TracePoint& b) { return a.timestamp < b.timestamp; });
    } else if (kind == 2) {
      const TracePoint dup = u.trace.points[1];
      for (int k = 0; k < 3; ++k) u.trace.points.push_back(dup);
      std::sort(u.trace.points.begin(), u.trace.points.end(),
                [](const TracePoint& a, const TracePoint& b) { return a.timestamp < b.timestamp; });
    }
    REQUIRE(homeloc::eligibility_filter(u.trace, index) == FilterStatus::ok);
    const FilterStatus status = homeloc::mobility_filter(u.trace);
    if (kind == 0) {
      CHECK(status == FilterStatus::ok);
      ++humans;
    } else if (kind == 1) {
      CHECK(status == FilterStatus::speed);
      ++speed_bots;
    } else {
      CHECK(status == FilterStatus::burst);
      ++burst_bots;
    }
  }
  CHECK(humans == 100);
  CHECK(speed_bots == 100);
  CHECK(burst_bots == 100);
}

TEST_CASE("filter cascade accept set is order-independent") {
  Rng rng(44);
  const auto index = unit_grid_index(47.9, 1.9, 6, 0.25);
  for (int i = 0; i < 200; ++i) {
    PlantedUser u = plant_user(rng, static_cast<std::size_t>(i));
    if (i % 4 == 1) u.trace.points.resize(3);  // break eligibility sometimes
    if (i % 4 == 2) {
      TracePoint tele = u.trace.points.back();
      tele.timestamp += 60;
      tele.lat += 2.0;
      u.trace.points.push_back(tele);
    }
    const bool a = homeloc::eligibility_filter(u.trace, index) == FilterStatus::ok &&
                   homeloc::mobility_filter(u.trace) == FilterStatus::ok;
    const bool b = homeloc::mobility_filter(u.trace) == FilterStatus::ok &&
                   homeloc::eligibility_filter(u.trace, index) == FilterStatus::ok;
    CHECK(a == b);
  }
}

TEST_CASE("infer_home mode, support and tie rules") {
  std::vector<TracePoint> pts;
  for (int i = 0; i < 4; ++i) pts.push_back({i * kDay + 1, 48.8566, 2.3522});
  pts.push_back({10 * kDay, 48.9, 2.4});
  pts.push_back({11 * kDay, 48.7, 2.2});
  pts.push_back({12 * kDay, 48.6, 2.1});
  const auto h = homeloc::infer_home(make_trace("u", pts));
  CHECK(h.home.lat == doctest::Approx(48.8566));
  CHECK(h.home.lon == doctest::Approx(2.3522));
  CHECK(h.support_count == 4);
  CHECK(h.total_points == 7);

  // 2-2 tie, equal night shares -> lexicographically smallest bin
  std::vector<TracePoint> tie = {{kDay + 12 * 3600, 48.2, 2.2},
                                 {2 * kDay + 12 * 3600, 48.2, 2.2},
                                 {3 * kDay + 12 * 3600, 48.1, 2.1},
                                 {4 * kDay + 12 * 3600, 48.1, 2.1}};
  const auto t1 = homeloc::infer_home(make_trace("u", tie));
  CHECK(t1.home.lat == doctest::Approx(48.1));
  CHECK(t1.home.lon == doctest::Approx(2.1));

  // night share dominates the tie when it differs: 2 night points at the
  // larger bin flip the winner
  std::vector<TracePoint> night_tie = {{kDay + 22 * 3600, 48.2, 2.2},   // 23h local
                                       {2 * kDay + 23 * 3600, 48.2, 2.2},  // 0h local next day
                                       {3 * kDay + 12 * 3600, 48.1, 2.1},
                                       {4 * kDay + 12 * 3600, 48.1, 2.1}};
  const auto t2 = homeloc::infer_home(make_trace("u", night_tie));
  CHECK(t2.home.lat == doctest::Approx(48.2));

  CHECK_THROWS_AS((void)homeloc::infer_home(MobilityTrace{"u", {}}), std::invalid_argument);
}

TEST_CASE("infer_home is invariant under point order permutations") {
  Rng rng(45);
  PlantedUser u = plant_user(rng, 0);
  const auto base = homeloc::infer_home(u.trace);
  for (int perm = 0; perm < 10; ++perm) {
    MobilityTrace shuffled = u.trace;
    rng.shuffle(shuffled.points);
    std::sort(shuffled.points.begin(), shuffled.points.end(),
              [](const TracePoint& a, const TracePoint& b) { return a.timestamp < b.timestamp; });
    const auto h = homeloc::infer_home(shuffled);
    CHECK(h.home.lat == base.home.lat);
    CHECK(h.home.lon == base.home.lon);
    CHECK(h.support_count == base.support_count);
  }
}

TEST_CASE("planted homes recovered for >= 95% of 300 users") {
  Rng rng(46);
  std::size_t exact = 0;
  const std::size_t n = 300;
  for (std::size_t i = 0; i < n; ++i) {
    const PlantedUser u = plant_user(rng, i);
    const auto h = homeloc::infer_home(u.trace);
    if (std::llround(h.home.lat * 1e4) == std::llround(u.home.lat * 1e4) &&
        std::llround(h.home.lon * 1e4) == std::llround(u.home.lon * 1e4))
      ++exact;
  }
  CHECK(static_cast<double>(exact) / static_cast<double>(n) >= 0.95);
}

TEST_CASE("hourly distance profile") {
  // all points at home -> all-zero profile
  std::vector<TracePoint> at_home(5, {kDay + 1, 48.5, 2.5});
  for (int i = 0; i < 5; ++i) at_home[static_cast<std::size_t>(i)].timestamp += i * kDay;
  const MobilityTrace trace = make_trace("u", at_home);
  std::map<std::string, homeloc::HomeInference> homes;
  homes["u"] = homeloc::infer_home(trace);
  auto prof = homeloc::hourly_distance_profile({trace}, homes);
  for (const double v : prof.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));

  // one extra point ~10 km away at local hour 3 (utc hour 2)
  MobilityTrace t2 = trace;
  t2.points.push_back({30 * kDay + 2 * 3600, 48.5 + 10.0 / 111.32, 2.5});
  const auto prof2 = homeloc::hourly_distance_profile({t2}, homes);
  CHECK(prof2.values[3] == doctest::Approx(10.0).epsilon(2e-3));
  CHECK(prof2.counts[3] == 1);

  // synthetic commuters: working hours sit farther from home than night hours
  Rng rng(47);
  std::vector<MobilityTrace> traces;
  std::map<std::string, homeloc::HomeInference> all_homes;
  for (int i = 0; i < 60; ++i) {
    PlantedUser u = plant_user(rng, static_cast<std::size_t>(i));
    all_homes[u.trace.user_id] = homeloc::infer_home(u.trace);
    traces.push_back(u.trace);
  }
  const auto commuters = homeloc::hourly_distance_profile(traces, all_homes);
  double work = 0, night = 0;
  int wc = 0, nc = 0;
  for (int h = 9; h <= 18; ++h) {
    work += commuters.values[static_cast<std::size_t>(h)];
    ++wc;
  }
  for (int h = 0; h <= 6; ++h) {
    night += commuters.values[static_cast<std::size_t>(h)];
    ++nc;
  }
  CHECK(work / wc > night / nc);
}

TEST_CASE("expression rate profile") {
  // tweets mentioning a pattern peak at the planted hour
  std::map<std::string, corpus::UserTimeline> timelines;
  corpus::UserTimeline tl;
  tl.user_id = "u";
  Rng rng(48);
  for (int i = 0; i < 400; ++i) {
    corpus::GeoTweet t;
    t.user_id = "u";
    const bool home_tweet = rng.uniform() < 0.5;
    const int local_hour = home_tweet ? 22 : static_cast<int>(rng.uniform_int(std::uint64_t{24}));
    t.timestamp = kDay + (local_hour - 1 + 24) % 24 * 3600 + 60 * i;
    t.text = home_tweet ? "je vais dormir maintenant" : "bonjour le monde";
    tl.tweets.push_back(t);
  }
  timelines["u"] = tl;
  const auto prof = homeloc::expression_rate_profile(timelines, {"dormir"});
  CHECK_FALSE(prof.no_matches);
  double sum = 0.0;
  std::size_t argmax = 0;
  for (std::size_t h = 0; h < 24; ++h) {
    sum += prof.values[h];
    if (prof.values[h] > prof.values[argmax]) argmax = h;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(argmax == 22);

  // no matches -> flagged zero profile
  const auto empty = homeloc::expression_rate_profile(timelines, {"zzzznothing"});
  CHECK(empty.no_matches);
  for (const double v : empty.values) CHECK(v == 0.0);

  // uniform matches -> flat 1/24
  std::map<std::string, corpus::UserTimeline> uniform;
  corpus::UserTimeline ut;
  ut.user_id = "u";
  for (int h = 0; h < 24; ++h) {
    corpus::GeoTweet t;
    t.user_id = "u";
    t.timestamp = kDay + h * 3600;
    t.text = "dormir";
    ut.tweets.push_back(t);
  }
  uniform["u"] = ut;
  const auto flat = homeloc::expression_rate_profile(uniform, {"dormir"});
  for (const double v : flat.values) CHECK(v == doctest::Approx(1.0 / 24).epsilon(1e-12));

  CHECK_THROWS_AS((void)homeloc::expression_rate_profile(timelines, {}), std::invalid_argument);
}

}  // TEST_SUITE
