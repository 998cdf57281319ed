#include "ses/census.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "ses/util/text.hpp"

namespace ses::census {

namespace {

bool on_segment(LatLon p, LatLon a, LatLon b) {
  const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  if (cross != 0.0) return false;
  return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
         p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

// Proper intersection test used by the ring validity check.
bool segments_cross(LatLon a, LatLon b, LatLon c, LatLon d) {
  const auto orient = [](LatLon p, LatLon q, LatLon r) {
    const double v = (q.lon - p.lon) * (r.lat - p.lat) - (q.lat - p.lat) * (r.lon - p.lon);
    return (v > 0) - (v < 0);
  };
  const int o1 = orient(a, b, c);
  const int o2 = orient(a, b, d);
  const int o3 = orient(c, d, a);
  const int o4 = orient(c, d, b);
  return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

bool ring_self_intersects(const std::vector<LatLon>& ring) {
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const LatLon a = ring[i];
    const LatLon b = ring[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closure edge
      const LatLon c = ring[j];
      const LatLon d = ring[(j + 1) % n];
      if (segments_cross(a, b, c, d)) return true;
    }
  }
  return false;
}

}  // namespace

bool cell_contains(const CensusCell& cell, LatLon p) {
  bool inside = false;
  for (const auto& ring : cell.rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const LatLon a = ring[i];
      const LatLon b = ring[(i + 1) % n];
      if (on_segment(p, a, b)) return true;  // boundary counts as inside
      // even-odd ray cast, ray towards +lon
      if ((a.lat > p.lat) != (b.lat > p.lat)) {
        const double x = a.lon + (p.lat - a.lat) / (b.lat - a.lat) * (b.lon - a.lon);
        if (x > p.lon) inside = !inside;
      }
    }
  }
  return inside;
}

CensusIndex::CensusIndex(std::vector<CensusCell> cells) : cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end(),
            [](const CensusCell& a, const CensusCell& b) { return a.cell_id < b.cell_id; });
  if (cells_.empty()) return;
  min_lat_ = 1e9;
  max_lat_ = -1e9;
  min_lon_ = 1e9;
  max_lon_ = -1e9;
  for (const auto& c : cells_) {
    for (const auto& ring : c.rings) {
      for (const auto& p : ring) {
        min_lat_ = std::min(min_lat_, p.lat);
        max_lat_ = std::max(max_lat_, p.lat);
        min_lon_ = std::min(min_lon_, p.lon);
        max_lon_ = std::max(max_lon_, p.lon);
      }
    }
  }
  grid_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(cells_.size()))));
  bins_.assign(grid_ * grid_, {});
  for (std::uint32_t ci = 0; ci < cells_.size(); ++ci) {
    double lo_lat = 1e9, hi_lat = -1e9, lo_lon = 1e9, hi_lon = -1e9;
    for (const auto& ring : cells_[ci].rings) {
      for (const auto& p : ring) {
        lo_lat = std::min(lo_lat, p.lat);
        hi_lat = std::max(hi_lat, p.lat);
        lo_lon = std::min(lo_lon, p.lon);
        hi_lon = std::max(hi_lon, p.lon);
      }
    }
    const std::size_t b0 = bin_of(lo_lat, lo_lon);
    const std::size_t b1 = bin_of(hi_lat, hi_lon);
    const std::size_t r0 = b0 / grid_, c0 = b0 % grid_;
    const std::size_t r1 = b1 / grid_, c1 = b1 % grid_;
    for (std::size_t r = r0; r <= r1; ++r)
      for (std::size_t c = c0; c <= c1; ++c) bins_[r * grid_ + c].push_back(ci);
  }
}

std::size_t CensusIndex::bin_of(double lat, double lon) const {
  const double span_lat = std::max(max_lat_ - min_lat_, 1e-12);
  const double span_lon = std::max(max_lon_ - min_lon_, 1e-12);
  auto clampi = [&](double v) {
    const auto i = static_cast<long long>(v);
    return static_cast<std::size_t>(std::clamp<long long>(i, 0, static_cast<long long>(grid_) - 1));
  };
  const std::size_t r = clampi((lat - min_lat_) / span_lat * static_cast<double>(grid_));
  const std::size_t c = clampi((lon - min_lon_) / span_lon * static_cast<double>(grid_));
  return r * grid_ + c;
}

std::optional<std::string> CensusIndex::locate(LatLon p) const {
  if (cells_.empty()) return std::nullopt;
  if (p.lat < min_lat_ || p.lat > max_lat_ || p.lon < min_lon_ || p.lon > max_lon_) return std::nullopt;
  // candidates are in ascending cell_id order because cells_ is sorted and
  // bins were filled in that order; the first hit is the deterministic winner
  for (const std::uint32_t ci : bins_[bin_of(p.lat, p.lon)]) {
    if (cell_contains(cells_[ci], p)) return cells_[ci].cell_id;
  }
  return std::nullopt;
}

const CensusCell* CensusIndex::cell(const std::string& cell_id) const {
  const auto it = std::lower_bound(
      cells_.begin(), cells_.end(), cell_id,
      [](const CensusCell& c, const std::string& id) { return c.cell_id < id; });
  if (it == cells_.end() || it->cell_id != cell_id) return nullptr;
  return &*it;
}

CensusIndex load_cells(const std::string& path, LoadReport& report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cells file: " + path);
  std::vector<CensusCell> cells;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto parts = split(t, '|');
    auto reject = [&](const std::string& why) {
      ++report.skipped;
      report.warnings.push_back("line " + std::to_string(lineno) + ": " + why);
    };
    if (parts.size() != 3) {
      reject("expected cell_id|rings|deciles");
      continue;
    }
    CensusCell cell;
    cell.cell_id = trim(parts[0]);
    if (cell.cell_id.empty()) {
      reject("empty cell_id");
      continue;
    }
    bool ok = true;
    for (const auto& ring_str : split(parts[1], ';')) {
      const auto nums = split_ws(ring_str);
      if (nums.size() < 6 || nums.size() % 2 != 0) {
        reject("ring needs >= 3 lat lon pairs");
        ok = false;
        break;
      }
      std::vector<LatLon> ring;
      for (std::size_t i = 0; i + 1 < nums.size(); i += 2) {
        double lat = 0, lon = 0;
        if (!parse_double(nums[i], lat) || !parse_double(nums[i + 1], lon) || lat < -90 ||
            lat > 90 || lon < -180 || lon > 180) {
          reject("bad coordinate in ring");
          ok = false;
          break;
        }
        ring.push_back({lat, lon});
      }
      if (!ok) break;
      if (ring_self_intersects(ring)) {
        reject("self-intersecting ring");
        ok = false;
        break;
      }
      cell.rings.push_back(std::move(ring));
    }
    if (!ok) continue;
    const auto dec = split_ws(parts[2]);
    if (dec.size() != 9) {
      reject("expected 9 deciles");
      continue;
    }
    double prev = 0.0;
    for (std::size_t i = 0; i < 9; ++i) {
      double v = 0;
      if (!parse_double(dec[i], v) || v <= 0.0 || v < prev) {
        reject("deciles must be positive and non-decreasing");
        ok = false;
        break;
      }
      cell.deciles[i] = v;
      prev = v;
    }
    if (!ok) continue;
    cells.push_back(std::move(cell));
    ++report.loaded;
  }
  return CensusIndex(std::move(cells));
}

std::optional<IncomeAssignment> assign_income(const std::string& user_id, LatLon home,
                                              const CensusIndex& index) {
  const auto cell_id = index.locate(home);
  if (!cell_id) return std::nullopt;
  const CensusCell* cell = index.cell(*cell_id);
  IncomeAssignment a;
  a.user_id = user_id;
  a.cell_id = *cell_id;
  a.median_income = cell->median_income();
  a.ninth_decile = cell->ninth_decile();
  return a;
}

std::vector<std::pair<double, double>> lorenz_curve(std::vector<double> incomes) {
  if (incomes.empty()) throw std::invalid_argument("lorenz_curve: empty input");
  for (const double v : incomes)
    if (!(v > 0.0)) throw std::invalid_argument("lorenz_curve: incomes must be positive");
  std::sort(incomes.begin(), incomes.end());
  const double total = std::accumulate(incomes.begin(), incomes.end(), 0.0);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(incomes.size());
  double cum = 0.0;
  const double n = static_cast<double>(incomes.size());
  for (std::size_t i = 0; i < incomes.size(); ++i) {
    cum += incomes[i];
    pts.emplace_back(static_cast<double>(i + 1) / n, cum / total);
  }
  return pts;
}

double gini(const std::vector<double>& incomes) {
  const auto pts = lorenz_curve(incomes);
  double area = 0.0;
  double prev_f = 0.0;
  double prev_c = 0.0;
  for (const auto& [f, c] : pts) {
    area += (f - prev_f) * (c + prev_c) / 2.0;
    prev_f = f;
    prev_c = c;
  }
  return 1.0 - 2.0 * area;
}

BinaryLabels label_binary(const std::map<std::string, double>& incomes) {
  if (incomes.empty()) throw std::invalid_argument("label_binary: empty input");
  double sum = 0.0;
  for (const auto& [_, v] : incomes) sum += v;
  BinaryLabels out;
  out.mean_income = sum / static_cast<double>(incomes.size());
  std::size_t high = 0;
  for (const auto& [user, v] : incomes) {
    const bool is_high = v > out.mean_income;
    out.labels[user] = is_high ? SesClass::high : SesClass::low;
    if (is_high) ++high;
  }
  out.high_fraction = static_cast<double>(high) / static_cast<double>(incomes.size());
  out.low_fraction = 1.0 - out.high_fraction;
  return out;
}

}  // namespace ses::census
