#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ses/corpus.hpp"

namespace ses::census {

using corpus::LatLon;

struct CensusCell {
  std::string cell_id;
  std::vector<std::vector<LatLon>> rings;  // closed implicitly (last -> first)
  std::array<double, 9> deciles{};         // euros/year, non-decreasing, d5 = median

  double median_income() const { return deciles[4]; }
  double ninth_decile() const { return deciles[8]; }
};

struct LoadReport {
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

// Immutable after load; point lookups back a uniform bounding-box grid and a
// deterministic tie rule (smallest cell_id wins on shared boundaries).
class CensusIndex {
 public:
  CensusIndex() = default;
  explicit CensusIndex(std::vector<CensusCell> cells);

  // cell_id containing the point, or nullopt outside coverage.
  std::optional<std::string> locate(LatLon p) const;
  const CensusCell* cell(const std::string& cell_id) const;

  std::size_t size() const { return cells_.size(); }
  const std::vector<CensusCell>& cells() const { return cells_; }

 private:
  std::vector<CensusCell> cells_;  // sorted by cell_id
  double min_lat_ = 0, max_lat_ = 0, min_lon_ = 0, max_lon_ = 0;
  std::size_t grid_ = 1;
  std::vector<std::vector<std::uint32_t>> bins_;  // cell indices per grid bin

  std::size_t bin_of(double lat, double lon) const;
};

// Point-in-polygon (even-odd ray casting over all rings); points exactly on
// an edge or vertex count as inside.
bool cell_contains(const CensusCell& cell, LatLon p);

CensusIndex load_cells(const std::string& path, LoadReport& report);

struct IncomeAssignment {
  std::string user_id;
  std::string cell_id;
  double median_income = 0.0;  // d5
  double ninth_decile = 0.0;   // d9
};

std::optional<IncomeAssignment> assign_income(const std::string& user_id, LatLon home,
                                              const CensusIndex& index);

// Lorenz curve points (f, C(f)) over the ascending-sorted incomes, one point
// per sample; C(0)=0 is implicit. Throws on empty or non-positive input.
std::vector<std::pair<double, double>> lorenz_curve(std::vector<double> incomes);

// Gini = 1 - 2 * trapezoidal area under the Lorenz curve.
double gini(const std::vector<double>& incomes);

enum class SesClass { low = 0, high = 1 };

struct BinaryLabels {
  std::map<std::string, SesClass> labels;
  double mean_income = 0.0;
  double low_fraction = 0.0;
  double high_fraction = 0.0;
};

// high iff income strictly above the arithmetic mean of the distribution.
BinaryLabels label_binary(const std::map<std::string, double>& incomes);

}  // namespace ses::census
