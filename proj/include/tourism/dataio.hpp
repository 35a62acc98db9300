#pragma once

// Annual dataset ingestion and preprocessing, plus the calibrated region
// presets (Juneau, Iceland) and their synthetic baseline series.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tourism/error.hpp"
#include "tourism/io_util.hpp"
#include "tourism/rng.hpp"
#include "tourism/sd_core.hpp"

namespace tourism::data {

inline constexpr std::size_t kSeriesCount = 8;

/// Canonical column names, in ExogenousSeries field order.
inline constexpr std::array<std::string_view, kSeriesCount> kSeriesNames = {
    "base_visitors", "base_revenue", "base_expenditure", "glacier_retreat",
    "co2",           "population",   "unemployment",     "base_satisfaction"};

inline std::size_t series_index(std::string_view name) {
  for (std::size_t i = 0; i < kSeriesCount; ++i) {
    if (kSeriesNames[i] == name) return i;
  }
  throw ConfigError("unknown series name '" + std::string(name) + "'");
}

inline std::vector<double>& series_column(sd::ExogenousSeries& s,
                                          std::size_t i) {
  switch (i) {
    case 0: return s.base_visitors;
    case 1: return s.base_revenue;
    case 2: return s.base_expenditure;
    case 3: return s.glacier_retreat;
    case 4: return s.co2;
    case 5: return s.population;
    case 6: return s.unemployment;
    default: return s.base_satisfaction;
  }
}

inline const std::vector<double>& series_column(const sd::ExogenousSeries& s,
                                                std::size_t i) {
  return series_column(const_cast<sd::ExogenousSeries&>(s), i);
}

/// Maps canonical names ("year" plus kSeriesNames) to file header names.
/// Unmapped names are looked up verbatim.
using ColumnMap = std::map<std::string, std::string>;

/// Rows keyed by year; a column is absent when the file did not carry it,
/// and a cell is nullopt when blank or unparseable.
struct RawAnnualTable {
  std::vector<int> years;
  std::array<std::optional<std::vector<std::optional<double>>>, kSeriesCount>
      columns;
};

inline RawAnnualTable parse_table(std::istream& in, const ColumnMap& map = {}) {
  auto header_for = [&](const std::string& canonical) {
    auto it = map.find(canonical);
    return it == map.end() ? canonical : it->second;
  };

  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = io::split_csv_line(t);
    break;
  }
  if (header.empty()) throw DataError("table has no header line");

  auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };

  const auto year_col = find_col(header_for("year"));
  if (!year_col) {
    throw DataError("table has no '" + header_for("year") + "' column");
  }
  std::array<std::optional<std::size_t>, kSeriesCount> col_idx;
  for (std::size_t k = 0; k < kSeriesCount; ++k) {
    col_idx[k] = find_col(header_for(std::string(kSeriesNames[k])));
  }

  RawAnnualTable table;
  for (std::size_t k = 0; k < kSeriesCount; ++k) {
    if (col_idx[k]) table.columns[k].emplace();
  }

  while (std::getline(in, line)) {
    ++line_no;
    auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cells = io::split_csv_line(t);
    const auto year_val =
        *year_col < cells.size() ? io::parse_number(cells[*year_col])
                                 : std::nullopt;
    if (!year_val || *year_val != std::floor(*year_val)) {
      throw DataError("line " + std::to_string(line_no) +
                      ": missing or non-integer year");
    }
    const int year = static_cast<int>(*year_val);
    if (std::find(table.years.begin(), table.years.end(), year) !=
        table.years.end()) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate year " +
                      std::to_string(year));
    }
    table.years.push_back(year);
    for (std::size_t k = 0; k < kSeriesCount; ++k) {
      if (!col_idx[k]) continue;
      std::optional<double> v;
      if (*col_idx[k] < cells.size()) v = io::parse_number(cells[*col_idx[k]]);
      table.columns[k]->push_back(v);
    }
  }
  return table;
}

inline RawAnnualTable load_table(const std::string& path,
                                 const ColumnMap& map = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_table(in, map);
}

/// Gives an absent column a constant value in every row.
inline void fill_absent(RawAnnualTable& table, std::string_view name,
                        double value) {
  auto& col = table.columns[series_index(name)];
  if (!col) col.emplace(table.years.size(), value);
}

/// Dense series over the full year span: interior gaps (blank cells or
/// missing year rows) are linearly interpolated, leading and trailing gaps
/// copy the nearest known value.
inline sd::ExogenousSeries interpolate_missing(const RawAnnualTable& table) {
  if (table.years.empty()) throw DataError("table has no rows");
  std::vector<std::size_t> order(table.years.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.years[a] < table.years[b];
  });
  const int first = table.years[order.front()];
  const int last = table.years[order.back()];

  sd::ExogenousSeries out;
  for (int y = first; y <= last; ++y) out.years.push_back(y);
  const std::size_t n = out.years.size();

  for (std::size_t k = 0; k < kSeriesCount; ++k) {
    const auto& col = table.columns[k];
    if (!col) {
      throw DataError("column '" + std::string(kSeriesNames[k]) +
                      "' is absent");
    }
    std::vector<std::optional<double>> dense(n);
    for (std::size_t r = 0; r < table.years.size(); ++r) {
      dense[static_cast<std::size_t>(table.years[r] - first)] = (*col)[r];
    }
    std::vector<std::size_t> known;
    for (std::size_t i = 0; i < n; ++i) {
      if (dense[i]) known.push_back(i);
    }
    if (known.empty()) {
      throw DataError("column '" + std::string(kSeriesNames[k]) +
                      "' has no values");
    }
    auto& dst = series_column(out, k);
    dst.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (dense[i]) {
        dst[i] = *dense[i];
        continue;
      }
      auto hi = std::lower_bound(known.begin(), known.end(), i);
      if (hi == known.begin()) {
        dst[i] = *dense[known.front()];
      } else if (hi == known.end()) {
        dst[i] = *dense[known.back()];
      } else {
        const std::size_t b = *hi;
        const std::size_t a = *(hi - 1);
        const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
        dst[i] = *dense[a] + w * (*dense[b] - *dense[a]);
      }
    }
  }
  return out;
}

/// Dense series back into table form, for round trips and reprocessing.
inline RawAnnualTable to_table(const sd::ExogenousSeries& s) {
  RawAnnualTable t;
  t.years = s.years;
  for (std::size_t k = 0; k < kSeriesCount; ++k) {
    const auto& src = series_column(s, k);
    t.columns[k].emplace(src.begin(), src.end());
  }
  return t;
}

inline void write_series_csv(std::ostream& os, const sd::ExogenousSeries& s,
                             const io::Metadata& meta = {}) {
  io::write_metadata(os, meta);
  os << "year";
  for (auto name : kSeriesNames) os << ',' << name;
  os << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << s.years[i];
    for (std::size_t k = 0; k < kSeriesCount; ++k) {
      os << ',' << io::format_number(series_column(s, k)[i]);
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Plausibility envelopes and presets

/// Per-series plausible range; series without an entry are not checked.
struct SeriesEnvelope {
  std::array<std::optional<sd::Bounds>, kSeriesCount> ranges;
};

/// Flags every value outside its envelope. Never modifies the series.
inline std::vector<std::string> validate_ranges(const sd::ExogenousSeries& s,
                                                const SeriesEnvelope& env) {
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < kSeriesCount; ++k) {
    if (!env.ranges[k]) continue;
    const auto& col = series_column(s, k);
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (!env.ranges[k]->contains(col[i])) {
        std::ostringstream msg;
        msg << kSeriesNames[k] << " in " << s.years[i] << " = "
            << io::format_number(col[i]) << " outside ["
            << io::format_number(env.ranges[k]->lo) << ", "
            << io::format_number(env.ranges[k]->hi) << "]";
        warnings.push_back(msg.str());
      }
    }
  }
  return warnings;
}

/// Linear trend from `start` to `end` over the preset years.
struct TrendSpec {
  double start = 0.0;
  double end = 0.0;
  bool noisy = true;  // false pins every point to the trend
};

struct InitialEnvironment {
  double mean = 0.8;
  double spread = 0.0;  // uniform half-width; 0 means deterministic
};

struct RegionPreset {
  std::string name;
  int first_year = 2008;
  int last_year = 2024;
  sd::PolicyBounds bounds;
  sd::ModelCoefficients coefficients;
  InitialEnvironment initial_environment;
  SeriesEnvelope envelope;
  std::array<TrendSpec, kSeriesCount> trends;
  double noise = 0.02;  // relative half-width of the uniform trend noise
  sd::PolicyVector nominal_policy;
  // Surplus feedback efficiencies, per USD.
  double infra_efficiency = 0.0;
  double marketing_efficiency = 0.0;
  double community_efficiency = 0.0;
  std::vector<std::string> assumptions;
};

inline RegionPreset juneau_preset() {
  RegionPreset p;
  p.name = "juneau";
  p.bounds = sd::PolicyBounds::juneau();
  p.coefficients = {};
  p.initial_environment = {0.8, 0.0};

  auto& r = p.envelope.ranges;
  r[0] = sd::Bounds{5e5, 3.1e6};
  r[1] = sd::Bounds{1e6, 1.03e7};
  r[2] = sd::Bounds{1e6, 1.03e7};
  r[3] = sd::Bounds{220.0, 350.0};
  r[4] = sd::Bounds{77000.0, 104800.0};
  r[5] = sd::Bounds{1e4, 1e5};
  r[6] = sd::Bounds{0.0, 0.2};
  r[7] = sd::Bounds{0.29, 0.48};

  p.trends = {{{1.05e6, 3.1e6},
               {6.2e6, 1.03e7},
               {5.8e6, 9.9e6},
               {225.0, 345.0},
               {77500.0, 104000.0},
               {32000.0, 32000.0, false},
               {0.045, 0.045, false},
               {0.48, 0.29}}};

  p.nominal_policy = {0.1, 0.2, 0.5, 2.0e6, 750.0, 30.0, 0.5};
  p.infra_efficiency = 0.01;
  p.marketing_efficiency = 0.01;
  p.community_efficiency = 3e-9;
  p.assumptions = {"population constant at 32000 residents",
                   "unemployment constant at 4.5%",
                   "1.03e7 USD read as annual baseline government revenue"};
  return p;
}

inline RegionPreset iceland_preset() {
  RegionPreset p;
  p.name = "iceland";
  p.bounds = sd::PolicyBounds::iceland();
  auto& c = p.coefficients;
  c.glacier_sensitivity = 0.25;
  c.gov_base_share = 0.35;
  c.base_price = 40.0;
  c.ship_capacity = 5000.0;
  c.crowding_impact = 4e-3;
  c.co2_impact = 1.2e-7;
  c.glacier_effectiveness = 1e-8;
  c.waste_effectiveness = 6e-9;
  c.glacier_satisfaction = 4e-9;
  c.waste_satisfaction = 6e-9;
  p.initial_environment = {0.65, 0.05};

  auto& r = p.envelope.ranges;
  r[0] = sd::Bounds{3e5, 3.2e6};
  r[1] = sd::Bounds{5e6, 6e7};
  r[2] = sd::Bounds{5e6, 6e7};
  r[3] = sd::Bounds{200.0, 300.0};
  r[4] = sd::Bounds{50000.0, 150000.0};
  r[5] = sd::Bounds{3e5, 4.5e5};
  r[6] = sd::Bounds{0.0, 0.2};
  r[7] = sd::Bounds{0.3, 0.7};

  p.trends = {{{5.0e5, 3.2e6},
               {2.0e7, 4.0e7},
               {2.5e7, 5.0e7},
               {205.0, 295.0},
               {60000.0, 140000.0},
               {370000.0, 370000.0, false},
               {0.04, 0.04, false},
               {0.6, 0.45}}};

  p.nominal_policy = {0.1, 0.2, 0.5, 3.0e6, 700.0, 40.0, 0.5};
  p.infra_efficiency = 0.04;       // 4000 capacity per 1e5 USD
  p.marketing_efficiency = 0.025;  // 2500 visitors per 1e5 USD
  p.community_efficiency = 3e-9;
  p.assumptions = {"population constant at 370000 residents",
                   "unemployment constant at 4%",
                   "efficiency factors 4000 and 2500 read per 1e5 USD"};
  return p;
}

inline RegionPreset preset_by_name(std::string_view name) {
  if (name == "juneau") return juneau_preset();
  if (name == "iceland") return iceland_preset();
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

/// Smooth trend series inside the preset envelope: linear ramps with seeded
/// uniform noise of at most `noise` (relative), clipped to the envelope.
/// First and last points are pinned to the trend endpoints.
inline sd::ExogenousSeries synth_dataset(const RegionPreset& preset,
                                         std::uint64_t seed) {
  if (preset.last_year <= preset.first_year) {
    throw ConfigError("preset year span is empty");
  }
  Rng rng(seed);
  sd::ExogenousSeries s;
  for (int y = preset.first_year; y <= preset.last_year; ++y) {
    s.years.push_back(y);
  }
  const std::size_t n = s.years.size();
  for (std::size_t k = 0; k < kSeriesCount; ++k) {
    const auto& tr = preset.trends[k];
    auto& col = series_column(s, k);
    col.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = static_cast<double>(i) / static_cast<double>(n - 1);
      double v = tr.start + w * (tr.end - tr.start);
      // Draw for every point so the stream layout does not depend on flags.
      const double u = rng.uniform(-1.0, 1.0);
      if (tr.noisy && i != 0 && i + 1 != n) v *= 1.0 + preset.noise * u;
      if (preset.envelope.ranges[k]) v = preset.envelope.ranges[k]->clamp(v);
      col[i] = v;
    }
  }
  return s;
}

/// Initial environment index: fixed for Juneau, mean ± spread for Iceland.
inline double draw_initial_environment(const RegionPreset& preset,
                                       std::uint64_t seed) {
  const auto& ie = preset.initial_environment;
  if (ie.spread == 0.0) return ie.mean;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  return std::clamp(ie.mean + rng.uniform(-ie.spread, ie.spread), 0.0, 1.0);
}

}  // namespace tourism::data
