#pragma once

// Global sensitivity analysis: Morris elementary-effects screening and
// variance-based Sobol indices from a Saltelli design.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/random/sobol.hpp>

#include "tourism/dataio.hpp"
#include "tourism/error.hpp"
#include "tourism/io_util.hpp"
#include "tourism/rng.hpp"
#include "tourism/sd_core.hpp"

namespace tourism::gsa {

using sd::Bounds;

struct Parameter {
  std::string name;
  Bounds bounds;
};

struct ParameterSpace {
  std::vector<Parameter> parameters;

  std::size_t size() const { return parameters.size(); }

  void validate() const {
    if (parameters.empty()) throw ConfigError("empty parameter space");
    for (std::size_t i = 0; i < parameters.size(); ++i) {
      const auto& p = parameters[i];
      if (!(p.bounds.lo < p.bounds.hi)) {
        throw ConfigError("parameter '" + p.name + "' needs low < high");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (parameters[j].name == p.name) {
          throw ConfigError("duplicate parameter '" + p.name + "'");
        }
      }
    }
  }

  /// Unit-cube point to parameter values.
  std::vector<double> map(std::span<const double> unit) const {
    std::vector<double> x(unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) {
      const auto& b = parameters[i].bounds;
      x[i] = b.lo + unit[i] * (b.hi - b.lo);
    }
    return x;
  }
};

using Model = std::function<double(std::span<const double>)>;

// ---------------------------------------------------------------------------
// Morris

struct MorrisTrajectory {
  std::vector<std::vector<double>> unit;    // k + 1 points in [0, 1]^k
  std::vector<std::vector<double>> points;  // the same points mapped to bounds
  std::vector<std::size_t> order;           // parameter moved at step j
  std::vector<double> step;                 // signed unit step at step j
};

struct MorrisDesign {
  std::size_t levels = 4;
  double delta = 0.0;
  std::vector<MorrisTrajectory> trajectories;
};

inline double morris_delta(std::size_t levels) {
  return static_cast<double>(levels) / (2.0 * static_cast<double>(levels - 1));
}

/// Randomized one-at-a-time trajectories on a `levels`-point grid. Each
/// coordinate starts on a grid level and moves once by ±delta, in a random
/// parameter order; the direction is flipped when +delta would leave [0, 1].
inline MorrisDesign morris_sample(const ParameterSpace& space, std::size_t r,
                                  std::size_t levels, std::uint64_t seed) {
  space.validate();
  if (levels < 4 || levels % 2 != 0) {
    throw ConfigError("Morris levels must be even and >= 4");
  }
  if (r < 1) throw ConfigError("Morris needs at least one trajectory");
  const std::size_t k = space.size();
  const double grid = 1.0 / static_cast<double>(levels - 1);
  MorrisDesign d;
  d.levels = levels;
  d.delta = morris_delta(levels);
  Rng rng(seed);
  for (std::size_t t = 0; t < r; ++t) {
    MorrisTrajectory tr;
    std::vector<double> x(k);
    std::vector<double> dir(k);
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = static_cast<double>(rng.below(levels)) * grid;
      dir[i] = rng.coin(0.5) ? 1.0 : -1.0;
      if (x[i] + dir[i] * d.delta > 1.0 + 1e-12) dir[i] = -1.0;
      if (x[i] + dir[i] * d.delta < -1e-12) dir[i] = 1.0;
    }
    tr.order.resize(k);
    std::iota(tr.order.begin(), tr.order.end(), std::size_t{0});
    shuffle(tr.order, rng);
    tr.unit.push_back(x);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = tr.order[j];
      x[i] += dir[i] * d.delta;
      tr.step.push_back(dir[i] * d.delta);
      tr.unit.push_back(x);
    }
    for (const auto& u : tr.unit) tr.points.push_back(space.map(u));
    d.trajectories.push_back(std::move(tr));
  }
  return d;
}

struct MorrisEntry {
  std::string name;
  double mu_star = 0.0;  // mean |elementary effect|
  double mu = 0.0;       // mean signed elementary effect
  double sigma = 0.0;    // sample standard deviation of the effects
};

struct MorrisResult {
  std::vector<MorrisEntry> entries;
  std::size_t trajectories = 0;
};

/// `outputs[t][j]` is the model value at point j of trajectory t.
/// Elementary effects are per unit-space step.
inline MorrisResult morris_indices(const ParameterSpace& space,
                                   const MorrisDesign& design,
                                   const std::vector<std::vector<double>>& outputs) {
  const std::size_t k = space.size();
  if (design.trajectories.empty() || outputs.size() != design.trajectories.size()) {
    throw NumericError("Morris analysis needs one output row per trajectory");
  }
  std::vector<std::vector<double>> effects(k);
  for (std::size_t t = 0; t < design.trajectories.size(); ++t) {
    const auto& tr = design.trajectories[t];
    if (outputs[t].size() != k + 1) {
      throw NumericError("Morris trajectory output has the wrong length");
    }
    for (std::size_t j = 0; j < k; ++j) {
      effects[tr.order[j]].push_back((outputs[t][j + 1] - outputs[t][j]) /
                                     tr.step[j]);
    }
  }
  MorrisResult res;
  res.trajectories = design.trajectories.size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& ee = effects[i];
    if (ee.empty()) {
      throw NumericError("no elementary effects for '" +
                         space.parameters[i].name + "'");
    }
    const double n = static_cast<double>(ee.size());
    MorrisEntry e;
    e.name = space.parameters[i].name;
    for (double v : ee) {
      e.mu += v;
      e.mu_star += std::abs(v);
    }
    e.mu /= n;
    e.mu_star /= n;
    if (ee.size() > 1) {
      double ss = 0.0;
      for (double v : ee) ss += (v - e.mu) * (v - e.mu);
      e.sigma = std::sqrt(ss / (n - 1.0));
    }
    res.entries.push_back(std::move(e));
  }
  return res;
}

inline MorrisResult morris(const ParameterSpace& space, const Model& f,
                           std::size_t r, std::size_t levels,
                           std::uint64_t seed) {
  const auto design = morris_sample(space, r, levels, seed);
  std::vector<std::vector<double>> out;
  for (const auto& tr : design.trajectories) {
    std::vector<double> row;
    for (const auto& p : tr.points) row.push_back(f(p));
    out.push_back(std::move(row));
  }
  return morris_indices(space, design, out);
}

// ---------------------------------------------------------------------------
// Sobol / Saltelli

enum class Sampler { sobol, random };

inline std::string_view sampler_name(Sampler s) {
  return s == Sampler::sobol ? "sobol-shifted" : "pseudo-random";
}

/// Saltelli design of n * (2k + 2) points. Block layout: A, B, then
/// A_B^(i) for every i (A with column i from B), then B_A^(i).
struct SaltelliDesign {
  std::size_t n = 0;
  std::size_t k = 0;
  Sampler sampler = Sampler::sobol;
  std::vector<std::vector<double>> a;  // unit space
  std::vector<std::vector<double>> b;
  std::vector<std::vector<double>> points;  // mapped, all blocks

  std::size_t size() const { return points.size(); }
  std::size_t index_a(std::size_t j) const { return j; }
  std::size_t index_b(std::size_t j) const { return n + j; }
  std::size_t index_ab(std::size_t i, std::size_t j) const {
    return (2 + i) * n + j;
  }
  std::size_t index_ba(std::size_t i, std::size_t j) const {
    return (2 + k + i) * n + j;
  }
};

/// A and B are the two halves of a 2k-dimensional point stream: a Sobol
/// sequence with a seeded random shift modulo 1, or plain pseudo-random draws.
inline SaltelliDesign saltelli_sample(const ParameterSpace& space, std::size_t n,
                                      std::uint64_t seed,
                                      Sampler sampler = Sampler::sobol) {
  space.validate();
  if (n < 2) throw ConfigError("Saltelli base sample size must be >= 2");
  const std::size_t k = space.size();
  SaltelliDesign d;
  d.n = n;
  d.k = k;
  d.sampler = sampler;
  d.a.assign(n, std::vector<double>(k));
  d.b.assign(n, std::vector<double>(k));

  Rng rng(seed);
  if (sampler == Sampler::sobol) {
    std::vector<double> shift(2 * k);
    for (auto& s : shift) s = rng.uniform();
    boost::random::sobol qrng(2 * k);
    qrng.discard(2 * k);  // skip the all-zero first point
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t c = 0; c < 2 * k; ++c) {
        double u = static_cast<double>(qrng() >> 11) * 0x1.0p-53 + shift[c];
        if (u >= 1.0) u -= 1.0;
        (c < k ? d.a[j][c] : d.b[j][c - k]) = u;
      }
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t c = 0; c < k; ++c) d.a[j][c] = rng.uniform();
      for (std::size_t c = 0; c < k; ++c) d.b[j][c] = rng.uniform();
    }
  }

  d.points.reserve(n * (2 * k + 2));
  for (std::size_t j = 0; j < n; ++j) d.points.push_back(space.map(d.a[j]));
  for (std::size_t j = 0; j < n; ++j) d.points.push_back(space.map(d.b[j]));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto u = d.a[j];
      u[i] = d.b[j][i];
      d.points.push_back(space.map(u));
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto u = d.b[j];
      u[i] = d.a[j][i];
      d.points.push_back(space.map(u));
    }
  }
  return d;
}

struct SobolEntry {
  std::string name;
  double first = 0.0;
  double total = 0.0;
  double first_low = 0.0;
  double first_high = 0.0;
  double total_low = 0.0;
  double total_high = 0.0;

  double first_halfwidth() const { return 0.5 * (first_high - first_low); }
  double total_halfwidth() const { return 0.5 * (total_high - total_low); }
};

struct SobolResult {
  std::vector<SobolEntry> entries;
  std::size_t n = 0;
  std::size_t bootstrap = 0;
  Sampler sampler = Sampler::sobol;
};

struct BootstrapConfig {
  std::size_t resamples = 200;
  double confidence = 0.95;
  std::uint64_t seed = 7;
};

namespace detail {

struct PointEstimate {
  std::vector<double> first;
  std::vector<double> total;
};

// First order: mean(f_B (f_ABi - f_A)) / V, and its mirror with A and B
// exchanged, averaged. Total: Jansen, mean((f_A - f_ABi)^2) / 2V, likewise
// averaged with the mirror.
inline PointEstimate estimate(const SaltelliDesign& d,
                              std::span<const double> y,
                              std::span<const std::size_t> rows) {
  const std::size_t n = rows.size();
  const double nn = static_cast<double>(n);
  double mean = 0.0;
  for (std::size_t j : rows) mean += y[d.index_a(j)] + y[d.index_b(j)];
  mean /= 2.0 * nn;
  double var = 0.0;
  for (std::size_t j : rows) {
    const double da = y[d.index_a(j)] - mean;
    const double db = y[d.index_b(j)] - mean;
    var += da * da + db * db;
  }
  var /= 2.0 * nn;
  PointEstimate e;
  e.first.assign(d.k, 0.0);
  e.total.assign(d.k, 0.0);
  if (!(var > 0.0)) return e;
  for (std::size_t i = 0; i < d.k; ++i) {
    double s1 = 0.0;
    double st = 0.0;
    for (std::size_t j : rows) {
      const double fa = y[d.index_a(j)];
      const double fb = y[d.index_b(j)];
      const double fab = y[d.index_ab(i, j)];
      const double fba = y[d.index_ba(i, j)];
      s1 += fb * (fab - fa) + fa * (fba - fb);
      st += (fa - fab) * (fa - fab) + (fb - fba) * (fb - fba);
    }
    e.first[i] = s1 / (2.0 * nn * var);
    e.total[i] = st / (4.0 * nn * var);
  }
  return e;
}

inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

/// First-order and total indices with percentile bootstrap intervals over
/// resampled design rows.
inline SobolResult sobol_indices(const ParameterSpace& space,
                                 const SaltelliDesign& design,
                                 std::span<const double> outputs,
                                 const BootstrapConfig& boot = {}) {
  if (outputs.size() != design.size()) {
    throw NumericError("Sobol analysis needs one output per design point");
  }
  for (double v : outputs) {
    if (!std::isfinite(v)) throw NumericError("non-finite model output");
  }
  std::vector<std::size_t> rows(design.n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  {
    double lo = outputs[0], hi = outputs[0];
    for (double v : outputs) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
      throw NumericError("zero output variance: Sobol indices are undefined");
    }
  }
  const auto point = detail::estimate(design, outputs, rows);

  std::vector<std::vector<double>> first_bs(design.k), total_bs(design.k);
  Rng rng(boot.seed);
  std::vector<std::size_t> resampled(design.n);
  for (std::size_t b = 0; b < boot.resamples; ++b) {
    for (auto& r : resampled) r = rng.below(design.n);
    const auto e = detail::estimate(design, outputs, resampled);
    for (std::size_t i = 0; i < design.k; ++i) {
      first_bs[i].push_back(e.first[i]);
      total_bs[i].push_back(e.total[i]);
    }
  }

  SobolResult res;
  res.n = design.n;
  res.bootstrap = boot.resamples;
  res.sampler = design.sampler;
  const double alpha = 0.5 * (1.0 - boot.confidence);
  for (std::size_t i = 0; i < design.k; ++i) {
    SobolEntry e;
    e.name = space.parameters[i].name;
    e.first = point.first[i];
    e.total = point.total[i];
    if (boot.resamples >= 2) {
      e.first_low = detail::quantile(first_bs[i], alpha);
      e.first_high = detail::quantile(first_bs[i], 1.0 - alpha);
      e.total_low = detail::quantile(total_bs[i], alpha);
      e.total_high = detail::quantile(total_bs[i], 1.0 - alpha);
    } else {
      e.first_low = e.first_high = e.first;
      e.total_low = e.total_high = e.total;
    }
    res.entries.push_back(std::move(e));
  }
  return res;
}

inline SobolResult sobol(const ParameterSpace& space, const Model& f,
                         std::size_t n, std::uint64_t seed,
                         Sampler sampler = Sampler::sobol,
                         BootstrapConfig boot = {}) {
  const auto design = saltelli_sample(space, n, seed, sampler);
  std::vector<double> y;
  y.reserve(design.size());
  for (const auto& p : design.points) y.push_back(f(p));
  return sobol_indices(space, design, y, boot);
}

// ---------------------------------------------------------------------------
// Tourism model wiring

/// Everything a simulation needs besides the parameters under study.
struct ModelSetup {
  sd::ExogenousSeries exog;
  sd::ModelCoefficients coefficients;
  sd::PolicyVector policy;
  sd::SimState init;
};

/// Writes one named value into the policy or the coefficients.
inline void apply_parameter(std::string_view name, double value,
                            sd::PolicyVector& policy,
                            sd::ModelCoefficients& coeffs) {
  if (double* p = sd::find_field(policy, sd::kPolicyFields, name)) {
    *p = value;
    return;
  }
  if (double* c = sd::find_field(coeffs, sd::kCoefficientFields, name)) {
    *c = value;
    return;
  }
  throw ConfigError("unknown model parameter '" + std::string(name) + "'");
}

/// Policy levers in a relative band around the preset's nominal policy
/// (clipped to the preset bounds), plus the demand and environmental
/// coefficients in the same band around their calibrated values.
inline ParameterSpace default_space(const data::RegionPreset& preset,
                                    double band = 0.2) {
  ParameterSpace s;
  auto around = [band](double v) {
    const double a = v * (1.0 - band);
    const double b = v * (1.0 + band);
    return Bounds{std::min(a, b), std::max(a, b)};
  };
  const auto nominal = preset.nominal_policy.to_array();
  for (std::size_t i = 0; i < sd::kPolicySize; ++i) {
    auto b = around(nominal[i]);
    const auto& lim = preset.bounds.bounds[i];
    b = {lim.clamp(b.lo), lim.clamp(b.hi)};
    s.parameters.push_back({std::string(sd::kPolicyNames[i]), b});
  }
  const auto& c = preset.coefficients;
  s.parameters.push_back({"price_elasticity", around(c.price_elasticity)});
  s.parameters.push_back({"glacier_effectiveness", around(c.glacier_effectiveness)});
  s.parameters.push_back({"waste_effectiveness", around(c.waste_effectiveness)});
  s.parameters.push_back({"retreat_impact", around(c.retreat_impact)});
  s.parameters.push_back({"co2_impact", around(c.co2_impact)});
  s.validate();
  return s;
}

enum class Method { morris, sobol };

inline Method parse_method(std::string_view s) {
  if (s == "morris") return Method::morris;
  if (s == "sobol") return Method::sobol;
  throw ConfigError("unknown sensitivity method '" + std::string(s) + "'");
}

inline constexpr std::array<std::string_view, 3> kOutputNames = {"f1", "f2", "f3"};

/// Which objectives to report; the matrix always covers all three.
inline std::vector<std::size_t> parse_outputs(std::string_view s) {
  if (s == "all") return {0, 1, 2};
  for (std::size_t i = 0; i < 3; ++i) {
    if (kOutputNames[i] == s) return {i};
  }
  throw ConfigError("unknown output selector '" + std::string(s) + "'");
}

struct AnalysisConfig {
  std::size_t morris_trajectories = 20;
  std::size_t morris_levels = 4;
  std::size_t sobol_n = 1024;
  Sampler sampler = Sampler::sobol;
  BootstrapConfig bootstrap;
  std::uint64_t seed = 1;
};

struct SensitivityReport {
  Method method = Method::morris;
  std::vector<std::string> parameters;
  std::vector<std::size_t> outputs;  // selected objective indices
  std::array<MorrisResult, 3> morris;
  std::array<SobolResult, 3> sobol;
  // One row per parameter, one column per objective: mu* scaled by the
  // column maximum for Morris, total index for Sobol.
  std::vector<std::array<double, 3>> matrix;
  std::size_t evaluations = 0;

  /// Parameter indices ordered by decreasing importance for objective m.
  std::vector<std::size_t> ranking(std::size_t m) const {
    std::vector<std::size_t> idx(parameters.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (method == Method::morris) {
        return morris[m].entries[a].mu_star > morris[m].entries[b].mu_star;
      }
      return sobol[m].entries[a].total > sobol[m].entries[b].total;
    });
    return idx;
  }
};

namespace detail {

inline sd::Objectives evaluate_point(const ParameterSpace& space,
                                     const ModelSetup& setup,
                                     std::span<const double> x) {
  auto policy = setup.policy;
  auto coeffs = setup.coefficients;
  for (std::size_t i = 0; i < space.size(); ++i) {
    apply_parameter(space.parameters[i].name, x[i], policy, coeffs);
  }
  const auto f = sd::simulate(policy, setup.exog, coeffs, setup.init).objectives;
  for (double v : f) {
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "simulation produced a non-finite objective at";
      for (std::size_t i = 0; i < space.size(); ++i) {
        msg << ' ' << space.parameters[i].name << '='
            << io::format_number(x[i]);
      }
      throw NumericError(msg.str());
    }
  }
  return f;
}

}  // namespace detail

/// Runs Morris or Sobol with the simulation as the model function.
inline SensitivityReport analyze_model(const ParameterSpace& space,
                                       std::string_view selector, Method method,
                                       const ModelSetup& setup,
                                       const AnalysisConfig& cfg) {
  space.validate();
  SensitivityReport rep;
  rep.method = method;
  rep.outputs = parse_outputs(selector);
  for (const auto& p : space.parameters) rep.parameters.push_back(p.name);
  // Fail fast on unknown names before the sampling loop.
  {
    auto policy = setup.policy;
    auto coeffs = setup.coefficients;
    for (const auto& p : space.parameters) {
      apply_parameter(p.name, p.bounds.lo, policy, coeffs);
    }
  }
  const std::size_t k = space.size();
  rep.matrix.assign(k, {0.0, 0.0, 0.0});

  if (method == Method::morris) {
    const auto design = morris_sample(space, cfg.morris_trajectories,
                                      cfg.morris_levels, cfg.seed);
    std::array<std::vector<std::vector<double>>, 3> out;
    for (const auto& tr : design.trajectories) {
      std::array<std::vector<double>, 3> row;
      for (const auto& p : tr.points) {
        const auto f = detail::evaluate_point(space, setup, p);
        for (std::size_t m = 0; m < 3; ++m) row[m].push_back(f[m]);
        ++rep.evaluations;
      }
      for (std::size_t m = 0; m < 3; ++m) out[m].push_back(std::move(row[m]));
    }
    for (std::size_t m = 0; m < 3; ++m) {
      rep.morris[m] = morris_indices(space, design, out[m]);
      double top = 0.0;
      for (const auto& e : rep.morris[m].entries) top = std::max(top, e.mu_star);
      for (std::size_t i = 0; i < k; ++i) {
        rep.matrix[i][m] = top > 0.0 ? rep.morris[m].entries[i].mu_star / top : 0.0;
      }
    }
  } else {
    const auto design = saltelli_sample(space, cfg.sobol_n, cfg.seed, cfg.sampler);
    std::array<std::vector<double>, 3> y;
    for (const auto& p : design.points) {
      const auto f = detail::evaluate_point(space, setup, p);
      for (std::size_t m = 0; m < 3; ++m) y[m].push_back(f[m]);
      ++rep.evaluations;
    }
    for (std::size_t m = 0; m < 3; ++m) {
      bool constant = std::all_of(y[m].begin(), y[m].end(),
                                  [&](double v) { return v == y[m][0]; });
      const bool selected =
          std::find(rep.outputs.begin(), rep.outputs.end(), m) != rep.outputs.end();
      if (constant && !selected) continue;  // matrix column stays zero
      rep.sobol[m] = sobol_indices(space, design, y[m], cfg.bootstrap);
      for (std::size_t i = 0; i < k; ++i) {
        rep.matrix[i][m] = rep.sobol[m].entries[i].total;
      }
    }
  }
  return rep;
}

}  // namespace tourism::gsa
