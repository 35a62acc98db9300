#pragma once

// Multi-attraction visitor redistribution. An island-wide demand total is
// shared among sites by attractiveness; each site then updates its own
// environment and resident satisfaction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tourism/error.hpp"

namespace tourism::flow {

struct SiteState {
  std::string name;
  double environment = 0.0;   // E_i
  double satisfaction = 0.0;  // S_i
  double visitors = 0.0;      // V_i
  double capacity = 0.0;      // C_i
  double population = 0.0;    // Pop_i
};

/// Per-site levers for one year.
struct SiteControls {
  double marketing = 0.0;  // normalized units
  double price = 0.0;      // normalized level
  double env_fund = 0.0;   // USD
  double community_fund = 0.0;  // USD
};

struct IslandParams {
  double phi = 0.0;
  double dev_boost = 0.0;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double alpha4 = 0.0;
  double env_effectiveness = 0.0;  // alpha_g, per USD
  double beta_crowd = 0.0;
  double beta_co2 = 0.0;
  double recovery = 0.0;  // delta
  double rho_comm = 0.0;
  double rho_over = 0.0;
  double rho_e = 0.0;
  double co2_per_visitor = 0.0;  // tons per visitor

  void validate() const {
    for (double v : {alpha4, beta_crowd, beta_co2, rho_comm, rho_over, rho_e,
                     recovery, env_effectiveness, co2_per_visitor, dev_boost}) {
      if (!(v >= 0.0)) {
        throw ConfigError("island coefficients must be non-negative");
      }
    }
    for (double a : {alpha0, alpha1, alpha2, alpha3, alpha4, phi}) {
      if (!std::isfinite(a) || std::abs(a) > 50.0) {
        throw ConfigError("attractiveness coefficients must lie in [-50, 50]");
      }
    }
  }
};

inline void validate_site(const SiteState& s) {
  if (!(s.environment >= 0.0 && s.environment <= 1.0) ||
      !(s.satisfaction >= 0.0 && s.satisfaction <= 1.0)) {
    throw DomainError("site '" + s.name + "': indices must lie in [0, 1]");
  }
  if (!(s.capacity > 0.0)) {
    throw DomainError("site '" + s.name + "': capacity must be positive");
  }
  if (!(s.population > 0.0)) {
    throw DomainError("site '" + s.name + "': population must be positive");
  }
  if (!(s.visitors >= 0.0 && s.visitors <= s.capacity)) {
    throw DomainError("site '" + s.name + "': visitors must lie in [0, C]");
  }
}

inline double total_potential(double total, double price_avg, double env_avg,
                              const IslandParams& p) {
  if (total < 0.0) throw DomainError("total_potential: negative visitors");
  const double next =
      total * (1.0 + p.phi * (price_avg + env_avg - 1.5)) + p.dev_boost;
  return std::max(0.0, next);
}

inline double attractiveness(const SiteState& s, const SiteControls& u,
                             const IslandParams& p) {
  if (u.marketing < 0.0) throw DomainError("attractiveness: negative marketing");
  const double a =
      std::exp(p.alpha0 + p.alpha1 * s.environment + p.alpha2 * s.satisfaction +
               p.alpha3 * std::log1p(u.marketing) - p.alpha4 * u.price);
  if (!std::isfinite(a) || !(a > 0.0)) {
    throw NumericError("attractiveness of '" + s.name + "' is not finite");
  }
  return a;
}

inline std::vector<double> allocation_weights(std::span<const double> a) {
  if (a.empty()) throw DomainError("allocation_weights: no sites");
  double sum = 0.0;
  for (double v : a) {
    if (!(v > 0.0)) throw DomainError("allocation_weights: non-positive entry");
    sum += v;
  }
  std::vector<double> w(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) w[i] = a[i] / sum;
  return w;
}

/// p_i T, capped at capacity; the excess is lost.
inline std::vector<double> assign_visitors(double total,
                                           std::span<const double> weights,
                                           std::span<const double> capacities) {
  if (weights.size() != capacities.size()) {
    throw DomainError("assign_visitors: size mismatch");
  }
  std::vector<double> v(weights.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::min(weights[i] * total, capacities[i]);
  }
  return v;
}

inline double site_environment_update(const SiteState& s, const SiteControls& u,
                                      const IslandParams& p) {
  if (!(s.capacity > 0.0)) {
    throw DomainError("site '" + s.name + "': capacity must be positive");
  }
  const double co2 = p.co2_per_visitor * s.visitors;
  const double next = s.environment + p.env_effectiveness * u.env_fund -
                      p.beta_crowd * s.visitors / s.capacity -
                      p.beta_co2 * co2 + p.recovery * (1.0 - s.environment);
  return std::clamp(next, 0.0, 1.0);
}

inline double site_social_update(const SiteState& s, const SiteControls& u,
                                 double environment_next,
                                 const IslandParams& p) {
  if (!(s.population > 0.0)) {
    throw DomainError("site '" + s.name + "': population must be positive");
  }
  const double next = s.satisfaction + p.rho_comm * u.community_fund -
                      p.rho_over * s.visitors / s.population +
                      p.rho_e * (environment_next - s.satisfaction);
  return std::clamp(next, 0.0, 1.0);
}

/// `controls[k][i]` drives site i during step k; step k produces `years[k]`.
struct Schedule {
  std::vector<int> years;
  std::vector<std::vector<SiteControls>> controls;
};

struct FlowYear {
  int year = 0;
  double total = 0.0;            // T for this year
  std::vector<double> weights;   // p_i used for this year's allocation
  std::vector<double> visitors;  // V_i
  std::vector<double> environment;
  std::vector<double> satisfaction;
  std::vector<double> shares;    // V_i / T (0 when T = 0)
};

struct FlowResult {
  std::vector<std::string> sites;
  std::vector<FlowYear> years;
  std::vector<double> final_distribution;  // V_i / sum V in the last year
};

/// Yearly loop: island total, attractiveness, weights, visitors, then each
/// site's environment (driven by last year's visitors) and satisfaction
/// (which sees the new environment). The starting total is the sum of the
/// initial site visitors.
inline FlowResult redistribute(std::vector<SiteState> sites,
                               const IslandParams& p, const Schedule& sched) {
  p.validate();
  if (sites.empty()) throw DomainError("redistribute: no sites");
  for (const auto& s : sites) validate_site(s);
  if (sched.years.size() != sched.controls.size()) {
    throw ConfigError("schedule years and controls differ in length");
  }
  for (const auto& row : sched.controls) {
    if (row.size() != sites.size()) {
      throw ConfigError("schedule does not cover every site in every year");
    }
  }

  const std::size_t n = sites.size();
  FlowResult out;
  for (const auto& s : sites) out.sites.push_back(s.name);

  double total = 0.0;
  for (const auto& s : sites) total += s.visitors;

  std::vector<double> a(n), caps(n);
  for (std::size_t k = 0; k < sched.years.size(); ++k) {
    const auto& u = sched.controls[k];
    double price_avg = 0.0, env_avg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      price_avg += u[i].price;
      env_avg += sites[i].environment;
    }
    price_avg /= static_cast<double>(n);
    env_avg /= static_cast<double>(n);
    total = total_potential(total, price_avg, env_avg, p);

    for (std::size_t i = 0; i < n; ++i) {
      a[i] = attractiveness(sites[i], u[i], p);
      caps[i] = sites[i].capacity;
    }
    FlowYear y;
    y.year = sched.years[k];
    y.total = total;
    y.weights = allocation_weights(a);
    y.visitors = assign_visitors(total, y.weights, caps);

    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sites[i];
      const double e_next = site_environment_update(s, u[i], p);
      const double s_next = site_social_update(s, u[i], e_next, p);
      s.environment = e_next;
      s.satisfaction = s_next;
      s.visitors = y.visitors[i];
      y.environment.push_back(e_next);
      y.satisfaction.push_back(s_next);
      y.shares.push_back(total > 0.0 ? y.visitors[i] / total : 0.0);
    }
    out.years.push_back(std::move(y));
  }

  if (!out.years.empty()) {
    const auto& last = out.years.back().visitors;
    const double sum = std::accumulate(last.begin(), last.end(), 0.0);
    for (double v : last) out.final_distribution.push_back(sum > 0.0 ? v / sum : 0.0);
  }
  return out;
}

struct FlowPreset {
  std::vector<SiteState> sites;
  IslandParams params;
  Schedule schedule;
};

/// Seven Icelandic attractions, three crowded hotspots and four
/// underused sites, over 2024-2033. Marketing moves linearly from the
/// hotspots to the quieter sites across the horizon.
inline FlowPreset iceland_flow_preset() {
  FlowPreset fp;
  fp.sites = {
      {"Blue Lagoon", 0.62, 0.45, 7.0e5, 8.0e5, 2.0e4},
      {"Vatnajökull", 0.66, 0.50, 6.0e5, 7.0e5, 1.5e4},
      {"Golden Circle", 0.60, 0.42, 9.0e5, 1.0e6, 2.5e4},
      {"Snæfellsnes", 0.80, 0.65, 2.0e5, 5.0e5, 8.0e3},
      {"Mývatn", 0.78, 0.62, 1.5e5, 4.0e5, 6.0e3},
      {"Látrabjarg", 0.85, 0.70, 5.0e4, 2.5e5, 3.0e3},
      {"Hengifoss", 0.84, 0.70, 4.0e4, 2.0e5, 3.0e3},
  };

  auto& p = fp.params;
  p.phi = 0.2;
  p.dev_boost = 5.0e4;
  p.alpha0 = 0.0;
  p.alpha1 = 1.0;
  p.alpha2 = 0.5;
  p.alpha3 = 0.6;
  p.alpha4 = 0.5;
  p.env_effectiveness = 4.0e-8;
  p.beta_crowd = 0.05;
  p.beta_co2 = 1.0e-7;
  p.recovery = 0.1;
  p.rho_comm = 4.0e-8;
  p.rho_over = 2.0e-4;
  p.rho_e = 0.1;
  p.co2_per_visitor = 0.1;

  const std::vector<bool> hotspot = {true, true, true, false, false, false, false};
  constexpr int kYears = 10;
  for (int k = 0; k < kYears; ++k) {
    const double f = static_cast<double>(k) / (kYears - 1);
    fp.schedule.years.push_back(2024 + k);
    std::vector<SiteControls> row;
    for (bool hot : hotspot) {
      SiteControls c;
      c.marketing = hot ? 50.0 - 40.0 * f : 5.0 + 35.0 * f;
      c.price = hot ? 1.0 : 0.6;
      c.env_fund = hot ? 1.0e6 : 5.0e5;
      c.community_fund = hot ? 5.0e5 : 2.5e5;
      row.push_back(c);
    }
    fp.schedule.controls.push_back(std::move(row));
  }
  return fp;
}

}  // namespace tourism::flow
