#pragma once

// Annual system-dynamics model of a tourism destination: visitor demand,
// government finance, environmental quality and resident satisfaction,
// stepped once per year.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tourism/error.hpp"

namespace tourism::sd {

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const { return std::clamp(x, lo, hi); }
  double width() const { return hi - lo; }
};

inline constexpr std::size_t kPolicySize = 7;

inline constexpr std::array<std::string_view, kPolicySize> kPolicyNames = {
    "tax_rate",   "env_ratio",  "dev_incentive", "capacity_limit",
    "ship_limit", "carbon_fee", "glacier_ratio"};

/// The seven policy levers, in genome order.
struct PolicyVector {
  double tax_rate = 0.0;        // fraction of the base ticket price
  double env_ratio = 0.0;       // share of government income spent on environment
  double dev_incentive = 0.0;   // development push, dimensionless in [0, 1]
  double capacity_limit = 0.0;  // visitors per year
  double ship_limit = 0.0;      // vessels (or flights) per year
  double carbon_fee = 0.0;      // USD per visitor
  double glacier_ratio = 0.0;   // share of environment budget spent on the glacier

  std::array<double, kPolicySize> to_array() const {
    return {tax_rate,   env_ratio,  dev_incentive, capacity_limit,
            ship_limit, carbon_fee, glacier_ratio};
  }

  static PolicyVector from_array(std::span<const double> g) {
    if (g.size() != kPolicySize) {
      throw DomainError("policy genome must have 7 entries");
    }
    return {g[0], g[1], g[2], g[3], g[4], g[5], g[6]};
  }

  friend bool operator==(const PolicyVector&, const PolicyVector&) = default;
};

struct PolicyBounds {
  std::array<Bounds, kPolicySize> bounds;

  static PolicyBounds juneau() {
    return {{{{0.0, 0.3},
              {0.0, 0.5},
              {0.0, 1.0},
              {1e6, 4e6},
              {600.0, 800.0},
              {0.0, 100.0},
              {0.0, 1.0}}}};
  }

  static PolicyBounds iceland() {
    auto b = juneau();
    b.bounds[3] = {1e6, 5e6};
    b.bounds[4] = {500.0, 900.0};
    b.bounds[5] = {0.0, 120.0};
    return b;
  }

  bool contains(const PolicyVector& p) const {
    auto g = p.to_array();
    for (std::size_t i = 0; i < kPolicySize; ++i) {
      if (!bounds[i].contains(g[i])) return false;
    }
    return true;
  }

  PolicyVector clamp(const PolicyVector& p) const {
    auto g = p.to_array();
    for (std::size_t i = 0; i < kPolicySize; ++i) g[i] = bounds[i].clamp(g[i]);
    return PolicyVector::from_array(g);
  }
};

/// Behavioural and calibration constants. Defaults are the Juneau
/// calibration; only the attraction weight, the fee normalizer, the
/// government development grant, the tourism-linked expenditure share and
/// the social-resistance pair are fixed by the model definition, the rest
/// are calibration inputs.
struct ModelCoefficients {
  double attraction_weight = 0.5;
  double fee_normalizer = 100.0;
  double price_elasticity = -0.5;
  double glacier_sensitivity = 0.2;
  double retreat_baseline = 250.0;     // ft per year
  double base_price = 150.0;           // USD per visitor
  double ship_capacity = 5000.0;       // visitors per vessel
  double dev_visitors = 5e4;           // visitors per unit of dev_incentive
  double dev_funds = 1e5;              // USD per unit of dev_incentive
  double gov_base_share = 0.3;         // tourism-linked share of base outlays
  double satisfaction_threshold = 0.3;
  double resistance_ratio = 0.8;
  double glacier_effectiveness = 5e-9;  // index per USD
  double waste_effectiveness = 3e-9;    // index per USD
  double retreat_impact = 3e-5;         // index per ft
  double co2_impact = 1.7e-7;           // index per ton
  double recovery_rate = 0.1;
  double glacier_satisfaction = 2e-9;  // satisfaction per USD
  double waste_satisfaction = 3e-9;    // satisfaction per USD
  double crowding_impact = 3e-4;       // per visitor-per-resident
  double environment_feedback = 0.1;
  double unemployment_impact = 0.2;
  double crowd_epsilon = 1.0;  // persons, keeps the crowding ratio finite

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0)) {
        throw DomainError(std::string("coefficient ") + name +
                          " must be non-negative");
      }
    };
    nonneg(attraction_weight, "attraction_weight");
    nonneg(glacier_sensitivity, "glacier_sensitivity");
    nonneg(base_price, "base_price");
    nonneg(ship_capacity, "ship_capacity");
    nonneg(dev_visitors, "dev_visitors");
    nonneg(dev_funds, "dev_funds");
    nonneg(gov_base_share, "gov_base_share");
    nonneg(satisfaction_threshold, "satisfaction_threshold");
    nonneg(resistance_ratio, "resistance_ratio");
    nonneg(glacier_effectiveness, "glacier_effectiveness");
    nonneg(waste_effectiveness, "waste_effectiveness");
    nonneg(retreat_impact, "retreat_impact");
    nonneg(co2_impact, "co2_impact");
    nonneg(glacier_satisfaction, "glacier_satisfaction");
    nonneg(waste_satisfaction, "waste_satisfaction");
    nonneg(crowding_impact, "crowding_impact");
    nonneg(environment_feedback, "environment_feedback");
    nonneg(unemployment_impact, "unemployment_impact");
    if (!(fee_normalizer > 0.0)) throw DomainError("fee_normalizer must be > 0");
    if (!(retreat_baseline > 0.0)) {
      throw DomainError("retreat_baseline must be > 0");
    }
    if (!(recovery_rate >= 0.0 && recovery_rate <= 1.0)) {
      throw DomainError("recovery_rate must lie in [0, 1]");
    }
    if (!(crowd_epsilon > 0.0)) throw DomainError("crowd_epsilon must be > 0");
    if (!std::isfinite(price_elasticity)) {
      throw DomainError("price_elasticity must be finite");
    }
  }
};

template <typename T>
struct NamedField {
  std::string_view name;
  double T::*member;
};

inline constexpr std::array<NamedField<PolicyVector>, kPolicySize>
    kPolicyFields = {{{"tax_rate", &PolicyVector::tax_rate},
                      {"env_ratio", &PolicyVector::env_ratio},
                      {"dev_incentive", &PolicyVector::dev_incentive},
                      {"capacity_limit", &PolicyVector::capacity_limit},
                      {"ship_limit", &PolicyVector::ship_limit},
                      {"carbon_fee", &PolicyVector::carbon_fee},
                      {"glacier_ratio", &PolicyVector::glacier_ratio}}};

inline constexpr std::array<NamedField<ModelCoefficients>, 23>
    kCoefficientFields = {{
        {"attraction_weight", &ModelCoefficients::attraction_weight},
        {"fee_normalizer", &ModelCoefficients::fee_normalizer},
        {"price_elasticity", &ModelCoefficients::price_elasticity},
        {"glacier_sensitivity", &ModelCoefficients::glacier_sensitivity},
        {"retreat_baseline", &ModelCoefficients::retreat_baseline},
        {"base_price", &ModelCoefficients::base_price},
        {"ship_capacity", &ModelCoefficients::ship_capacity},
        {"dev_visitors", &ModelCoefficients::dev_visitors},
        {"dev_funds", &ModelCoefficients::dev_funds},
        {"gov_base_share", &ModelCoefficients::gov_base_share},
        {"satisfaction_threshold", &ModelCoefficients::satisfaction_threshold},
        {"resistance_ratio", &ModelCoefficients::resistance_ratio},
        {"glacier_effectiveness", &ModelCoefficients::glacier_effectiveness},
        {"waste_effectiveness", &ModelCoefficients::waste_effectiveness},
        {"retreat_impact", &ModelCoefficients::retreat_impact},
        {"co2_impact", &ModelCoefficients::co2_impact},
        {"recovery_rate", &ModelCoefficients::recovery_rate},
        {"glacier_satisfaction", &ModelCoefficients::glacier_satisfaction},
        {"waste_satisfaction", &ModelCoefficients::waste_satisfaction},
        {"crowding_impact", &ModelCoefficients::crowding_impact},
        {"environment_feedback", &ModelCoefficients::environment_feedback},
        {"unemployment_impact", &ModelCoefficients::unemployment_impact},
        {"crowd_epsilon", &ModelCoefficients::crowd_epsilon},
    }};

template <typename T, std::size_t N>
double* find_field(T& obj, const std::array<NamedField<T>, N>& table,
                   std::string_view name) {
  for (const auto& f : table) {
    if (f.name == name) return &(obj.*(f.member));
  }
  return nullptr;
}

/// One calendar year of exogenous inputs.
struct YearData {
  int year = 0;
  double base_visitors = 0.0;
  double base_revenue = 0.0;      // USD
  double base_expenditure = 0.0;  // USD
  double glacier_retreat = 0.0;   // ft
  double co2 = 0.0;               // tons
  double population = 0.0;
  double unemployment = 0.0;
  double base_satisfaction = 0.0;
};

/// Column-oriented annual baseline series.
struct ExogenousSeries {
  std::vector<int> years;
  std::vector<double> base_visitors;
  std::vector<double> base_revenue;
  std::vector<double> base_expenditure;
  std::vector<double> glacier_retreat;
  std::vector<double> co2;
  std::vector<double> population;
  std::vector<double> unemployment;
  std::vector<double> base_satisfaction;

  std::size_t size() const { return years.size(); }

  YearData at(std::size_t i) const {
    if (i >= years.size()) {
      throw DataError("exogenous series has no entry for index " +
                      std::to_string(i));
    }
    return {years[i],           base_visitors[i], base_revenue[i],
            base_expenditure[i], glacier_retreat[i], co2[i],
            population[i],      unemployment[i],  base_satisfaction[i]};
  }

  void validate() const {
    const std::size_t n = years.size();
    for (const auto* col :
         {&base_visitors, &base_revenue, &base_expenditure, &glacier_retreat,
          &co2, &population, &unemployment, &base_satisfaction}) {
      if (col->size() != n) throw DataError("exogenous series length mismatch");
      for (double v : *col) {
        if (!std::isfinite(v) || v < 0.0) {
          throw DataError("exogenous series values must be finite and >= 0");
        }
      }
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (years[i] != years[i - 1] + 1) {
        throw DataError("years must increase by exactly one");
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (unemployment[i] > 1.0 || base_satisfaction[i] > 1.0) {
        throw DataError("unemployment and satisfaction must lie in [0, 1]");
      }
    }
  }
};

struct SimState {
  double visitors = 0.0;
  double environment = 0.0;   // index in [0, 1]
  double satisfaction = 0.0;  // index in [0, 1]
  double net_revenue_cum = 0.0;

  friend bool operator==(const SimState&, const SimState&) = default;
};

/// Intermediate quantities of one simulated year, kept for reporting.
struct YearDiagnostics {
  int year = 0;  // the year whose visitors were produced
  double effective_price = 0.0;
  double glacier_factor = 0.0;
  double attraction_factor = 0.0;
  double price_factor = 0.0;
  double potential_visitors = 0.0;
  double tourism_revenue = 0.0;
  double gov_revenue_total = 0.0;
  double env_spending = 0.0;
  double gov_spending_total = 0.0;
  double net_revenue = 0.0;

  friend bool operator==(const YearDiagnostics&,
                         const YearDiagnostics&) = default;
};

/// states[0] is the initial state; states[k] follows k simulated years and
/// annual[k - 1] holds the diagnostics of that step.
struct Trajectory {
  std::vector<int> years;
  std::vector<SimState> states;
  std::vector<YearDiagnostics> annual;

  std::size_t horizon() const { return annual.size(); }
  const SimState& final_state() const { return states.back(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// (cumulative net revenue, final environment index, final satisfaction);
/// all three are maximized.
using Objectives = std::array<double, 3>;

inline Objectives objectives_of(const SimState& s) {
  return {s.net_revenue_cum, s.environment, s.satisfaction};
}

// ---------------------------------------------------------------------------
// Visitor dynamics

inline double effective_price(double base_price, double carbon_fee,
                              double tax_rate) {
  if (base_price < 0.0 || carbon_fee < 0.0 || tax_rate < 0.0) {
    throw DomainError("effective_price: inputs must be non-negative");
  }
  return (base_price + carbon_fee) * (1.0 + tax_rate);
}

inline double glacier_factor(double retreat, double retreat_baseline,
                             double sensitivity) {
  if (!(retreat_baseline > 0.0)) {
    throw DomainError("glacier_factor: baseline retreat must be positive");
  }
  if (sensitivity < 0.0) {
    throw DomainError("glacier_factor: sensitivity must be non-negative");
  }
  return std::max(0.0, 1.0 - sensitivity * (retreat / retreat_baseline - 1.0));
}

inline double attraction_factor(double environment, double satisfaction,
                                double glacier, double weight) {
  return (1.0 + weight * (environment + satisfaction - 1.0)) * glacier;
}

/// Raw demand multiplier; may be negative for strong elasticities; the
/// visitor step clamps it at zero.
inline double price_factor(double elasticity, double tax_rate,
                           double carbon_fee, double fee_normalizer) {
  if (!(fee_normalizer > 0.0)) {
    throw DomainError("price_factor: normalizer must be positive");
  }
  return 1.0 + elasticity * (tax_rate + carbon_fee / fee_normalizer);
}

inline double ship_ceiling(const PolicyVector& policy,
                           const ModelCoefficients& c) {
  return policy.ship_limit * c.ship_capacity;
}

struct VisitorStep {
  double effective_price = 0.0;
  double glacier_factor = 0.0;
  double attraction_factor = 0.0;
  double price_factor = 0.0;  // after clamping at zero
  double potential = 0.0;     // unconstrained demand
  double visitors = 0.0;      // after capacity and social resistance
};

/// Arrivals for year t+1. `capacity_limit` is passed separately from the
/// policy so the scenario engine can grow capacity over time.
inline VisitorStep step_visitors(const SimState& prev, const YearData& now,
                                 const YearData& next,
                                 const PolicyVector& policy,
                                 double capacity_limit,
                                 const ModelCoefficients& c,
                                 double extra_base_demand = 0.0) {
  VisitorStep s;
  s.effective_price =
      effective_price(c.base_price, policy.carbon_fee, policy.tax_rate);
  s.glacier_factor = glacier_factor(now.glacier_retreat, c.retreat_baseline,
                                    c.glacier_sensitivity);
  s.attraction_factor = attraction_factor(prev.environment, prev.satisfaction,
                                          s.glacier_factor, c.attraction_weight);
  s.price_factor = std::max(
      0.0, price_factor(c.price_elasticity, policy.tax_rate, policy.carbon_fee,
                        c.fee_normalizer));
  const double base = next.base_visitors + extra_base_demand;
  s.potential = std::max(0.0, base * s.price_factor * s.attraction_factor +
                                  policy.dev_incentive * c.dev_visitors);
  double v = std::min({s.potential, capacity_limit, ship_ceiling(policy, c)});
  if (prev.satisfaction < c.satisfaction_threshold) v *= c.resistance_ratio;
  s.visitors = std::max(0.0, v);
  return s;
}

inline VisitorStep step_visitors(const SimState& prev, const YearData& now,
                                 const YearData& next,
                                 const PolicyVector& policy,
                                 const ModelCoefficients& c) {
  return step_visitors(prev, now, next, policy, policy.capacity_limit, c);
}

// ---------------------------------------------------------------------------
// Government finance

struct FinanceStep {
  double tourism_revenue = 0.0;
  double gov_revenue_total = 0.0;
  double env_spending = 0.0;
  double gov_spending_total = 0.0;
  double net_revenue = 0.0;
  double net_revenue_cum = 0.0;
};

inline FinanceStep step_finance(double visitors, const YearData& now,
                                const PolicyVector& policy,
                                const ModelCoefficients& c, double prev_cum) {
  if (visitors < 0.0) throw DomainError("step_finance: negative visitors");
  FinanceStep f;
  f.tourism_revenue =
      visitors * (c.base_price * policy.tax_rate + policy.carbon_fee);
  f.gov_revenue_total = now.base_revenue + f.tourism_revenue +
                        policy.dev_incentive * c.dev_funds;
  f.env_spending = policy.env_ratio * f.gov_revenue_total;
  f.gov_spending_total = c.gov_base_share * now.base_expenditure + f.env_spending;
  f.net_revenue = f.gov_revenue_total - f.gov_spending_total;
  f.net_revenue_cum = prev_cum + f.net_revenue;
  return f;
}

// ---------------------------------------------------------------------------
// Environment

struct EnvSplit {
  double glacier = 0.0;
  double waste = 0.0;
};

inline EnvSplit split_env_spending(double env_spending, double glacier_ratio) {
  return {glacier_ratio * env_spending, (1.0 - glacier_ratio) * env_spending};
}

inline double step_environment(double environment, double env_spending,
                               const YearData& now, const PolicyVector& policy,
                               const ModelCoefficients& c) {
  if (!(environment >= 0.0 && environment <= 1.0)) {
    throw DomainError("step_environment: index outside [0, 1]");
  }
  const auto split = split_env_spending(env_spending, policy.glacier_ratio);
  const double gap = 1.0 - environment;
  const double next = environment +
                      c.glacier_effectiveness * split.glacier * gap +
                      c.waste_effectiveness * split.waste * gap -
                      c.retreat_impact * now.glacier_retreat -
                      c.co2_impact * now.co2 + c.recovery_rate * gap;
  return std::clamp(next, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Resident satisfaction

inline double step_social(double satisfaction, double environment_next,
                          double visitors_next, double glacier_spending,
                          double waste_spending, const YearData& now,
                          const ModelCoefficients& c) {
  if (!(satisfaction >= 0.0 && satisfaction <= 1.0)) {
    throw DomainError("step_social: satisfaction outside [0, 1]");
  }
  if (!(now.population > 0.0)) {
    throw DataError("step_social: population must be positive in year " +
                    std::to_string(now.year));
  }
  const double gap = 1.0 - satisfaction;
  const double next =
      satisfaction + c.glacier_satisfaction * glacier_spending * gap +
      c.waste_satisfaction * waste_spending * gap -
      c.crowding_impact * visitors_next / (now.population + c.crowd_epsilon) -
      c.unemployment_impact * now.unemployment +
      c.environment_feedback * (environment_next - satisfaction);
  return std::clamp(next, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Whole-year step and simulation

/// External levers used by the scenario engine. All-zero adjustments (with
/// capacity equal to the policy's) leave the plain dynamics bit-identical.
struct YearAdjustments {
  double capacity_limit = 0.0;
  double extra_base_demand = 0.0;
  double extra_env_spending = 0.0;
};

struct YearResult {
  SimState state;
  YearDiagnostics diagnostics;
};

/// Advance from year index t to t+1: visitors, then finance, then
/// environment, then satisfaction (which sees the updated environment).
inline YearResult step_year(const SimState& prev, const ExogenousSeries& exog,
                            std::size_t t, const PolicyVector& policy,
                            const ModelCoefficients& c,
                            const YearAdjustments& adj) {
  const YearData now = exog.at(t);
  const YearData next = exog.at(t + 1);

  const auto v = step_visitors(prev, now, next, policy, adj.capacity_limit, c,
                               adj.extra_base_demand);
  const auto f =
      step_finance(v.visitors, now, policy, c, prev.net_revenue_cum);
  const double env_budget = f.env_spending + adj.extra_env_spending;
  const double e_next =
      step_environment(prev.environment, env_budget, now, policy, c);
  const auto split = split_env_spending(env_budget, policy.glacier_ratio);
  const double s_next = step_social(prev.satisfaction, e_next, v.visitors,
                                    split.glacier, split.waste, now, c);

  YearResult r;
  r.state = {v.visitors, e_next, s_next, f.net_revenue_cum};
  r.diagnostics = {next.year,         v.effective_price,
                   v.glacier_factor,  v.attraction_factor,
                   v.price_factor,    v.potential,
                   f.tourism_revenue, f.gov_revenue_total,
                   f.env_spending,    f.gov_spending_total,
                   f.net_revenue};
  return r;
}

/// Initial state from the first dataset year: base visitors and base
/// satisfaction, the given environment index and zero accumulated revenue.
inline SimState initial_state(const ExogenousSeries& exog,
                              double initial_environment) {
  if (exog.size() == 0) throw DataError("empty exogenous series");
  if (!(initial_environment >= 0.0 && initial_environment <= 1.0)) {
    throw DomainError("initial environment index outside [0, 1]");
  }
  return {exog.base_visitors[0], initial_environment,
          exog.base_satisfaction[0], 0.0};
}

inline void validate_state(const SimState& s) {
  if (!(s.environment >= 0.0 && s.environment <= 1.0) ||
      !(s.satisfaction >= 0.0 && s.satisfaction <= 1.0) ||
      !(s.visitors >= 0.0) || !std::isfinite(s.net_revenue_cum)) {
    throw DomainError("invalid simulation state");
  }
}

inline void validate_policy(const PolicyVector& p) {
  for (double g : p.to_array()) {
    if (!std::isfinite(g) || g < 0.0) {
      throw DomainError("policy entries must be finite and non-negative");
    }
  }
  if (p.env_ratio > 1.0 || p.glacier_ratio > 1.0) {
    throw DomainError("policy ratios must not exceed 1");
  }
}

struct SimulationResult {
  Trajectory trajectory;
  Objectives objectives{};
};

/// Runs `horizon` annual steps (default: every year the series covers after
/// the first). Deterministic: identical inputs give bit-identical outputs.
inline SimulationResult simulate(const PolicyVector& policy,
                                 const ExogenousSeries& exog,
                                 const ModelCoefficients& c,
                                 const SimState& init,
                                 std::ptrdiff_t horizon = -1) {
  validate_policy(policy);
  validate_state(init);
  c.validate();
  if (exog.size() == 0) throw DataError("empty exogenous series");
  const std::size_t available = exog.size() - 1;
  const std::size_t steps =
      horizon < 0 ? available : static_cast<std::size_t>(horizon);
  if (steps > available) {
    throw DataError("exogenous series does not cover the requested horizon");
  }

  SimulationResult out;
  auto& traj = out.trajectory;
  traj.years.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.annual.reserve(steps);
  traj.years.push_back(exog.years[0]);
  traj.states.push_back(init);

  const YearAdjustments plain{policy.capacity_limit, 0.0, 0.0};
  SimState s = init;
  for (std::size_t t = 0; t < steps; ++t) {
    auto r = step_year(s, exog, t, policy, c, plain);
    s = r.state;
    traj.years.push_back(exog.years[t + 1]);
    traj.states.push_back(s);
    traj.annual.push_back(r.diagnostics);
  }
  out.objectives = objectives_of(s);
  return out;
}

}  // namespace tourism::sd
