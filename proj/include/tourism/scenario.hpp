#pragma once

// Budget-allocation scenarios: each year's surplus is split across four
// channels and fed back into the following year's dynamics.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "tourism/dataio.hpp"
#include "tourism/error.hpp"
#include "tourism/sd_core.hpp"

namespace tourism::scenario {

struct AllocationPolicy {
  std::string name;
  double env = 0.0;
  double infra = 0.0;
  double community = 0.0;
  double marketing = 0.0;

  double sum() const { return env + infra + community + marketing; }

  void validate() const {
    for (double t : {env, infra, community, marketing}) {
      if (!(t >= 0.0 && t <= 1.0)) {
        throw ConfigError("scenario '" + name +
                          "': allocation shares must lie in [0, 1]");
      }
    }
  }
};

/// Shares rescaled to sum to 1 when they exceed it; `scale` is the factor
/// applied (1 when untouched).
struct NormalizedAllocation {
  AllocationPolicy policy;
  double scale = 1.0;
};

inline NormalizedAllocation normalize(const AllocationPolicy& p) {
  p.validate();
  NormalizedAllocation n{p, 1.0};
  const double s = p.sum();
  if (s > 1.0) {
    n.scale = 1.0 / s;
    n.policy.env /= s;
    n.policy.infra /= s;
    n.policy.community /= s;
    n.policy.marketing /= s;
  }
  return n;
}

inline std::vector<AllocationPolicy> juneau_scenarios() {
  return {{"Environment First", 0.7, 0.1, 0.1, 0.2},
          {"Balanced Growth", 0.3, 0.25, 0.25, 0.25},
          {"Infrastructure-Led", 0.3, 0.6, 0.1, 0.0},
          {"Community Focus", 0.2, 0.2, 0.6, 0.3}};
}

inline std::vector<AllocationPolicy> iceland_scenarios() {
  return {{"Env-Priority", 0.6, 0.2, 0.1, 0.1},
          {"Infra-Priority", 0.2, 0.6, 0.1, 0.1},
          {"Community-Priority", 0.2, 0.1, 0.6, 0.1},
          {"Marketing-Priority", 0.2, 0.1, 0.1, 0.6}};
}

inline std::vector<AllocationPolicy> scenarios_for(std::string_view preset) {
  if (preset == "juneau") return juneau_scenarios();
  if (preset == "iceland") return iceland_scenarios();
  throw ConfigError("no built-in scenarios for preset '" + std::string(preset) +
                    "'");
}

struct FeedbackCoefficients {
  double infra_efficiency = 0.0;      // capacity per USD
  double marketing_efficiency = 0.0;  // visitors per USD
  double community_efficiency = 0.0;  // satisfaction per USD, times (1 - S)

  static FeedbackCoefficients from_preset(const data::RegionPreset& p) {
    return {p.infra_efficiency, p.marketing_efficiency, p.community_efficiency};
  }

  void validate() const {
    if (!(infra_efficiency >= 0.0) || !(marketing_efficiency >= 0.0) ||
        !(community_efficiency >= 0.0)) {
      throw ConfigError("feedback efficiencies must be non-negative");
    }
  }
};

struct ChannelAmounts {
  double env = 0.0;
  double infra = 0.0;
  double community = 0.0;
  double marketing = 0.0;

  double total() const { return env + infra + community + marketing; }
};

inline ChannelAmounts allocate_surplus(double net_revenue,
                                       const AllocationPolicy& p) {
  const double surplus = std::max(0.0, net_revenue);
  return {surplus * p.env, surplus * p.infra, surplus * p.community,
          surplus * p.marketing};
}

/// Quantities that carry the allocation into the next annual step.
struct EffectiveParameters {
  double capacity_limit = 0.0;
  double extra_base_demand = 0.0;   // next year only
  double extra_env_spending = 0.0;  // next year only
};

/// Updates the effective parameters and the satisfaction index in `state`.
inline void apply_feedback(sd::SimState& state, EffectiveParameters& eff,
                           const ChannelAmounts& a,
                           const FeedbackCoefficients& fb) {
  if (a.env < 0.0 || a.infra < 0.0 || a.community < 0.0 || a.marketing < 0.0) {
    throw DomainError("apply_feedback: negative channel amount");
  }
  eff.capacity_limit += a.infra * fb.infra_efficiency;
  eff.extra_base_demand = a.marketing * fb.marketing_efficiency;
  eff.extra_env_spending = a.env;
  const double s = state.satisfaction;
  state.satisfaction =
      std::clamp(s + fb.community_efficiency * a.community * (1.0 - s), 0.0, 1.0);
}

struct ScenarioYear {
  int year = 0;
  ChannelAmounts amounts;   // allocated from this year's surplus
  double capacity_limit = 0.0;  // effective C_max used in this year's step
};

struct ScenarioRun {
  std::string name;
  AllocationPolicy applied;  // after normalization
  double scale = 1.0;
  sd::Trajectory trajectory;
  std::vector<ScenarioYear> years;
  sd::Objectives objectives{};
};

struct BaseConfig {
  sd::ExogenousSeries exog;
  sd::ModelCoefficients coefficients;
  sd::PolicyVector policy;
  sd::SimState init;
  FeedbackCoefficients feedback;
};

/// Annual loop: core step, then surplus allocation, then feedback into the
/// next step. With all shares zero the trajectory equals `sd::simulate`.
inline ScenarioRun run_scenario(const AllocationPolicy& allocation,
                                const BaseConfig& base) {
  sd::validate_policy(base.policy);
  sd::validate_state(base.init);
  base.coefficients.validate();
  base.feedback.validate();
  if (base.exog.size() == 0) throw DataError("empty exogenous series");

  const auto norm = normalize(allocation);
  ScenarioRun run;
  run.name = allocation.name;
  run.applied = norm.policy;
  run.scale = norm.scale;

  const std::size_t steps = base.exog.size() - 1;
  auto& traj = run.trajectory;
  traj.years.push_back(base.exog.years[0]);
  traj.states.push_back(base.init);

  EffectiveParameters eff{base.policy.capacity_limit, 0.0, 0.0};
  sd::SimState s = base.init;
  for (std::size_t t = 0; t < steps; ++t) {
    const sd::YearAdjustments adj{eff.capacity_limit, eff.extra_base_demand,
                                  eff.extra_env_spending};
    auto r = sd::step_year(s, base.exog, t, base.policy, base.coefficients, adj);
    s = r.state;
    ScenarioYear y;
    y.year = base.exog.years[t + 1];
    y.capacity_limit = eff.capacity_limit;
    y.amounts = allocate_surplus(r.diagnostics.net_revenue, norm.policy);
    if (y.amounts.total() > 0.0) {
      apply_feedback(s, eff, y.amounts, base.feedback);
    } else {
      eff.extra_base_demand = 0.0;
      eff.extra_env_spending = 0.0;
    }
    traj.years.push_back(y.year);
    traj.states.push_back(s);
    traj.annual.push_back(r.diagnostics);
    run.years.push_back(y);
  }
  run.objectives = sd::objectives_of(s);
  return run;
}

struct Comparison {
  std::vector<int> years;
  std::vector<ScenarioRun> runs;
};

inline Comparison compare_scenarios(const std::vector<AllocationPolicy>& list,
                                    const BaseConfig& base) {
  if (list.empty()) throw ConfigError("scenario list is empty");
  Comparison c;
  for (const auto& a : list) c.runs.push_back(run_scenario(a, base));
  c.years = c.runs.front().trajectory.years;
  return c;
}

}  // namespace tourism::scenario
