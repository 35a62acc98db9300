#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "tourism/flow.hpp"
#include "tourism/rng.hpp"

using namespace tourism;
using namespace tourism::flow;

namespace {

IslandParams quiet() {
  IslandParams p;
  return p;
}

Schedule constant_schedule(std::size_t sites, std::size_t years,
                           const SiteControls& u) {
  Schedule s;
  for (std::size_t k = 0; k < years; ++k) {
    s.years.push_back(2030 + static_cast<int>(k));
    s.controls.emplace_back(sites, u);
  }
  return s;
}

double sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST(Flow, TotalPotential) {
  auto p = quiet();
  p.phi = 0.2;
  EXPECT_NEAR(total_potential(1e6, 1.2, 0.8, p), 1.1e6, 1e-6);
  EXPECT_NEAR(total_potential(1e6, 1.0, 0.5, p), 1e6, 1e-9);
  p.dev_boost = 5e4;
  EXPECT_NEAR(total_potential(1e6, 1.0, 0.5, p), 1.05e6, 1e-9);
  p.phi = 10.0;
  EXPECT_EQ(total_potential(1e6, 0.0, 0.0, p), 0.0);
  EXPECT_THROW(total_potential(-1.0, 1.0, 1.0, p), DomainError);
}

TEST(Flow, Attractiveness) {
  auto p = quiet();
  SiteState s{"a", 0.5, 0.5, 0, 1, 1};
  EXPECT_DOUBLE_EQ(attractiveness(s, {}, p), 1.0);
  p.alpha1 = 1.0;
  SiteState hi{"b", 1.0, 0.5, 0, 1, 1}, lo{"c", 0.0, 0.5, 0, 1, 1};
  EXPECT_NEAR(attractiveness(hi, {}, p) / attractiveness(lo, {}, p), std::exp(1.0),
              1e-12);
  p.alpha3 = 1.0;
  SiteControls m;
  m.marketing = std::exp(1.0) - 1.0;
  EXPECT_NEAR(attractiveness(lo, m, p), std::exp(1.0), 1e-12);
  m.marketing = -1.0;
  EXPECT_THROW(attractiveness(lo, m, p), DomainError);
}

TEST(Flow, Weights) {
  const std::vector<double> a{3.0, 1.0};
  const auto w = allocation_weights(a);
  EXPECT_DOUBLE_EQ(w[0], 0.75);
  EXPECT_DOUBLE_EQ(w[1], 0.25);
  EXPECT_THROW(allocation_weights(std::vector<double>{}), DomainError);
  EXPECT_THROW(allocation_weights(std::vector<double>{1.0, 0.0}), DomainError);
}

TEST(Flow, AssignmentCapsAtCapacity) {
  const std::vector<double> w{0.5, 0.5}, c{100.0, 1000.0};
  const auto v = assign_visitors(1000.0, w, c);
  EXPECT_EQ(v[0], 100.0);
  EXPECT_EQ(v[1], 500.0);
}

TEST(Flow, SiteUpdates) {
  auto p = quiet();
  p.recovery = 0.1;
  SiteState s{"a", 0.5, 0.5, 0.0, 100.0, 10.0};
  EXPECT_NEAR(site_environment_update(s, {}, p), 0.55, 1e-15);

  auto q = quiet();
  q.rho_comm = 1e-6;
  SiteControls u;
  u.community_fund = 2e5;
  EXPECT_NEAR(site_social_update(s, u, 0.5, q), 0.7, 1e-15);

  q.rho_e = 0.5;
  EXPECT_NEAR(site_social_update(s, {}, 0.9, q), 0.7, 1e-15);
}

TEST(Flow, SiteUpdatesClamp) {
  auto p = quiet();
  p.beta_crowd = 10.0;
  p.rho_over = 10.0;
  SiteState s{"a", 0.5, 0.5, 100.0, 100.0, 10.0};
  EXPECT_EQ(site_environment_update(s, {}, p), 0.0);
  EXPECT_EQ(site_social_update(s, {}, 0.0, p), 0.0);
  p = quiet();
  p.env_effectiveness = 1.0;
  SiteControls u;
  u.env_fund = 5.0;
  EXPECT_EQ(site_environment_update(s, u, p), 1.0);
}

TEST(Flow, IdenticalSitesShareEqually) {
  const auto preset = iceland_flow_preset();
  SiteState base{"x", 0.7, 0.6, 1e5, 1e9, 1e4};
  std::vector<SiteState> sites;
  for (int i = 0; i < 4; ++i) {
    base.name = "s" + std::to_string(i);
    sites.push_back(base);
  }
  SiteControls u{10.0, 0.8, 1e5, 1e5};
  const auto r = redistribute(sites, preset.params, constant_schedule(4, 8, u));
  for (const auto& y : r.years) {
    for (std::size_t i = 1; i < 4; ++i) {
      EXPECT_NEAR(y.weights[i], y.weights[0], 1e-12);
      EXPECT_NEAR(y.visitors[i], y.visitors[0], 1e-12 * y.visitors[0]);
    }
  }
  for (double f : r.final_distribution) EXPECT_NEAR(f, 0.25, 1e-12);
}

TEST(Flow, MarketingShiftMovesShare) {
  const auto preset = iceland_flow_preset();
  SiteState base{"x", 0.7, 0.6, 1e5, 1e9, 1e4};
  std::vector<SiteState> sites(3, base);
  SiteControls u{10.0, 0.8, 0.0, 0.0};
  auto sched = constant_schedule(3, 1, u);
  const auto before = redistribute(sites, preset.params, sched);
  sched.controls[0][2].marketing = 1.0;
  const auto after = redistribute(sites, preset.params, sched);
  EXPECT_LT(after.years[0].weights[2], before.years[0].weights[2]);
  EXPECT_GT(after.years[0].weights[0], before.years[0].weights[0]);
}

TEST(Flow, PresetInvariants) {
  const auto fp = iceland_flow_preset();
  const auto r = redistribute(fp.sites, fp.params, fp.schedule);
  ASSERT_EQ(r.sites.size(), 7u);
  ASSERT_EQ(r.years.size(), 10u);
  EXPECT_EQ(r.years.front().year, 2024);
  for (const auto& y : r.years) {
    EXPECT_NEAR(sum(y.weights), 1.0, 1e-12);
    for (std::size_t i = 0; i < 7; ++i) {
      EXPECT_GE(y.environment[i], 0.0);
      EXPECT_LE(y.environment[i], 1.0);
      EXPECT_GE(y.satisfaction[i], 0.0);
      EXPECT_LE(y.satisfaction[i], 1.0);
      EXPECT_LE(y.visitors[i], fp.sites[i].capacity);
    }
    EXPECT_LE(sum(y.visitors), y.total * (1 + 1e-12));
  }
  EXPECT_NEAR(sum(r.final_distribution), 1.0, 1e-12);
}

TEST(Flow, RandomInvariants) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(8);
    std::vector<SiteState> sites;
    for (std::size_t i = 0; i < n; ++i) {
      const double cap = rng.uniform(1e4, 1e6);
      sites.push_back({"s" + std::to_string(i), rng.uniform(), rng.uniform(),
                       rng.uniform(0, cap), cap, rng.uniform(1e3, 1e5)});
    }
    IslandParams p;
    p.phi = rng.uniform(-0.5, 0.5);
    p.alpha0 = rng.uniform(-1, 1);
    p.alpha1 = rng.uniform(-3, 3);
    p.alpha2 = rng.uniform(-3, 3);
    p.alpha3 = rng.uniform(0, 2);
    p.alpha4 = rng.uniform(0, 2);
    p.env_effectiveness = rng.uniform(0, 1e-6);
    p.beta_crowd = rng.uniform(0, 0.5);
    p.beta_co2 = rng.uniform(0, 1e-6);
    p.recovery = rng.uniform(0, 0.3);
    p.rho_comm = rng.uniform(0, 1e-6);
    p.rho_over = rng.uniform(0, 1e-3);
    p.rho_e = rng.uniform(0, 0.5);
    p.co2_per_visitor = rng.uniform(0, 1);
    Schedule sched;
    for (int k = 0; k < 6; ++k) {
      sched.years.push_back(2030 + k);
      std::vector<SiteControls> row;
      for (std::size_t i = 0; i < n; ++i) {
        row.push_back({rng.uniform(0, 100), rng.uniform(0, 2), rng.uniform(0, 1e6),
                       rng.uniform(0, 1e6)});
      }
      sched.controls.push_back(row);
    }
    const auto r = redistribute(sites, p, sched);
    for (const auto& y : r.years) {
      EXPECT_NEAR(sum(y.weights), 1.0, 1e-12);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_GE(y.environment[i], 0.0);
        EXPECT_LE(y.environment[i], 1.0);
        EXPECT_GE(y.satisfaction[i], 0.0);
        EXPECT_LE(y.satisfaction[i], 1.0);
        EXPECT_GE(y.visitors[i], 0.0);
      }
    }
  }
}

TEST(Flow, ScheduleValidation) {
  const auto fp = iceland_flow_preset();
  auto bad = fp.schedule;
  bad.controls[3].pop_back();
  EXPECT_THROW(redistribute(fp.sites, fp.params, bad), ConfigError);
  auto sites = fp.sites;
  sites[0].environment = 1.5;
  EXPECT_THROW(redistribute(sites, fp.params, fp.schedule), DomainError);
  EXPECT_THROW(redistribute({}, fp.params, fp.schedule), DomainError);
}
