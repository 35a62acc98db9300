#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tourism/dataio.hpp"
#include "tourism/gsa.hpp"

using namespace tourism;
using namespace tourism::gsa;

namespace {

constexpr double kPi = std::numbers::pi;

ParameterSpace unit_box(std::size_t k) {
  ParameterSpace s;
  for (std::size_t i = 0; i < k; ++i) {
    s.parameters.push_back({"x" + std::to_string(i + 1), {0.0, 1.0}});
  }
  return s;
}

ParameterSpace ishigami_space() {
  ParameterSpace s;
  for (int i = 1; i <= 3; ++i) {
    s.parameters.push_back({"x" + std::to_string(i), {-kPi, kPi}});
  }
  return s;
}

double ishigami(std::span<const double> x, double a = 7.0, double b = 0.1) {
  return std::sin(x[0]) + a * std::sin(x[1]) * std::sin(x[1]) +
         b * std::pow(x[2], 4) * std::sin(x[0]);
}

// Analytic variance decomposition for X_i ~ U(-pi, pi):
//   V1 = (1 + b pi^4 / 5)^2 / 2, V2 = a^2 / 8, V13 = 8 b^2 pi^8 / 225,
//   V = V1 + V2 + V13.
struct IshigamiTruth {
  double s1, s2, s3, st1, st2, st3;
};

IshigamiTruth ishigami_truth(double a = 7.0, double b = 0.1) {
  const double p4 = std::pow(kPi, 4), p8 = std::pow(kPi, 8);
  const double v1 = 0.5 * std::pow(1.0 + b * p4 / 5.0, 2);
  const double v2 = a * a / 8.0;
  const double v13 = 8.0 * b * b * p8 / 225.0;
  const double v = v1 + v2 + v13;
  return {v1 / v, v2 / v, 0.0, (v1 + v13) / v, v2 / v, v13 / v};
}

}  // namespace

TEST(IshigamiTruth, AgreesWithPublishedFigures) {
  const auto t = ishigami_truth();
  EXPECT_NEAR(t.s1, 0.3139, 1e-4);
  EXPECT_NEAR(t.s2, 0.4424, 1e-4);
  EXPECT_NEAR(t.st3, 0.2437, 1e-4);
}

TEST(Morris, Delta) { EXPECT_DOUBLE_EQ(morris_delta(4), 2.0 / 3.0); }

TEST(Morris, TrajectoryShape) {
  const auto space = unit_box(2);
  const auto d = morris_sample(space, 15, 4, 1);
  ASSERT_EQ(d.trajectories.size(), 15u);
  for (const auto& tr : d.trajectories) {
    ASSERT_EQ(tr.points.size(), 3u);
    for (std::size_t j = 0; j + 1 < tr.unit.size(); ++j) {
      int changed = 0;
      for (std::size_t i = 0; i < 2; ++i) {
        if (tr.unit[j][i] != tr.unit[j + 1][i]) {
          ++changed;
          EXPECT_NEAR(std::abs(tr.unit[j + 1][i] - tr.unit[j][i]), 2.0 / 3.0, 1e-15);
        }
      }
      EXPECT_EQ(changed, 1);
    }
    for (const auto& u : tr.unit) {
      for (double v : u) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

TEST(Morris, InvalidGrid) {
  EXPECT_THROW(morris_sample(unit_box(2), 5, 3, 1), ConfigError);
  EXPECT_THROW(morris_sample(unit_box(2), 5, 2, 1), ConfigError);
  EXPECT_THROW(morris_sample(unit_box(2), 0, 4, 1), ConfigError);
}

TEST(Morris, LinearFunctionSlopes) {
  const auto r = morris(unit_box(2), [](std::span<const double> x) {
    return 2 * x[0] + x[1];
  }, 20, 4, 7);
  EXPECT_NEAR(r.entries[0].mu_star, 2.0, 1e-12);
  EXPECT_NEAR(r.entries[1].mu_star, 1.0, 1e-12);
  EXPECT_LE(r.entries[0].sigma, 1e-10);
  EXPECT_LE(r.entries[1].sigma, 1e-10);
}

TEST(Morris, ScaledBoundsUseUnitSteps) {
  ParameterSpace s;
  s.parameters = {{"a", {0, 10}}, {"b", {-5, 5}}};
  const auto r = morris(s, [](std::span<const double> x) { return x[0]; }, 10, 4, 2);
  EXPECT_NEAR(r.entries[0].mu_star, 10.0, 1e-9);
  EXPECT_EQ(r.entries[1].mu_star, 0.0);
}

TEST(Morris, ConstantAndInteraction) {
  const auto c = morris(unit_box(3), [](std::span<const double>) { return 4.0; }, 10, 4, 3);
  for (const auto& e : c.entries) {
    EXPECT_EQ(e.mu_star, 0.0);
    EXPECT_EQ(e.sigma, 0.0);
  }
  const auto p = morris(unit_box(2), [](std::span<const double> x) {
    return x[0] * x[1];
  }, 30, 4, 3);
  EXPECT_GT(p.entries[0].sigma, 0.0);
}

TEST(Saltelli, DesignSizeAndBlocks) {
  const auto d = saltelli_sample(unit_box(7), 512, 1);
  EXPECT_EQ(d.size(), 8192u);
  // A_B^(i) equals A except in column i, which comes from B.
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 512; j += 97) {
      const auto& ab = d.points[d.index_ab(i, j)];
      const auto& ba = d.points[d.index_ba(i, j)];
      for (std::size_t c = 0; c < 7; ++c) {
        EXPECT_EQ(ab[c], c == i ? d.b[j][c] : d.a[j][c]);
        EXPECT_EQ(ba[c], c == i ? d.a[j][c] : d.b[j][c]);
      }
    }
  }
}

TEST(Sobol, IshigamiSobolSequence) {
  const auto r = sobol(ishigami_space(), [](std::span<const double> x) {
    return ishigami(x);
  }, 4096, 12);
  const auto t = ishigami_truth();
  EXPECT_NEAR(r.entries[0].first, t.s1, 0.05);
  EXPECT_NEAR(r.entries[1].first, t.s2, 0.05);
  EXPECT_NEAR(r.entries[2].first, t.s3, 0.03);
  EXPECT_NEAR(r.entries[0].total, t.st1, 0.05);
  EXPECT_NEAR(r.entries[1].total, t.st2, 0.05);
  EXPECT_NEAR(r.entries[2].total, t.st3, 0.05);
  EXPECT_GT(r.entries[2].total, 0.2);
  for (const auto& e : r.entries) {
    EXPECT_LE(e.first_low, e.first);
    EXPECT_GE(e.first_high, e.first);
    EXPECT_LE(e.total_low, e.total);
    EXPECT_GE(e.total_high, e.total);
  }
}

TEST(Sobol, IshigamiPseudoRandom) {
  const auto r = sobol(ishigami_space(), [](std::span<const double> x) {
    return ishigami(x);
  }, 4096, 5, Sampler::random);
  const auto t = ishigami_truth();
  EXPECT_NEAR(r.entries[0].first, t.s1, 0.05);
  EXPECT_NEAR(r.entries[1].first, t.s2, 0.05);
  EXPECT_NEAR(r.entries[2].first, t.s3, 0.03);
  EXPECT_GT(r.entries[2].total, 0.2);
  EXPECT_EQ(r.sampler, Sampler::random);
}

TEST(Sobol, AdditiveFunction) {
  const auto r = sobol(unit_box(2), [](std::span<const double> x) {
    return 2 * x[0] + x[1];
  }, 2048, 9);
  // Var(2 x1) = 4/12, Var(x2) = 1/12.
  EXPECT_NEAR(r.entries[0].first, 0.8, 0.02);
  EXPECT_NEAR(r.entries[1].first, 0.2, 0.02);
  EXPECT_NEAR(r.entries[0].total, r.entries[0].first, 0.02);
  EXPECT_NEAR(r.entries[1].total, r.entries[1].first, 0.02);
  EXPECT_NEAR(r.entries[0].first + r.entries[1].first, 1.0, 0.02);
}

TEST(Sobol, AbsentVariableHasNoTotalEffect) {
  const auto r = sobol(unit_box(4), [](std::span<const double> x) {
    return std::exp(x[0]);
  }, 1024, 4);
  EXPECT_NEAR(r.entries[0].total, 1.0, 0.02);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_NEAR(r.entries[i].total, 0.0, 1e-12);
}

TEST(Sobol, ZeroVarianceIsNumericError) {
  EXPECT_THROW(sobol(unit_box(2), [](std::span<const double>) { return 1.0; }, 64, 1),
               NumericError);
}

TEST(Sobol, SameSeedSameIndices) {
  auto f = [](std::span<const double> x) { return ishigami(x); };
  const auto a = sobol(ishigami_space(), f, 256, 3);
  const auto b = sobol(ishigami_space(), f, 256, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.entries[i].first, b.entries[i].first);
    EXPECT_EQ(a.entries[i].total_high, b.entries[i].total_high);
  }
}

TEST(Space, Validation) {
  ParameterSpace s;
  EXPECT_THROW(s.validate(), ConfigError);
  s.parameters = {{"a", {1, 1}}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.parameters = {{"a", {0, 1}}, {"a", {0, 2}}};
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(ModelWiring, DefaultSpaceHasTwelveParameters) {
  const auto space = default_space(data::juneau_preset());
  EXPECT_EQ(space.size(), 12u);
  for (const auto& p : space.parameters) EXPECT_LT(p.bounds.lo, p.bounds.hi);
  EXPECT_EQ(space.parameters[3].name, "capacity_limit");
  EXPECT_DOUBLE_EQ(space.parameters[3].bounds.lo, 1.6e6);
  EXPECT_DOUBLE_EQ(space.parameters[3].bounds.hi, 2.4e6);
}

TEST(ModelWiring, UnknownParameterIsConfigError) {
  sd::PolicyVector p;
  sd::ModelCoefficients c;
  EXPECT_THROW(apply_parameter("bogus", 1.0, p, c), ConfigError);
  apply_parameter("carbon_fee", 12.0, p, c);
  apply_parameter("co2_impact", 3e-7, p, c);
  EXPECT_EQ(p.carbon_fee, 12.0);
  EXPECT_EQ(c.co2_impact, 3e-7);
}

TEST(ModelWiring, OnlyCapacityVariedWhenBinding) {
  const auto preset = data::juneau_preset();
  auto d = data::synth_dataset(preset, 1);
  for (auto& v : d.base_visitors) v *= 10;
  ModelSetup setup{d, preset.coefficients, preset.nominal_policy,
                   sd::initial_state(d, 0.8)};
  setup.policy.ship_limit = 800;
  ParameterSpace space;
  space.parameters = {{"capacity_limit", {1e6, 3e6}}};
  AnalysisConfig cfg;
  cfg.sobol_n = 2048;
  const auto rep = analyze_model(space, "f1", Method::sobol, setup, cfg);
  EXPECT_NEAR(rep.sobol[0].entries[0].total, 1.0, 0.02);
  EXPECT_NEAR(rep.sobol[0].entries[0].first, 1.0, 0.02);
}

TEST(ModelWiring, SelectorsAndMethods) {
  EXPECT_EQ(parse_outputs("all").size(), 3u);
  EXPECT_EQ(parse_outputs("f2"), std::vector<std::size_t>{1});
  EXPECT_THROW(parse_outputs("f4"), ConfigError);
  EXPECT_THROW(parse_method("fast"), ConfigError);
}

TEST(ModelWiring, MorrisReportShape) {
  const auto preset = data::juneau_preset();
  const auto d = data::synth_dataset(preset, 1);
  ModelSetup setup{d, preset.coefficients, preset.nominal_policy,
                   sd::initial_state(d, 0.8)};
  AnalysisConfig cfg;
  cfg.morris_trajectories = 20;
  const auto space = default_space(preset);
  const auto rep = analyze_model(space, "all", Method::morris, setup, cfg);
  EXPECT_EQ(rep.evaluations, 20u * 13u);
  ASSERT_EQ(rep.matrix.size(), 12u);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_EQ(rep.morris[m].entries.size(), 12u);
    double top = 0;
    for (const auto& row : rep.matrix) top = std::max(top, row[m]);
    EXPECT_DOUBLE_EQ(top, 1.0);
  }
}
