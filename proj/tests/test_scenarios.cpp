#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spnp/errors.hpp"
#include "spnp/scenarios.hpp"

using namespace spnp;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<Concentration> initial_concentrations(const Scenario& s, const Discretization& d) {
  std::vector<Concentration> c;
  for (const auto& f : s.initial.concentration) c.push_back(interpolate_concentration(d.p2, f));
  return c;
}

}  // namespace

TEST(Scenarios, EnergyDecayInitialData) {
  const Scenario s = scenario_energy_decay();
  EXPECT_EQ(s.cells, 40);
  ASSERT_EQ(s.initial.concentration.size(), 2u);
  const Discretization d = make_discretization(20, 20);
  const auto c = initial_concentrations(s, d);
  EXPECT_NEAR(species_mass(c[0]), 12, 1e-10);
  EXPECT_NEAR(species_mass(c[1]), 12, 1e-10);
  EXPECT_NEAR(species_mass(c[0]) - species_mass(c[1]), 0, 1e-10);
  // 12 +- 10 cos cos spans [2, 22]; nodal values carry the small rescaling
  // that matches the discrete mass to the quadrature of the exact profile.
  EXPECT_NEAR(min_concentration(c[0]), 2, 1e-5);
  EXPECT_NEAR(max_concentration(c[0]), 22, 1e-4);
  EXPECT_NO_THROW(s.params.validate());
}

TEST(Scenarios, StericInitialData) {
  const Scenario s = scenario_steric(0);
  EXPECT_EQ(s.params.steric.norm(), 0);
  const double cp = s.initial.concentration[0](1, 1);
  const double expected = 1e-6 + (1 - 1e-6) * 0.25 * (1 + std::tanh(0.25 / 0.04)) * (1 + std::tanh(0.45 / 0.04));
  EXPECT_NEAR(cp, expected, 1e-15);
  EXPECT_NEAR(cp, 1, 1e-5);
  // The anion sits below the midline, so it is nearly absent at the top-right.
  EXPECT_LT(s.initial.concentration[1](1, 1), 1e-6 + 1e-9);
  EXPECT_EQ(s.options.potential_compatibility, CompatibilityPolicy::ProjectOut);
}

TEST(Scenarios, StericMatricesArePositiveDefinite) {
  const double diag[] = {0, 4, 8, 8, 8}, off[] = {0, 1, 1, 4, 7};
  for (int k = 0; k < 5; ++k) {
    const Eigen::MatrixXd w = steric_matrix(k);
    EXPECT_EQ(w(0, 0), diag[k]);
    EXPECT_EQ(w(0, 1), off[k]);
    EXPECT_EQ(w(1, 0), off[k]);
    Scenario s = scenario_steric(k);
    EXPECT_NO_THROW(s.params.validate());
  }
  EXPECT_THROW(steric_matrix(5), ConfigError);
}

TEST(Scenarios, ExponentKInitialPeak) {
  const Scenario s = scenario_exponent_k(0.4);
  EXPECT_DOUBLE_EQ(s.params.k, 0.4);
  EXPECT_EQ(s.options.potential_bc, PotentialBc::DirichletLeftRight);
  const double peak = 1 + 1e-6 + std::tanh(0.25);
  EXPECT_NEAR(s.initial.concentration[0](0.4, 0.4), peak, 1e-15);
  EXPECT_NEAR(s.initial.concentration[1](0.6, 0.6), peak, 1e-15);
  EXPECT_NEAR(peak, 1.2449, 1e-4);
  EXPECT_THROW(scenario_exponent_k(0), ConfigError);
}

TEST(Scenarios, ByName) {
  EXPECT_EQ(scenario_by_name("energy-decay").name, "energy-decay");
  EXPECT_EQ(scenario_by_name("steric:3").params.steric(0, 1), 4);
  EXPECT_DOUBLE_EQ(scenario_by_name("exponent-k:0.7").params.k, 0.7);
  for (const char* bad : {"steric:5", "steric:", "steric:12", "exponent-k:", "exponent-k:x", "vortex", ""}) {
    try {
      scenario_by_name(bad);
      ADD_FAILURE() << "accepted " << bad;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.key(), "scenario");
    }
  }
}

TEST(Scenarios, DeskProfileShortensRuns) {
  Scenario e = scenario_energy_decay();
  apply_desk_profile(e);
  EXPECT_EQ(e.cells, 20);
  EXPECT_DOUBLE_EQ(e.params.T, 0.5);
  Scenario st = scenario_steric(2);
  apply_desk_profile(st);
  EXPECT_DOUBLE_EQ(st.params.T, 0.2);
  EXPECT_DOUBLE_EQ(st.snapshot_times.back(), 0.2);
  Scenario k = scenario_exponent_k(1);
  apply_desk_profile(k);
  EXPECT_EQ(k.cells, 20);
  EXPECT_DOUBLE_EQ(k.params.T, 1);
  for (double t : k.snapshot_times) EXPECT_LE(t, k.params.T);
}

TEST(Scenarios, FamiliesListed) { EXPECT_EQ(scenario_families().size(), 3u); }

TEST(StreamFunction, RecoversClosedForm) {
  // u = (psi_y, -psi_x) with psi = sin^2(pi x) sin^2(pi y).
  const Discretization d = make_discretization(16, 16);
  const FeSpace& s = *d.p2;
  Velocity u = Velocity::zero(d.p2);
  const Index n = s.n_dofs();
  u.field.coeffs.head(n) = s.interpolate([](double x, double y) {
    return pi * std::pow(std::sin(pi * x), 2) * std::sin(2 * pi * y);
  });
  u.field.coeffs.tail(n) = s.interpolate([](double x, double y) {
    return -pi * std::sin(2 * pi * x) * std::pow(std::sin(pi * y), 2);
  });
  const Field psi = stream_function(u);
  const double err = error_norm_l2(psi, [](double x, double y) {
    return std::pow(std::sin(pi * x) * std::sin(pi * y), 2);
  });
  EXPECT_LE(err, 2e-3);
  EXPECT_EQ(count_interior_extrema(psi), 1);
}

TEST(StreamFunction, TwoCellFlow) {
  // psi = sin(2 pi x) sin(pi y) has one maximum and one minimum.
  const Discretization d = make_discretization(16, 16);
  const FeSpace& s = *d.p2;
  Velocity u = Velocity::zero(d.p2);
  const Index n = s.n_dofs();
  u.field.coeffs.head(n) = s.interpolate([](double x, double y) { return pi * std::sin(2 * pi * x) * std::cos(pi * y); });
  u.field.coeffs.tail(n) =
      s.interpolate([](double x, double y) { return -2 * pi * std::cos(2 * pi * x) * std::sin(pi * y); });
  EXPECT_EQ(count_interior_extrema(stream_function(u)), 2);
}

TEST(StreamFunction, ZeroVelocity) {
  const Discretization d = make_discretization(4, 4);
  const Field psi = stream_function(Velocity::zero(d.p2));
  EXPECT_EQ(psi.coeffs.norm(), 0);
  EXPECT_EQ(count_interior_extrema(psi), 0);
}
