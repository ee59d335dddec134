#include <gtest/gtest.h>

#include <cglforge/amplitude.hpp>
#include <cglforge/models.hpp>

using namespace cglforge;

TEST(Catalog, EveryFixtureMatchesItsGroundTruth) {
  for (const auto& name : fixture_names()) {
    Fixture fx = builtin_model(name);
    TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
    double k_ref, mu_ref;
    if (fx.truth.k_star && fx.truth.mu_c) {
      k_ref = *fx.truth.k_star;
      mu_ref = *fx.truth.mu_c;
    } else {
      ASSERT_TRUE(static_cast<bool>(fx.truth.oracle)) << name;
      std::tie(k_ref, mu_ref) = fx.truth.oracle();
    }
    EXPECT_NEAR(p.k_star / k_ref, 1.0, 1e-8) << name << " (" << fx.truth.tag << ")";
    EXPECT_NEAR(p.mu_c / mu_ref, 1.0, 1e-8) << name << " (" << fx.truth.tag << ")";
  }
}

TEST(Catalog, BrusselatorClosedFormIsRecorded) {
  Fixture fx = brusselator();
  EXPECT_EQ(fx.truth.tag, "closed-form");
  ASSERT_TRUE(fx.truth.k_star.has_value());
  EXPECT_DOUBLE_EQ(*fx.truth.k_star, std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(*fx.truth.mu_c, 2.25);
}

TEST(Catalog, AdvectiveFixtureIsComplex) {
  Fixture fx = brusselator_advective();
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  CglCoefficients c = cgl_coefficients(fx.model, p);
  EXPECT_GT(std::abs(c.gamma.imag()), 1e-3);
  EXPECT_EQ(fx.truth.tag.rfind("oracle:", 0), 0u);
}

TEST(Catalog, ReflectionSymmetricBrusselatorIsReal) {
  Fixture fx = brusselator();
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  CglCoefficients c = cgl_coefficients(fx.model, p);
  EXPECT_LE(std::abs(c.gamma.imag()), 1e-8);
  EXPECT_EQ(c.criticality, Criticality::Supercritical);
}

TEST(Catalog, GalileanAdvectionOnlyShiftsPhaseSpeed) {
  const double c = 0.3;
  Fixture base = brusselator();
  Fixture moved = brusselator({{"c1", c}, {"c2", c}});
  TuringPoint p0 = locate_critical(base.model, base.truth.mu_lo, base.truth.mu_hi);
  TuringPoint p1 = locate_critical(moved.model, moved.truth.mu_lo, moved.truth.mu_hi);
  EXPECT_NEAR(p1.k_star, p0.k_star, 1e-8);
  EXPECT_NEAR(p1.mu_c, p0.mu_c, 1e-8);
  EXPECT_NEAR(p1.d_star() - p0.d_star(), -c, 1e-8);
  CglCoefficients c0 = cgl_coefficients(base.model, p0), c1 = cgl_coefficients(moved.model, p1);
  EXPECT_NEAR(std::abs(c1.gamma - c0.gamma), 0.0, 1e-8);
  EXPECT_NEAR(c1.delta, c0.delta, 1e-8);
}

TEST(Catalog, OverridesAreApplied) {
  Fixture fx = brusselator({{"a", 3.0}});
  EXPECT_DOUBLE_EQ(fx.params.at("a"), 3.0);
  EXPECT_DOUBLE_EQ(fx.params.at("D2"), 16.0);
  EXPECT_NEAR(*fx.truth.mu_c, std::pow(1.0 + 3.0 / 4.0, 2), 1e-14);
}

TEST(Catalog, UnknownFixtureRejected) {
  try {
    builtin_model("lorenz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownFixture);
  }
}

TEST(Catalog, QuasilinearLinearPartIsLinearizationOfFluxes) {
  // L(k) = -k^2 h(u*) + i k Df(u*) + Dg(u*) for u_t = (h(u) u_x)_x + f(u)_x + g(u).
  Fixture fx = quasilinear_demo();
  const auto& q = std::get<Quasilinear>(fx.model.nonlinearity);
  const double mu = 2.7, k = 0.8;
  Rvec us = q.equilibrium(mu);
  std::vector<double> x(us.data(), us.data() + 2);
  x.push_back(mu);
  auto h = q.h.eval(x.data(), 0), f = q.f.eval(x.data(), 1), g = q.g.eval(x.data(), 1);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(g.val(i), 0.0, 1e-12);
  Cmat expect(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) expect(i, j) = -k * k * h.val(i * 2 + j) + I1 * k * f.D1(i, j) + g.D1(i, j);
  EXPECT_LE((symbol(fx.model, k, mu) - expect).norm(), 1e-12);
}

TEST(Catalog, NonlocalSymbolMatchesDeclaredLeadingPart) {
  Fixture fx = nonlocal_demo();
  const auto& nl = std::get<NonlocalLinear>(fx.model.linear);
  const double mu = 3.0, k = 200.0;
  Cmat S = symbol(fx.model, k, mu) / (k * k);
  EXPECT_LE((S - nl.leading(mu).cast<cplx>()).norm(), 1e-3);
}

TEST(Catalog, PlantedResonanceHasDoubleWavenumberMarginalMode) {
  ModelSpec m = planted_resonance_model();
  auto ev = symbol_spectrum(m, 2.0, 0.0);
  double best = 1e300;
  for (auto e : ev) best = std::min(best, std::abs(e));
  EXPECT_LE(best, 1e-12);
}
