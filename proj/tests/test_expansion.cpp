#include <gtest/gtest.h>

#include <cglforge/amplitude.hpp>
#include <cglforge/expansion.hpp>
#include <cglforge/models.hpp>

using namespace cglforge;

namespace {

ModelSpec swift_hohenberg(double q) {
  LocalLinear lin;
  auto c = [](double v) { return [v](double) { return Rmat::Constant(1, 1, v); }; };
  lin.L = {[](double mu) { return Rmat::Constant(1, 1, mu - 1.0); }, c(0.0), c(-2.0), c(0.0), c(-1.0)};
  std::vector<Polynomial> nl = {Polynomial(2)};
  nl[0].add(q, {2, 0});
  nl[0].add(-1.0, {3, 0});
  ModelSpec m;
  m.n = 1;
  m.linear = lin;
  m.nonlinearity = semilinear_from_poly(PolyJet(nl, 1));
  return m;
}

const Monomial kAAbar = make_monomial({amp_var(0), amp_var(0), amp_var(0, 0, true)});

}  // namespace

TEST(Expansion, ThirdOrderReproducesCoefficients) {
  for (const auto& name : {"brusselator", "brusselator_advective", "quasilinear_demo"}) {
    Fixture fx = builtin_model(name);
    TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
    CglCoefficients c = cgl_coefficients(fx.model, p);
    ExpansionOrderData e = higher_order_expand(fx.model, p, 3);
    ASSERT_EQ(e.order, 3);
    EXPECT_LE(std::abs(e.rhs_coefficient(0, kAAbar) - c.gamma), 1e-10) << name;
    EXPECT_LE(std::abs(e.rhs_coefficient(0, {amp_var(0, 2)}) - c.diffusion), 1e-10) << name;
    EXPECT_LE(std::abs(e.rhs_coefficient(0, make_monomial({mu_var(), amp_var(0)})) - c.growth), 1e-10) << name;
    Cvec v0 = e.coefficient(2, 0, make_monomial({amp_var(0), amp_var(0, 0, true)}));
    EXPECT_LE((v0 - c.v0.cast<cplx>()).norm(), 1e-10) << name;
    Cvec v2 = e.coefficient(2, 2, make_monomial({amp_var(0), amp_var(0)}));
    EXPECT_LE((2.0 * v2 - c.v2).norm(), 1e-10) << name;
    Cvec w = e.coefficient(2, 1, {amp_var(0, 1)});
    EXPECT_LE((2.0 * w - c.slave_vector).norm(), 1e-10) << name;
    Cvec lead = e.coefficient(1, 1, {amp_var(0)});
    EXPECT_LE((2.0 * lead - p.triple.right_vec).norm(), 1e-14) << name;
  }
}

TEST(Expansion, ZeroModeIsRealForRealAmplitude) {
  Fixture fx = brusselator_advective();
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  ExpansionOrderData e = higher_order_expand(fx.model, p, 3);
  auto value = [](const SlowVar& v) -> cplx {
    if (v.amp == -1) return 0.7;
    return v.deriv == 0 ? cplx(1.3) : cplx(0.4 / (v.deriv + 1));
  };
  Cvec psi0 = evaluate(e.harmonic(2, 0), value, Cvec::Zero(fx.model.n).eval());
  EXPECT_LE(psi0.imag().norm(), 1e-10);
}

TEST(Expansion, NegativeHarmonicsAreConjugates) {
  Fixture fx = brusselator_advective();
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  ExpansionOrderData e = higher_order_expand(fx.model, p, 3);
  Cvec plus = e.coefficient(2, 2, make_monomial({amp_var(0), amp_var(0)}));
  Cvec minus = e.coefficient(2, -2, make_monomial({amp_var(0, 0, true), amp_var(0, 0, true)}));
  EXPECT_LE((plus.conjugate() - minus).norm(), 1e-15);
}

TEST(Expansion, FourthOrderCorrectionStructure) {
  // The first correction A1 obeys the linearized amplitude equation: 2 gamma |A|^2 A1 + gamma A^2 conj(A1).
  for (const auto& name : {"brusselator", "brusselator_advective"}) {
    Fixture fx = builtin_model(name);
    TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
    CglCoefficients c = cgl_coefficients(fx.model, p);
    ExpansionOrderData e = higher_order_expand(fx.model, p, 4);
    ASSERT_EQ(e.amplitude_rhs.size(), 2u);
    auto A1 = make_monomial({amp_var(0), amp_var(0, 0, true), amp_var(1)});
    auto A1bar = make_monomial({amp_var(0), amp_var(0), amp_var(1, 0, true)});
    EXPECT_LE(std::abs(e.rhs_coefficient(1, A1) - 2.0 * c.gamma), 1e-8) << name;
    EXPECT_LE(std::abs(e.rhs_coefficient(1, A1bar) - c.gamma), 1e-8) << name;
    EXPECT_LE(std::abs(e.rhs_coefficient(1, {amp_var(1, 2)}) - c.diffusion), 1e-8) << name;
    EXPECT_LE(std::abs(e.rhs_coefficient(1, make_monomial({mu_var(), amp_var(1)})) - c.growth), 1e-8) << name;
  }
}

TEST(Expansion, PurelyCubicNonlinearityHasNoEvenHarmonics) {
  // N odd in U: the expansion is odd under A -> -A, so even harmonics vanish at every order.
  ModelSpec m = swift_hohenberg(0.0);
  TuringPoint p = locate_critical(m, -0.5, 0.5);
  ExpansionOrderData e = higher_order_expand(m, p, 4);
  for (int k = 2; k <= 4; ++k)
    for (int eta = 0; eta <= k; eta += 2)
      for (const auto& [mono, coef] : e.harmonic(k, eta).terms)
        EXPECT_LE(coef.norm(), 1e-12) << "order " << k << " eta " << eta;
  EXPECT_FALSE(e.harmonic(3, 3).empty());
  EXPECT_LE(std::abs(e.rhs_coefficient(0, kAAbar) + 0.75), 1e-8);
}

TEST(Expansion, SwiftHohenbergThirdHarmonic) {
  // At O(eps^3) on e^{3ix}: (mu_c - 64) Psi = -A^3/8, i.e. Psi = -A^3 / 512.
  ModelSpec m = swift_hohenberg(0.0);
  TuringPoint p = locate_critical(m, -0.5, 0.5);
  ExpansionOrderData e = higher_order_expand(m, p, 3);
  Cvec psi = e.coefficient(3, 3, make_monomial({amp_var(0), amp_var(0), amp_var(0)}));
  EXPECT_NEAR(std::abs(psi(0) + 1.0 / 512.0), 0.0, 1e-10);
}

TEST(Expansion, RejectsUnsupportedRequests) {
  Fixture fx = brusselator();
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  EXPECT_THROW(higher_order_expand(fx.model, p, 5), Error);
  EXPECT_THROW(higher_order_expand(fx.model, p, 2), Error);

  Fixture nl = nonlocal_demo();
  TuringPoint q = locate_critical(nl.model, nl.truth.mu_lo, nl.truth.mu_hi);
  EXPECT_NO_THROW(higher_order_expand(nl.model, q, 3));
  try {
    higher_order_expand(nl.model, q, 4);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::MissingDerivativeCallback);
  }
}
