#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include <cglforge/evolve.hpp>
#include <cglforge/models.hpp>

using namespace cglforge;

namespace {

// u_t = mu u + b u_x + D u_xx + 0 * u^2 for a linear single-component check.
ModelSpec scalar_linear(double b, double D) {
  LocalLinear lin;
  lin.L = {[](double mu) { return Rmat::Constant(1, 1, mu); }, [b](double) { return Rmat::Constant(1, 1, b); },
           [D](double) { return Rmat::Constant(1, 1, D); }};
  ModelSpec m;
  m.n = 1;
  m.linear = lin;
  m.nonlinearity = semilinear_from_poly(PolyJet({Polynomial(2)}, 1));
  return m;
}

struct Analysed {
  Fixture fx;
  TuringPoint p;
  CglCoefficients c;
};

Analysed analyse(const std::string& name) {
  Analysed a{builtin_model(name), {}, {}};
  a.p = locate_critical(a.fx.model, a.fx.truth.mu_lo, a.fx.truth.mu_hi);
  a.c = cgl_coefficients(a.fx.model, a.p);
  return a;
}

}  // namespace

TEST(IntegrateFull, LinearModesFollowExactExponential) {
  const double b = 0.7, D = 0.3, mu = 0.2, L = 2.0 * kPi;
  ModelSpec m = scalar_linear(b, D);
  const int G = 32;
  for (int mode : {1, 2, 3}) {
    FieldState s{G, L, Rmat(1, G), 0.0};
    for (int j = 0; j < G; ++j) s.values(0, j) = std::cos(2.0 * kPi * mode * j / G);
    SimulationTrace tr = integrate_full(m, s, mu, 5e-4, 1.0);
    const double k = 2.0 * kPi * mode / L;
    cplx lam = symbol(m, k, mu)(0, 0);
    Spectral sp(G);
    double modulus = 2.0 * std::abs(sp.to_spectral(tr.final_state.values)(0, mode));
    EXPECT_NEAR(modulus / std::exp(lam.real()), 1.0, 1e-6) << "mode " << mode;
    for (int j = 0; j < G; ++j) {
      double x = L * j / G;
      double exact = (std::exp(lam) * std::exp(I1 * k * x)).real();
      EXPECT_NEAR(tr.final_state.values(0, j), exact, 1e-6 * std::abs(std::exp(lam)))
          << "mode " << mode << " j " << j;
    }
    EXPECT_NEAR(tr.final_state.t, 1.0, 1e-12);
  }
}

TEST(IntegrateFull, TwoComponentEigenmode) {
  Analysed a = analyse("brusselator");
  ModelSpec m = a.fx.model;
  m.nonlinearity = semilinear_from_poly(PolyJet({Polynomial(3), Polynomial(3)}, 2));
  const int G = 32, mode = 2;
  const double L = 2.0 * kPi * mode / a.p.k_star;
  const double mu = 0.9 * a.p.mu_c;
  EigenTriple t = eigen_triple(symbol(m, a.p.k_star, mu));
  FieldState s{G, L, Rmat(2, G), 0.0};
  for (int j = 0; j < G; ++j) {
    cplx e = std::exp(I1 * (2.0 * kPi * mode * j / G));
    s.values.col(j) = (t.right_vec * e).real();
  }
  SimulationTrace tr = integrate_full(m, s, mu, 1e-3, 1.0);
  const cplx g = std::exp(t.eigenvalue);
  double err = 0.0, scale = 0.0;
  for (int j = 0; j < G; ++j) {
    cplx e = std::exp(I1 * (2.0 * kPi * mode * j / G));
    Rvec exact = (t.right_vec * g * e).real();
    err = std::max(err, (tr.final_state.values.col(j) - exact).cwiseAbs().maxCoeff());
    scale = std::max(scale, exact.cwiseAbs().maxCoeff());
  }
  EXPECT_LE(err, 1e-6 * scale);
}

TEST(IntegrateFull, ReflectionSymmetryIsPreserved) {
  Analysed a = analyse("brusselator");
  const int G = 64;
  const double L = 2.0 * kPi * 4 / a.p.k_star;
  FieldState s{G, L, Rmat(2, G), 0.0};
  for (int j = 0; j < G; ++j) {
    double x = 2.0 * kPi * j / G;
    s.values(0, j) = 0.05 * std::cos(4 * x) + 0.02 * std::cos(x);
    s.values(1, j) = -0.03 * std::cos(4 * x) + 0.01 * std::cos(2 * x);
  }
  SimulationTrace tr = integrate_full(a.fx.model, s, a.p.mu_c + 0.01, 0.01, 2.0);
  const Rmat& U = tr.final_state.values;
  for (int j = 1; j < G; ++j) EXPECT_NEAR(U(0, j), U(0, G - j), 1e-12);
}

TEST(IntegrateFull, BlowUpIsReported) {
  ModelSpec m = scalar_linear(0.0, 0.0);
  FieldState s{8, 1.0, Rmat::Constant(1, 8, 1.0), 0.0};
  try {
    integrate_full(m, s, 20.0, 0.01, 1.0, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BlowUp);
  }
}

TEST(IntegrateCgl, PlaneWaveEquilibriumIsPreserved) {
  Analysed a = analyse("brusselator_advective");
  const double mt = 1.0;
  DispersionPrediction d = dispersion_band(a.c, 0.0, mt);
  AmplitudeState s;
  s.G = 32;
  s.length = 10.0;
  s.A = Cvec::Constant(32, cplx(d.amplitude, 0.0));
  AmplitudeTrace tr = integrate_cgl(a.c, s, mt, 1e-3, 1.0, 250);
  for (const auto& snap : tr.snapshots)
    for (int j = 0; j < s.G; ++j) EXPECT_NEAR(std::abs(snap.A(j)), d.amplitude, 1e-8 * (1.0 + snap.T));
  double phase = std::arg(tr.final_state.A(0));
  EXPECT_NEAR(phase, d.omega, 1e-8);
}

TEST(IntegrateCgl, PlaneWaveWithWavenumber) {
  Analysed a = analyse("brusselator_advective");
  const double mt = 1.0, L = 20.0;
  const double kappa = 2.0 * kPi / L;
  DispersionPrediction d = dispersion_band(a.c, kappa, mt);
  ASSERT_TRUE(d.in_band);
  AmplitudeState s;
  s.G = 32;
  s.length = L;
  s.A.resize(32);
  for (int j = 0; j < 32; ++j) s.A(j) = d.amplitude * std::exp(I1 * (kappa * L * j / 32));
  AmplitudeTrace tr = integrate_cgl(a.c, s, mt, 1e-3, 1.0, 0);
  for (int j = 0; j < 32; ++j) {
    cplx exact = d.amplitude * std::exp(I1 * (kappa * L * j / 32 + d.omega));
    EXPECT_NEAR(std::abs(tr.final_state.A(j) - exact), 0.0, 1e-8);
  }
}

TEST(Ansatz, ResidualScalesWithEpsilonCubed) {
  for (const char* name : {"brusselator", "brusselator_advective"}) {
    Analysed a = analyse(name);
    const double Lhat = slow_length_for(a.p.k_star, 0.8);
    AmplitudeState A = bump_amplitude(dispersion_band(a.c, 0.0, 1.0).amplitude, 0.4, Lhat, 64);
    ResidualReport r1 = ansatz_residual(a.fx.model, a.p, a.c, 0.1, A, 1.0, {}, 3);
    ResidualReport r2 = ansatz_residual(a.fx.model, a.p, a.c, 0.05, A, 1.0, {}, 3);
    double order = std::log(r1.residual / r2.residual) / std::log(2.0);
    EXPECT_GT(order, 2.7) << name;
    EXPECT_LT(order, 3.3) << name;
    EXPECT_EQ(r1.carrier_periods, 8);
    EXPECT_EQ(r2.carrier_periods, 16);
  }
}

TEST(Ansatz, DroppingSecondHarmonicLosesAnOrder) {
  Analysed a = analyse("brusselator");
  const double Lhat = slow_length_for(a.p.k_star, 0.8);
  AmplitudeState A = bump_amplitude(dispersion_band(a.c, 0.0, 1.0).amplitude, 0.4, Lhat, 64);
  AnsatzOptions o;
  o.include_psi2 = false;
  ResidualReport r1 = ansatz_residual(a.fx.model, a.p, a.c, 0.1, A, 1.0, o, 3);
  ResidualReport r2 = ansatz_residual(a.fx.model, a.p, a.c, 0.05, A, 1.0, o, 3);
  double order = std::log(r1.residual / r2.residual) / std::log(2.0);
  EXPECT_GT(order, 1.7);
  EXPECT_LT(order, 2.4);
}

TEST(Ansatz, UnderResolvedAmplitudeRejected) {
  Analysed a = analyse("brusselator");
  AmplitudeState A;
  A.G = 16;
  A.length = slow_length_for(a.p.k_star, 0.8);
  A.A = Cvec::Zero(16);
  A.A(3) = 1.0;  // a spike has a flat spectrum
  try {
    ansatz_residual(a.fx.model, a.p, a.c, 0.1, A, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnderResolved);
  }
}

TEST(Ansatz, CarrierCountMustBeInteger) {
  Analysed a = analyse("brusselator");
  EXPECT_THROW(AnsatzBuilder(a.fx.model, a.p, a.c, 0.1, 1.0, slow_length_for(a.p.k_star, 0.83), 256), Error);
}

TEST(CompareEvolution, ZeroEpsilonIsTrivial) {
  Analysed a = analyse("brusselator");
  ErrorTrace t = compare_evolution(a.fx.model, a.p, a.c, 0.0, 1.0);
  EXPECT_EQ(t.max_gap, 0.0);
}

TEST(CompareEvolution, GapStartsAtZeroAndStaysSmall) {
  Analysed a = analyse("brusselator");
  CompareOptions o;
  o.samples = 3;
  ErrorTrace t = compare_evolution(a.fx.model, a.p, a.c, 0.1, 0.5, o);
  ASSERT_EQ(t.gaps.size(), 3u);
  EXPECT_LE(t.gaps.front(), 1e-14);
  EXPECT_LT(t.max_gap, 0.1 * t.full.sup_norms.front());
  EXPECT_EQ(t.carrier_periods, 8);
}

TEST(Snapshot, RoundTrip) {
  FieldState s{16, 3.5, Rmat::Random(2, 16), 0.0};
  auto path = (std::filesystem::temp_directory_path() / "cglforge_snapshot_test.cglf").string();
  write_snapshot(path, s);
  FieldState r = read_snapshot(path);
  EXPECT_EQ(r.G, 16);
  EXPECT_EQ(r.values.rows(), 2);
  EXPECT_EQ((r.values - s.values).cwiseAbs().maxCoeff(), 0.0);
  std::remove(path.c_str());
}

TEST(Snapshot, BadMagicRejected) {
  auto path = (std::filesystem::temp_directory_path() / "cglforge_bad_snapshot.cglf").string();
  {
    std::ofstream f(path, std::ios::binary);
    f << "NOPE0000000000000";
  }
  try {
    read_snapshot(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
  std::remove(path.c_str());
}
