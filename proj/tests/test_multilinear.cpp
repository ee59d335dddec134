#include <gtest/gtest.h>

#include <random>

#include <cglforge/models.hpp>
#include <cglforge/multilinear.hpp>
#include <cglforge/spectral.hpp>

using namespace cglforge;

namespace {

double rel(const Cvec& a, const Cvec& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

Cvec random_cvec(std::mt19937& rng, int n) {
  std::normal_distribution<double> nd;
  Cvec v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
  return v;
}

// Full quasilinear right-hand side (h(u) u_x)_x + f(u)_x + g(u) at u = u* + U, evaluated
// pseudospectrally on a 2 pi / k periodic grid directly from the model polynomials.
Cmat quasilinear_rhs_spectrum(const Quasilinear& ql, int n, double mu, double k, const Cmat& Uspec) {
  const int G = static_cast<int>(Uspec.cols());
  Spectral sp(G);
  Rmat U = sp.to_physical(Uspec);
  Rmat Ux = sp.to_physical(spectral_derivative(Uspec, k, 1));
  Rvec us = ql.equilibrium(mu);
  Rmat flux(n, G), fv(n, G), gv(n, G);
  std::vector<double> x(n + 1);
  for (int j = 0; j < G; ++j) {
    for (int i = 0; i < n; ++i) x[i] = us(i) + U(i, j);
    x[n] = mu;
    auto h = ql.h.eval(x.data(), 0), f = ql.f.eval(x.data(), 0), g = ql.g.eval(x.data(), 0);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += h.val(i * n + l) * Ux(l, j);
      flux(i, j) = s;
      fv(i, j) = f.val(i);
      gv(i, j) = g.val(i);
    }
  }
  return spectral_derivative(sp.to_spectral(flux), k, 1) + spectral_derivative(sp.to_spectral(fv), k, 1) +
         sp.to_spectral(gv);
}

Cmat two_mode_spectrum(int n, int G, const Cvec& u, const Cvec& v, double delta) {
  Cmat S = Cmat::Zero(n, G);
  S.col(1) = delta * u;
  S.col(G - 1) = delta * u.conjugate();
  S.col(2) = delta * v;
  S.col(G - 2) = delta * v.conjugate();
  return S;
}

}  // namespace

TEST(Forms, SemilinearAnalyticMatchesFiniteDifferences) {
  for (const char* name : {"brusselator", "brusselator_advective"}) {
    Fixture fx = builtin_model(name);
    TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
    Forms a = forms_from_model(fx.model, p);
    Forms d = forms_by_differences(fx.model, p.mu_c);
    std::mt19937 rng(21);
    for (int t = 0; t < 5; ++t) {
      Cvec u = random_cvec(rng, 2), v = random_cvec(rng, 2), w = random_cvec(rng, 2);
      EXPECT_LE(rel(d.Q(0.3, 0.4, u, v), a.Q(0.3, 0.4, u, v)), 1e-6) << name;
      EXPECT_LE(rel(d.C(0.1, 0.2, 0.3, u, v, w), a.C(0.1, 0.2, 0.3, u, v, w)), 1e-6) << name;
    }
  }
}

TEST(Forms, BrusselatorQuadraticClosedForm) {
  // N = (b/a) U^2 + 2a U V + U^2 V on the first component, with the opposite sign on the second.
  Fixture fx = brusselator();
  const double a = 2.0;
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  const double b = p.mu_c;
  Forms f = forms_from_model(fx.model, p);
  Cvec u(2), v(2), w(2);
  u << cplx(1, 2), cplx(-0.5, 0.3);
  v << cplx(0.2, -1), cplx(0.7, 0.1);
  w << cplx(-0.4, 0.9), cplx(1.1, -0.6);
  cplx q = b / a * u(0) * v(0) + a * (u(0) * v(1) + u(1) * v(0));
  cplx c = (u(0) * v(0) * w(1) + u(0) * v(1) * w(0) + u(1) * v(0) * w(0)) / 3.0;
  Cvec qe(2), ce(2);
  qe << q, -q;
  ce << c, -c;
  EXPECT_LE(rel(f.Q(0.0, 0.0, u, v), qe), 1e-12);
  EXPECT_LE(rel(f.C(0.0, 0.0, 0.0, u, v, w), ce), 1e-12);
}

TEST(Forms, QuadraticOrderOfSemilinearNonlinearity) {
  Fixture fx = brusselator();
  const auto& sl = std::get<Semilinear>(fx.model.nonlinearity);
  std::mt19937 rng(22);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 5; ++t) {
    Rvec u(2);
    u << nd(rng), nd(rng);
    u.normalize();
    double r3 = sl.N(1e-3 * u, 2.25).norm() / 1e-6;
    double r4 = sl.N(1e-4 * u, 2.25).norm() / 1e-8;
    EXPECT_LT(r3, 100.0);
    EXPECT_LT(r4, 100.0);
    EXPECT_NEAR(r3, r4, 1e-2 * std::max(1.0, r4));
  }
}

TEST(Forms, NonQuadraticOrderRejected) {
  ModelSpec m = brusselator().model;
  Semilinear sl;
  sl.N = [](const Rvec& U, double) { return Rvec(U * 0.1 + U.cwiseProduct(U)); };
  m.nonlinearity = sl;
  try {
    check_quadratic_order(m, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonQuadraticOrder);
  }
}

TEST(Forms, ZeroModeOfRealBilinearFormIsReal) {
  for (const char* name : {"brusselator", "brusselator_advective", "quasilinear_demo"}) {
    Fixture fx = builtin_model(name);
    TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
    Forms f = forms_from_model(fx.model, p);
    const Cvec& r = p.triple.right_vec;
    const cplx A(0.8, -0.35);
    Cvec out = eval_quadratic(f.Q, 1, -1, p.k_star, A * r, std::conj(A) * r.conjugate()) +
               eval_quadratic(f.Q, -1, 1, p.k_star, std::conj(A) * r.conjugate(), A * r);
    EXPECT_LE(out.imag().norm(), 1e-10) << name;
  }
}

TEST(Forms, SymmetrizedFormsAreSymmetric) {
  Fixture fx = quasilinear_demo();
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  Forms f = forms_from_model(fx.model, p, true);
  std::mt19937 rng(23);
  Cvec u = random_cvec(rng, 2), v = random_cvec(rng, 2), w = random_cvec(rng, 2);
  EXPECT_LE(rel(f.Q(0.4, -1.1, u, v), f.Q(-1.1, 0.4, v, u)), 1e-13);
  Cvec c0 = f.C(0.4, -1.1, 0.7, u, v, w);
  EXPECT_LE(rel(f.C(0.7, 0.4, -1.1, w, u, v), c0), 1e-13);
  EXPECT_LE(rel(f.C(-1.1, 0.7, 0.4, v, w, u), c0), 1e-13);
}

TEST(Forms, QuasilinearFormsMatchPseudospectralOperator) {
  Fixture fx = quasilinear_demo();
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  const auto& ql = std::get<Quasilinear>(fx.model.nonlinearity);
  Forms raw = quasilinear_forms_raw(ql, 2, p.mu_c);
  const int n = 2, G = 32;
  const double k = p.k_star;
  std::mt19937 rng(24);
  Cvec u = random_cvec(rng, n), v = random_cvec(rng, n);

  // even part in delta isolates the quadratic response on mode 3 = 1 + 2, up to O(delta^4)
  auto even3 = [&](double d) {
    Cmat a = quasilinear_rhs_spectrum(ql, n, p.mu_c, k, two_mode_spectrum(n, G, u, v, d));
    Cmat b = quasilinear_rhs_spectrum(ql, n, p.mu_c, k, two_mode_spectrum(n, G, u, v, -d));
    return Cvec(0.5 * (a.col(3) + b.col(3)) / (d * d));
  };
  const double d = 1e-2;
  Cvec oracle_q = (4.0 * even3(d / 2) - even3(d)) / 3.0;
  Cvec q = raw.Q(k, 2 * k, u, v) + raw.Q(2 * k, k, v, u);
  EXPECT_LE(rel(q, oracle_q), 1e-6);

  // odd part with a single mode isolates the cubic response on mode 3, up to O(delta^5)
  Cvec zero = Cvec::Zero(n);
  auto odd3 = [&](double dd) {
    Cmat a = quasilinear_rhs_spectrum(ql, n, p.mu_c, k, two_mode_spectrum(n, G, u, zero, dd));
    Cmat b = quasilinear_rhs_spectrum(ql, n, p.mu_c, k, two_mode_spectrum(n, G, u, zero, -dd));
    return Cvec(0.5 * (a.col(3) - b.col(3)) / (dd * dd * dd));
  };
  Cvec oracle_c = (4.0 * odd3(d / 2) - odd3(d)) / 3.0;
  Cvec c = raw.C(k, k, k, u, u, u);
  EXPECT_LE(rel(c, oracle_c), 1e-6);
}

TEST(Forms, NonlocalMultipliersCarryFilter) {
  Fixture fx = nonlocal_demo();
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  Forms f = forms_from_model(fx.model, p);
  const auto& ml = std::get<Multilinear>(fx.model.nonlinearity);
  Cvec u(2), v(2);
  u << 1.0, 0.5;
  v << -0.3, 2.0;
  Cvec at0 = f.Q(0.0, 0.0, u, v);
  Cvec at = f.Q(0.4, 0.9, u, v);
  EXPECT_LE(rel(at, (ml.filter(1.3) * at0).eval()), 1e-14);
}
