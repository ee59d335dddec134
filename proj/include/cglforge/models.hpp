#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace cglforge {

using Params = std::map<std::string, double>;

struct GroundTruth {
  std::string tag;  // "closed-form" or "oracle:<method>"
  std::optional<double> k_star;
  std::optional<double> mu_c;
  double mu_lo = 0.0, mu_hi = 0.0;  // bracket for locate_critical
  // independent (k*, mu_c) computation used when no closed form exists
  std::function<std::pair<double, double>()> oracle;
};

struct Fixture {
  ModelSpec model;
  GroundTruth truth;
  Params params;
};

namespace detail {

inline double param(const Params& p, const std::string& key, double def) {
  auto it = p.find(key);
  return it == p.end() ? def : it->second;
}

inline Params merge(Params defaults, const Params& over) {
  for (const auto& [k, v] : over) {
    if (!defaults.count(k)) fail(ErrorCode::InvalidArgument, "unknown fixture parameter '" + k + "'");
    defaults[k] = v;
  }
  return defaults;
}

// Largest real part of the eigenvalues of a complex 2x2 matrix by the quadratic formula.
inline double growth2(cplx a, cplx b, cplx c, cplx d) {
  cplx tr = a + d, det = a * d - b * c;
  cplx disc = std::sqrt(tr * tr / 4.0 - det);
  return std::max((tr / 2.0 + disc).real(), (tr / 2.0 - disc).real());
}

// Dense scan, then bisection on a five-point slope for argmax_k f(k, mu); bisection in mu.
inline std::pair<double, double> oracle_critical(const std::function<double(double, double)>& f, double kmax,
                                                 double mu_lo, double mu_hi) {
  auto gmax = [&](double mu, double* karg) {
    const int N = 20000;
    int best = 1;
    double bv = f(kmax / N, mu);
    for (int i = 2; i <= N; ++i) {
      double v = f(kmax * i / N, mu);
      if (v > bv) {
        bv = v;
        best = i;
      }
    }
    double lo = kmax * (best - 1) / N, hi = kmax * (best + 1) / N;
    const double h = 1e-3 * kmax / 4.0;
    auto slope = [&](double k) {
      return (-f(k + 2 * h, mu) + 8.0 * f(k + h, mu) - 8.0 * f(k - h, mu) + f(k - 2 * h, mu)) / (12.0 * h);
    };
    for (int it = 0; it < 200 && hi - lo > 1e-15 * kmax; ++it) {
      double mid = 0.5 * (lo + hi);
      if (slope(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    *karg = 0.5 * (lo + hi);
    return f(*karg, mu);
  };
  double k = 0.0;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (mu_lo + mu_hi);
    if (gmax(mid, &k) < 0.0)
      mu_lo = mid;
    else
      mu_hi = mid;
  }
  double mu = 0.5 * (mu_lo + mu_hi);
  gmax(mu, &k);
  return {k, mu};
}

inline Polynomial var(int nv, int i, double c = 1.0) { return Polynomial::variable(nv, i, c); }
inline Polynomial cst(int nv, double c) { return Polynomial::constant(nv, c); }

}  // namespace detail

// Brusselator kinetics written for the perturbation (U, V) about (a, b/a); mu = b.
inline std::vector<Polynomial> brusselator_nonlinearity(double a) {
  using detail::var;
  const int nv = 3;
  Polynomial U = var(nv, 0), V = var(nv, 1), b = var(nv, 2);
  Polynomial n = (U * U * b).scaled(1.0 / a) + (U * V).scaled(2.0 * a) + U * U * V;
  return {n, n.scaled(-1.0)};
}

inline Fixture brusselator(const Params& over = {}) {
  Params p = detail::merge({{"a", 2.0}, {"D1", 1.0}, {"D2", 16.0}, {"c1", 0.0}, {"c2", 0.0}}, over);
  const double a = p["a"], D1 = p["D1"], D2 = p["D2"], c1 = p["c1"], c2 = p["c2"];
  Fixture fx;
  fx.params = p;
  ModelSpec& m = fx.model;
  m.name = "brusselator";
  m.n = 2;
  m.parameter_name = "b";
  LocalLinear lin;
  lin.L.push_back([a](double b) {
    Rmat L(2, 2);
    L << b - 1.0, a * a, -b, -a * a;
    return L;
  });
  lin.L.push_back([c1, c2](double) {
    Rmat L = Rmat::Zero(2, 2);
    L(0, 0) = c1;
    L(1, 1) = c2;
    return L;
  });
  lin.L.push_back([D1, D2](double) {
    Rmat L = Rmat::Zero(2, 2);
    L(0, 0) = D1;
    L(1, 1) = D2;
    return L;
  });
  lin.dL_dmu.push_back([](double) {
    Rmat L(2, 2);
    L << 1.0, 0.0, -1.0, 0.0;
    return L;
  });
  lin.dL_dmu.push_back([](double) { return Rmat::Zero(2, 2).eval(); });
  lin.dL_dmu.push_back([](double) { return Rmat::Zero(2, 2).eval(); });
  m.linear = lin;
  m.nonlinearity = semilinear_from_poly(PolyJet(brusselator_nonlinearity(a), 2));

  const double bc = std::pow(1.0 + a * std::sqrt(D1 / D2), 2);
  fx.truth.mu_lo = 0.6 * bc;
  fx.truth.mu_hi = 1.5 * bc;
  if (c1 == c2) {
    fx.truth.tag = "closed-form";
    fx.truth.k_star = std::sqrt(a / std::sqrt(D1 * D2));
    fx.truth.mu_c = bc;
  }
  fx.truth.oracle = [a, D1, D2, c1, c2, lo = fx.truth.mu_lo, hi = fx.truth.mu_hi]() {
    auto f = [&](double k, double b) {
      return detail::growth2(cplx(b - 1.0 - D1 * k * k, c1 * k), a * a, -b, cplx(-a * a - D2 * k * k, c2 * k));
    };
    return detail::oracle_critical(f, 4.0 * std::sqrt(a / std::sqrt(D1 * D2)), lo, hi);
  };
  if (c1 != c2) fx.truth.tag = "oracle:quadratic-formula-scan";
  return fx;
}

// Convection on one component breaks the reflection symmetry.
inline Fixture brusselator_advective(const Params& over = {}) {
  Params p = detail::merge({{"a", 2.0}, {"D1", 1.0}, {"D2", 16.0}, {"c1", 0.0}, {"c2", 2.0}}, over);
  Fixture fx = brusselator(p);
  fx.model.name = "brusselator_advective";
  return fx;
}

// (h(u) u_x)_x + f(u)_x + g(u): state-dependent activator diffusion, Burgers-type flux
// on the inhibitor, Brusselator kinetics in absolute variables; mu = b.
inline Fixture quasilinear_demo(const Params& over = {}) {
  Params p = detail::merge({{"a", 2.0}, {"D1", 1.0}, {"D2", 16.0}, {"s1", 0.5}, {"s2", 0.2}, {"cf", 0.5}}, over);
  const double a = p["a"], D1 = p["D1"], D2 = p["D2"], s1 = p["s1"], s2 = p["s2"], cf = p["cf"];
  using detail::cst;
  using detail::var;
  const int nv = 3;
  Polynomial u1 = var(nv, 0), u2 = var(nv, 1), b = var(nv, 2);
  Polynomial w = u1 + cst(nv, -a);
  Polynomial w2 = w * w, w3 = w2 * w;
  std::vector<Polynomial> h = {(cst(nv, 1.0) + w.scaled(s1) + w2.scaled(s2)).scaled(D1), cst(nv, 0.0), cst(nv, 0.0),
                               cst(nv, D2)};
  std::vector<Polynomial> f = {cst(nv, 0.0), (w2.scaled(0.5) + w3.scaled(1.0 / 6.0)).scaled(cf)};
  Polynomial uuv = u1 * u1 * u2;
  std::vector<Polynomial> g = {cst(nv, a) + (b * u1).scaled(-1.0) + u1.scaled(-1.0) + uuv,
                               b * u1 + uuv.scaled(-1.0)};
  Quasilinear q;
  q.h = PolyJet(h, 2);
  q.f = PolyJet(f, 2);
  q.g = PolyJet(g, 2);
  q.equilibrium = [a](double bb) {
    Rvec u(2);
    u << a, bb / a;
    return u;
  };

  Fixture fx;
  fx.params = p;
  ModelSpec& m = fx.model;
  m.name = "quasilinear_demo";
  m.n = 2;
  m.parameter_name = "b";
  LocalLinear lin;
  auto jet_at = [q](const PolyJet& J, double bb, int order) {
    Rvec u = q.equilibrium(bb);
    double x[3] = {u(0), u(1), bb};
    return J.eval(x, order);
  };
  lin.L.push_back([q, jet_at](double bb) {
    auto v = jet_at(q.g, bb, 1);
    Rmat L(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) L(i, j) = v.D1(i, j);
    return L;
  });
  lin.L.push_back([q, jet_at](double bb) {
    auto v = jet_at(q.f, bb, 1);
    Rmat L(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) L(i, j) = v.D1(i, j);
    return L;
  });
  lin.L.push_back([q, jet_at](double bb) {
    auto v = jet_at(q.h, bb, 0);
    Rmat L(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) L(i, j) = v.val(i * 2 + j);
    return L;
  });
  m.linear = lin;
  m.nonlinearity = q;

  const double bc = std::pow(1.0 + a * std::sqrt(D1 / D2), 2);
  fx.truth.tag = "closed-form";
  fx.truth.k_star = std::sqrt(a / std::sqrt(D1 * D2));
  fx.truth.mu_c = bc;
  fx.truth.mu_lo = 0.6 * bc;
  fx.truth.mu_hi = 1.5 * bc;
  fx.truth.oracle = [a, D1, D2, lo = fx.truth.mu_lo, hi = fx.truth.mu_hi]() {
    auto fn = [&](double k, double bb) { return detail::growth2(bb - 1.0 - D1 * k * k, a * a, -bb, -a * a - D2 * k * k); };
    return detail::oracle_critical(fn, 4.0 * std::sqrt(a / std::sqrt(D1 * D2)), lo, hi);
  };
  return fx;
}

// Brusselator linear part plus a nonlocal inhibitor coupling -beta (1 - K(k)) with
// K(k) = exp(-sigma^2 k^2 / 2) cos(x0 k); nonlinearity smoothed by 1 / (1 + rho k^2).
inline Fixture nonlocal_demo(const Params& over = {}) {
  Params p = detail::merge(
      {{"a", 2.0}, {"D1", 1.0}, {"D2", 16.0}, {"beta", 0.5}, {"sigma", 1.0}, {"x0", 1.0}, {"rho", 0.1}, {"q0", 1.2}},
      over);
  const double a = p["a"], D1 = p["D1"], D2 = p["D2"], beta = p["beta"], sigma = p["sigma"], x0 = p["x0"],
               rho = p["rho"], q0 = p["q0"];
  auto K = [sigma, x0](double k) { return std::exp(-0.5 * sigma * sigma * k * k) * std::cos(x0 * k); };
  auto K1 = [sigma, x0](double k) {
    return std::exp(-0.5 * sigma * sigma * k * k) * (-sigma * sigma * k * std::cos(x0 * k) - x0 * std::sin(x0 * k));
  };
  auto K2 = [sigma, x0](double k) {
    double s2 = sigma * sigma;
    return std::exp(-0.5 * s2 * k * k) *
           ((s2 * s2 * k * k - s2 - x0 * x0) * std::cos(x0 * k) + 2.0 * s2 * x0 * k * std::sin(x0 * k));
  };
  NonlocalLinear nl;
  nl.symbol = [=](double k, double b) {
    Cmat S(2, 2);
    S << b - 1.0 - D1 * k * k, a * a, -b, -a * a - D2 * k * k - beta * (1.0 - K(k));
    return S;
  };
  nl.dk = [=](double k, double) {
    Cmat S(2, 2);
    S << -2.0 * D1 * k, 0.0, 0.0, -2.0 * D2 * k + beta * K1(k);
    return S;
  };
  nl.dk2 = [=](double k, double) {
    Cmat S(2, 2);
    S << -2.0 * D1, 0.0, 0.0, -2.0 * D2 + beta * K2(k);
    return S;
  };
  nl.dmu = [](double, double) {
    Cmat S(2, 2);
    S << 1.0, 0.0, -1.0, 0.0;
    return S;
  };
  nl.ellipticity_order = 2.0;
  nl.leading = [D1, D2](double) {
    Rmat L = Rmat::Zero(2, 2);
    L(0, 0) = -D1;
    L(1, 1) = -D2;
    return L;
  };

  using detail::var;
  const int nv = 3;
  Polynomial U = var(nv, 0), V = var(nv, 1);
  Polynomial n0 = (U * U).scaled(q0) + (U * V).scaled(2.0 * a) + U * U * V;
  PolyJet pw({n0, n0.scaled(-1.0)}, 2);
  Multilinear ml;
  ml.filter = [rho](double k) { return cplx(1.0 / (1.0 + rho * k * k), 0.0); };
  ml.pointwise = pw;
  ml.symmetric = true;
  ml.Q = [q0, a, rho](double k1, double k2, const Cvec& u, const Cvec& v) {
    double w = 1.0 / (1.0 + rho * (k1 + k2) * (k1 + k2));
    cplx s = q0 * u(0) * v(0) + a * (u(0) * v(1) + u(1) * v(0));
    Cvec out(2);
    out << w * s, -w * s;
    return out;
  };
  ml.C = [rho](double k1, double k2, double k3, const Cvec& u, const Cvec& v, const Cvec& z) {
    double kk = k1 + k2 + k3;
    double w = 1.0 / (1.0 + rho * kk * kk);
    cplx s = (u(0) * v(0) * z(1) + u(0) * v(1) * z(0) + u(1) * v(0) * z(0)) / 3.0;
    Cvec out(2);
    out << w * s, -w * s;
    return out;
  };

  Fixture fx;
  fx.params = p;
  ModelSpec& m = fx.model;
  m.name = "nonlocal_demo";
  m.n = 2;
  m.parameter_name = "b";
  m.linear = nl;
  m.nonlinearity = ml;
  const double bc = std::pow(1.0 + a * std::sqrt(D1 / D2), 2);
  fx.truth.tag = "oracle:quadratic-formula-scan";
  fx.truth.mu_lo = 0.6 * bc;
  fx.truth.mu_hi = 2.0 * bc;
  fx.truth.oracle = [=, lo = fx.truth.mu_lo, hi = fx.truth.mu_hi]() {
    auto f = [&](double k, double b) {
      return detail::growth2(b - 1.0 - D1 * k * k, a * a, -b, -a * a - D2 * k * k - beta * (1.0 - K(k)));
    };
    return detail::oracle_critical(f, 4.0 * std::sqrt(a / std::sqrt(D1 * D2)), lo, hi);
  };
  return fx;
}

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"brusselator", "brusselator_advective", "quasilinear_demo",
                                                 "nonlocal_demo"};
  return names;
}

inline Fixture builtin_model(const std::string& name, const Params& over = {}) {
  if (name == "brusselator") return brusselator(over);
  if (name == "brusselator_advective") return brusselator_advective(over);
  if (name == "quasilinear_demo") return quasilinear_demo(over);
  if (name == "nonlocal_demo") return nonlocal_demo(over);
  fail(ErrorCode::UnknownFixture, "no fixture named '" + name + "'");
}

// Two uncoupled Swift-Hohenberg-type components with the second one marginal at 2 k*
// (k* = 1, mu_c = 0): a planted 2:1 resonance.
inline ModelSpec planted_resonance_model() {
  ModelSpec m;
  m.name = "planted_resonance";
  m.n = 2;
  LocalLinear lin;
  lin.L.push_back([](double mu) {
    Rmat L = Rmat::Zero(2, 2);
    L(0, 0) = mu - 1.0;
    L(1, 1) = -16.0;
    return L;
  });
  lin.L.push_back([](double) { return Rmat::Zero(2, 2).eval(); });
  lin.L.push_back([](double) {
    Rmat L = Rmat::Zero(2, 2);
    L(0, 0) = -2.0;
    L(1, 1) = -8.0;
    return L;
  });
  lin.L.push_back([](double) { return Rmat::Zero(2, 2).eval(); });
  lin.L.push_back([](double) {
    Rmat L = Rmat::Zero(2, 2);
    L(0, 0) = -1.0;
    L(1, 1) = -1.0;
    return L;
  });
  m.linear = lin;
  std::vector<Polynomial> n = {Polynomial(3), Polynomial(3)};
  n[0].add(-1.0, {3, 0, 0});
  m.nonlinearity = semilinear_from_poly(PolyJet(n, 2));
  return m;
}

}  // namespace cglforge
