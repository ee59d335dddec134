#pragma once

#include <array>
#include <functional>

#include "model.hpp"
#include "turing.hpp"

namespace cglforge {

struct QuadraticMultiplier {
  QuadFn eval;
  bool symmetric = true;
  Cvec operator()(double k1, double k2, const Cvec& u, const Cvec& v) const { return eval(k1, k2, u, v); }
};

struct CubicMultiplier {
  CubicFn eval;
  bool symmetric = true;
  Cvec operator()(double k1, double k2, double k3, const Cvec& u, const Cvec& v, const Cvec& w) const {
    return eval(k1, k2, k3, u, v, w);
  }
};

struct Forms {
  QuadraticMultiplier Q;
  CubicMultiplier C;
};

inline Cvec eval_quadratic(const QuadraticMultiplier& Q, int n1, int n2, double k_star, const Cvec& u, const Cvec& v) {
  return Q(n1 * k_star, n2 * k_star, u, v);
}

inline Cvec eval_cubic(const CubicMultiplier& C, int n1, int n2, int n3, double k_star, const Cvec& u, const Cvec& v,
                       const Cvec& w) {
  return C(n1 * k_star, n2 * k_star, n3 * k_star, u, v, w);
}

inline QuadraticMultiplier symmetrized(const QuadraticMultiplier& Q) {
  if (Q.symmetric) return Q;
  auto raw = Q.eval;
  return {[raw](double k1, double k2, const Cvec& u, const Cvec& v) -> Cvec {
            return 0.5 * (raw(k1, k2, u, v) + raw(k2, k1, v, u));
          },
          true};
}

inline CubicMultiplier symmetrized(const CubicMultiplier& C) {
  if (C.symmetric) return C;
  auto raw = C.eval;
  return {[raw](double k1, double k2, double k3, const Cvec& u, const Cvec& v, const Cvec& w) -> Cvec {
            Cvec s = raw(k1, k2, k3, u, v, w) + raw(k1, k3, k2, u, w, v) + raw(k2, k1, k3, v, u, w) +
                     raw(k2, k3, k1, v, w, u) + raw(k3, k1, k2, w, u, v) + raw(k3, k2, k1, w, v, u);
            return s / 6.0;
          },
          true};
}

namespace detail {

// Real tensors T2[i](j,k) = d^2 N_i and T3 = d^3 N at a point, from a polynomial jet.
struct Tensors {
  int n = 0;
  std::vector<double> t2, t3;  // (i*n+j)*n+k, ((i*n+j)*n+k)*n+l
};

inline Tensors tensors_from_jet(const PolyJet& jet, const std::vector<double>& x) {
  auto v = jet.eval(x.data(), 3);
  return {jet.n(), v.d2, v.d3};
}

// Polarization stencils with one Richardson level.
inline Tensors tensors_by_differences(const std::function<Rvec(const Rvec&)>& N, int n) {
  Tensors T;
  T.n = n;
  T.t2.assign(n * n * n, 0.0);
  T.t3.assign(n * n * n * n, 0.0);
  auto d2 = [&](const Rvec& a, const Rvec& b, double h) {
    Rvec p = a + b, m = a - b;
    return Rvec((N(h * p) - N(h * m) - N(-h * m) + N(-h * p)) / (4.0 * h * h));
  };
  auto cube = [&](const Rvec& x, double h) {
    return Rvec((N(2 * h * x) - 2.0 * N(h * x) + 2.0 * N(-h * x) - N(-2 * h * x)) / (2.0 * h * h * h));
  };
  auto d3 = [&](const Rvec& a, const Rvec& b, const Rvec& c, double h) {
    Rvec s = cube(a + b + c, h) - cube(a + b - c, h) - cube(a - b + c, h) + cube(a - b - c, h);
    return Rvec(s / 24.0);
  };
  const double h2 = 1e-4, h3 = 1e-3;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      Rvec ej = Rvec::Unit(n, j), ek = Rvec::Unit(n, k);
      Rvec v = (4.0 * d2(ej, ek, h2 / 2) - d2(ej, ek, h2)) / 3.0;
      for (int i = 0; i < n; ++i) T.t2[(i * n + j) * n + k] = v(i);
      for (int l = 0; l < n; ++l) {
        Rvec el = Rvec::Unit(n, l);
        Rvec w = (4.0 * d3(ej, ek, el, h3 / 2) - d3(ej, ek, el, h3)) / 3.0;
        for (int i = 0; i < n; ++i) T.t3[((i * n + j) * n + k) * n + l] = w(i);
      }
    }
  return T;
}

inline Forms forms_from_tensors(const Tensors& T) {
  Forms f;
  f.Q = {[T](double, double, const Cvec& u, const Cvec& v) -> Cvec {
           const int n = T.n;
           Cvec out = Cvec::Zero(n);
           for (int i = 0; i < n; ++i)
             for (int j = 0; j < n; ++j)
               for (int k = 0; k < n; ++k) out(i) += 0.5 * T.t2[(i * n + j) * n + k] * u(j) * v(k);
           return out;
         },
         true};
  f.C = {[T](double, double, double, const Cvec& u, const Cvec& v, const Cvec& w) -> Cvec {
           const int n = T.n;
           Cvec out = Cvec::Zero(n);
           for (int i = 0; i < n; ++i)
             for (int j = 0; j < n; ++j)
               for (int k = 0; k < n; ++k)
                 for (int l = 0; l < n; ++l)
                   out(i) += T.t3[((i * n + j) * n + k) * n + l] / 6.0 * u(j) * v(k) * w(l);
           return out;
         },
         true};
  return f;
}

}  // namespace detail

// Raw (unsymmetrized) quasilinear multipliers at u*(mu); each slot carries its own frequency.
inline Forms quasilinear_forms_raw(const Quasilinear& ql, int n, double mu) {
  Rvec us = ql.equilibrium(mu);
  std::vector<double> x(n + 1);
  for (int i = 0; i < n; ++i) x[i] = us(i);
  x[n] = mu;
  auto h = ql.h.eval(x.data(), 2);
  auto f = ql.f.eval(x.data(), 3);
  auto g = ql.g.eval(x.data(), 3);
  Forms out;
  out.Q = {[n, h, f, g](double k1, double k2, const Cvec& a, const Cvec& b) -> Cvec {
             const cplx ik1 = I1 * k1, ik2 = I1 * k2;
             Cvec r = Cvec::Zero(n);
             for (int i = 0; i < n; ++i)
               for (int j = 0; j < n; ++j)
                 for (int k = 0; k < n; ++k) {
                   cplx ab = a(j) * b(k);
                   r(i) += (ik1 * ik2 + ik1 * ik1) * h.D1(i * n + j, k) * ab;
                   r(i) += ik1 * f.D2(i, j, k) * ab;
                   r(i) += 0.5 * g.D2(i, j, k) * ab;
                 }
             return r;
           },
           false};
  out.C = {[n, h, f, g](double k1, double k2, double, const Cvec& a, const Cvec& b, const Cvec& c) -> Cvec {
             const cplx ik1 = I1 * k1, ik2 = I1 * k2;
             Cvec r = Cvec::Zero(n);
             for (int i = 0; i < n; ++i)
               for (int j = 0; j < n; ++j)
                 for (int k = 0; k < n; ++k)
                   for (int l = 0; l < n; ++l) {
                     cplx abc = a(j) * b(k) * c(l);
                     r(i) += (ik1 * ik2 + 0.5 * ik1 * ik1) * h.D2(i * n + j, k, l) * abc;
                     r(i) += 0.5 * ik1 * f.D3(i, j, k, l) * abc;
                     r(i) += g.D3(i, j, k, l) / 6.0 * abc;
                   }
             return r;
           },
           false};
  return out;
}

inline void check_quadratic_order(const ModelSpec& m, double mu) {
  if (!m.is_semilinear()) return;
  const auto& sl = std::get<Semilinear>(m.nonlinearity);
  Rvec z = Rvec::Zero(m.n);
  Rvec N0;
  Rmat J0 = Rmat::Zero(m.n, m.n);
  if (sl.poly) {
    std::vector<double> x(m.n + 1, 0.0);
    x[m.n] = mu;
    auto v = sl.poly->eval(x.data(), 1);
    N0 = Eigen::Map<const Rvec>(v.v.data(), m.n);
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j < m.n; ++j) J0(i, j) = v.D1(i, j);
  } else {
    N0 = sl.N(z, mu);
    for (int j = 0; j < m.n; ++j) {
      Rvec e = Rvec::Unit(m.n, j) * 1e-6;
      J0.col(j) = (sl.N(e, mu) - sl.N(-e, mu)) / 2e-6;
    }
  }
  if (N0.norm() > 1e-10 || J0.norm() > 1e-8)
    fail(ErrorCode::NonQuadraticOrder, "N(0) or DN(0) does not vanish");
}

// Quadratic and cubic multipliers of the nonlinearity at the critical point (mu = mu_c).
inline Forms forms_from_model(const ModelSpec& m, const TuringPoint& p, bool symmetrize = true) {
  const double mu = p.mu_c;
  if (m.is_semilinear()) {
    check_quadratic_order(m, mu);
    const auto& sl = std::get<Semilinear>(m.nonlinearity);
    if (sl.poly) {
      std::vector<double> x(m.n + 1, 0.0);
      x[m.n] = mu;
      return detail::forms_from_tensors(detail::tensors_from_jet(*sl.poly, x));
    }
    auto N = [&sl, mu](const Rvec& u) { return sl.N(u, mu); };
    return detail::forms_from_tensors(detail::tensors_by_differences(N, m.n));
  }
  if (m.is_quasilinear()) {
    Forms f = quasilinear_forms_raw(std::get<Quasilinear>(m.nonlinearity), m.n, mu);
    if (symmetrize) {
      f.Q = symmetrized(f.Q);
      f.C = symmetrized(f.C);
    }
    return f;
  }
  const auto& ml = std::get<Multilinear>(m.nonlinearity);
  Forms f{{ml.Q, ml.symmetric}, {ml.C, ml.symmetric}};
  if (symmetrize) {
    f.Q = symmetrized(f.Q);
    f.C = symmetrized(f.C);
  }
  return f;
}

// Semilinear forms extracted by finite differences even when a polynomial is registered.
inline Forms forms_by_differences(const ModelSpec& m, double mu) {
  const auto& sl = std::get<Semilinear>(m.nonlinearity);
  std::function<Rvec(const Rvec&)> N;
  if (sl.poly) {
    N = [&sl, mu, n = m.n](const Rvec& u) {
      std::vector<double> x(n + 1);
      for (int i = 0; i < n; ++i) x[i] = u(i);
      x[n] = mu;
      auto v = sl.poly->eval(x.data(), 0);
      return Rvec(Eigen::Map<const Rvec>(v.v.data(), n));
    };
  } else {
    N = [&sl, mu](const Rvec& u) { return sl.N(u, mu); };
  }
  return detail::forms_from_tensors(detail::tensors_by_differences(N, m.n));
}

}  // namespace cglforge
