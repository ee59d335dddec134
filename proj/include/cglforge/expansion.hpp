#pragma once

#include <functional>
#include <map>
#include <tuple>
#include <vector>

#include "amplitude.hpp"

namespace cglforge {

// Slow variable: amplitude index (0 = A, j >= 1 = j-th correction), X-derivative order, conjugation.
// amp = -1 stands for the parameter offset mu_tilde. time = true marks an unresolved T-derivative.
struct SlowVar {
  int amp = 0;
  int deriv = 0;
  bool conj = false;
  bool time = false;
  auto key() const { return std::tie(amp, deriv, conj, time); }
  bool operator<(const SlowVar& o) const { return key() < o.key(); }
  bool operator==(const SlowVar& o) const { return key() == o.key(); }
};

inline SlowVar amp_var(int amp, int deriv = 0, bool conj = false) { return {amp, deriv, conj, false}; }
inline SlowVar mu_var() { return {-1, 0, false, false}; }

using Monomial = std::vector<SlowVar>;  // sorted

inline Monomial make_monomial(std::vector<SlowVar> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial m(a);
  m.insert(m.end(), b.begin(), b.end());
  std::sort(m.begin(), m.end());
  return m;
}

// Polynomial in slow variables with coefficients of type V (cplx or Cvec).
template <class V>
struct SlowPolyT {
  std::map<Monomial, V> terms;

  bool empty() const { return terms.empty(); }
  void add(const Monomial& m, const V& c) {
    auto it = terms.find(m);
    if (it == terms.end())
      terms.emplace(m, c);
    else
      it->second = it->second + c;
  }
  SlowPolyT& operator+=(const SlowPolyT& o) {
    for (const auto& [m, c] : o.terms) add(m, c);
    return *this;
  }
  SlowPolyT scaled(cplx s) const {
    SlowPolyT r;
    for (const auto& [m, c] : terms) r.terms.emplace(m, (s * c));
    return r;
  }
  V coefficient(const Monomial& m, const V& zero) const {
    auto it = terms.find(make_monomial(m));
    return it == terms.end() ? zero : it->second;
  }
};

using SlowPoly = SlowPolyT<Cvec>;
using ScalarPoly = SlowPolyT<cplx>;

namespace expansion_detail {

inline SlowVar conj_var(SlowVar v) {
  if (v.amp >= 0) v.conj = !v.conj;
  return v;
}

template <class V>
V conj_value(const V& c) {
  if constexpr (std::is_same_v<V, cplx>)
    return std::conj(c);
  else
    return c.conjugate();
}

template <class V>
SlowPolyT<V> conj(const SlowPolyT<V>& p) {
  SlowPolyT<V> r;
  for (const auto& [m, c] : p.terms) {
    Monomial mm;
    for (const auto& v : m) mm.push_back(conj_var(v));
    r.add(make_monomial(mm), conj_value(c));
  }
  return r;
}

template <class V>
SlowPolyT<V> dX(const SlowPolyT<V>& p, int times = 1) {
  SlowPolyT<V> cur = p;
  for (int t = 0; t < times; ++t) {
    SlowPolyT<V> r;
    for (const auto& [m, c] : cur.terms)
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i].amp < 0) continue;
        Monomial mm = m;
        mm[i].deriv += 1;
        r.add(make_monomial(mm), c);
      }
    cur = std::move(r);
  }
  return cur;
}

inline SlowPoly times(const ScalarPoly& s, const Monomial& m, const Cvec& c) {
  SlowPoly r;
  for (const auto& [ms, cs] : s.terms) r.add(ms * m, Cvec(cs * c));
  return r;
}

inline ScalarPoly times(const ScalarPoly& s, const Monomial& m, cplx c) {
  ScalarPoly r;
  for (const auto& [ms, cs] : s.terms) r.add(ms * m, cs * c);
  return r;
}

// Right-hand sides A_j,T known so far; an unknown amplitude yields a time-marked variable.
template <class V>
SlowPolyT<V> dT(const SlowPolyT<V>& p, const std::vector<ScalarPoly>& rhs) {
  SlowPolyT<V> r;
  for (const auto& [m, c] : p.terms)
    for (std::size_t i = 0; i < m.size(); ++i) {
      const SlowVar v = m[i];
      if (v.amp < 0) continue;
      if (v.time) fail(ErrorCode::InvalidArgument, "second time derivative in expansion");
      Monomial rest = m;
      rest.erase(rest.begin() + static_cast<long>(i));
      if (v.amp < static_cast<int>(rhs.size())) {
        ScalarPoly s = dX(rhs[v.amp], v.deriv);
        if (v.conj) s = conj(s);
        r += times(s, rest, c);
      } else {
        SlowVar t = v;
        t.time = true;
        r.add(make_monomial(rest * Monomial{t}), c);
      }
    }
  return r;
}

inline SlowPoly apply_matrix(const Cmat& M, const SlowPoly& p) {
  SlowPoly r;
  for (const auto& [m, c] : p.terms) r.terms.emplace(m, Cvec(M * c));
  return r;
}

// Quadratic tensor: slices[i](j, l) = Q(e_j, e_l)_i.
using Tensor2 = std::vector<Cmat>;
using Tensor3 = std::vector<std::vector<Cmat>>;  // [i][j](l, m)

inline SlowPoly bilinear(const Tensor2& T, const SlowPoly& a, const SlowPoly& b) {
  SlowPoly r;
  const int n = static_cast<int>(T.size());
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms) {
      Cvec v(n);
      for (int i = 0; i < n; ++i) v(i) = (ca.transpose() * T[i] * cb)(0);
      r.add(ma * mb, v);
    }
  return r;
}

inline SlowPoly trilinear(const Tensor3& T, const SlowPoly& a, const SlowPoly& b, const SlowPoly& c) {
  SlowPoly r;
  const int n = static_cast<int>(T.size());
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms)
      for (const auto& [mc, cc] : c.terms) {
        Cvec v = Cvec::Zero(n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) v(i) += ca(j) * (cb.transpose() * T[i][j] * cc)(0);
        r.add(ma * mb * mc, v);
      }
  return r;
}

// Five-point central stencils on offsets -2..2.
inline std::array<double, 5> stencil(int order, double h) {
  switch (order) {
    case 0: return {0, 0, 1, 0, 0};
    case 1: return {1 / (12 * h), -8 / (12 * h), 0, 8 / (12 * h), -1 / (12 * h)};
    case 2: {
      double s = 12 * h * h;
      return {-1 / s, 16 / s, -30 / s, 16 / s, -1 / s};
    }
    case 3: {
      double s = 2 * h * h * h;
      return {-1 / s, 2 / s, 0, -2 / s, 1 / s};
    }
    default: fail(ErrorCode::InvalidArgument, "multiplier derivative order above 3");
  }
}

inline double stencil_step(int order) { return order >= 3 ? 1e-2 : 1e-3; }

class FormTensors {
 public:
  FormTensors(const QuadraticMultiplier& Q, const CubicMultiplier& C, int n) : Q_(Q), C_(C), n_(n) {}

  Tensor2 quadratic(double k1, double k2) const {
    Tensor2 T(n_, Cmat::Zero(n_, n_));
    for (int j = 0; j < n_; ++j)
      for (int l = 0; l < n_; ++l) {
        Cvec v = Q_(k1, k2, Cvec::Unit(n_, j), Cvec::Unit(n_, l));
        for (int i = 0; i < n_; ++i) T[i](j, l) = v(i);
      }
    return T;
  }

  Tensor3 cubic(double k1, double k2, double k3) const {
    Tensor3 T(n_, std::vector<Cmat>(n_, Cmat::Zero(n_, n_)));
    for (int j = 0; j < n_; ++j)
      for (int l = 0; l < n_; ++l)
        for (int m = 0; m < n_; ++m) {
          Cvec v = C_(k1, k2, k3, Cvec::Unit(n_, j), Cvec::Unit(n_, l), Cvec::Unit(n_, m));
          for (int i = 0; i < n_; ++i) T[i][j](l, m) = v(i);
        }
    return T;
  }

  // d_1^a d_2^b Q / (a! b!) at (k1, k2).
  const Tensor2& quadratic_taylor(double k1, double k2, int a, int b) {
    auto key = std::make_tuple(k1, k2, a, b);
    auto it = q_cache_.find(key);
    if (it != q_cache_.end()) return it->second;
    Tensor2 T(n_, Cmat::Zero(n_, n_));
    const double ha = stencil_step(a), hb = stencil_step(b);
    const auto wa = stencil(a, ha), wb = stencil(b, hb);
    for (int p = 0; p < 5; ++p) {
      if (wa[p] == 0.0) continue;
      for (int q = 0; q < 5; ++q) {
        if (wb[q] == 0.0) continue;
        Tensor2 S = quadratic(k1 + (p - 2) * ha, k2 + (q - 2) * hb);
        for (int i = 0; i < n_; ++i) T[i] += (wa[p] * wb[q]) * S[i];
      }
    }
    const double f = factorial(a) * factorial(b);
    for (auto& s : T) s /= f;
    return q_cache_.emplace(key, std::move(T)).first->second;
  }

  const Tensor3& cubic_taylor(double k1, double k2, double k3, int a, int b, int c) {
    auto key = std::make_tuple(k1, k2, k3, a, b, c);
    auto it = c_cache_.find(key);
    if (it != c_cache_.end()) return it->second;
    Tensor3 T(n_, std::vector<Cmat>(n_, Cmat::Zero(n_, n_)));
    const double ha = stencil_step(a), hb = stencil_step(b), hc = stencil_step(c);
    const auto wa = stencil(a, ha), wb = stencil(b, hb), wc = stencil(c, hc);
    for (int p = 0; p < 5; ++p)
      for (int q = 0; q < 5; ++q)
        for (int s = 0; s < 5; ++s) {
          double w = wa[p] * wb[q] * wc[s];
          if (w == 0.0) continue;
          Tensor3 S = cubic(k1 + (p - 2) * ha, k2 + (q - 2) * hb, k3 + (s - 2) * hc);
          for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) T[i][j] += w * S[i][j];
        }
    const double f = factorial(a) * factorial(b) * factorial(c);
    for (auto& row : T)
      for (auto& s : row) s /= f;
    return c_cache_.emplace(key, std::move(T)).first->second;
  }

 private:
  static double factorial(int a) {
    double f = 1.0;
    for (int i = 2; i <= a; ++i) f *= i;
    return f;
  }
  const QuadraticMultiplier& Q_;
  const CubicMultiplier& C_;
  int n_;
  std::map<std::tuple<double, double, int, int>, Tensor2> q_cache_;
  std::map<std::tuple<double, double, double, int, int, int>, Tensor3> c_cache_;
};

}  // namespace expansion_detail

// Drops roundoff-level terms, |c| <= tol * scale.
template <class V>
void prune(SlowPolyT<V>& p, double scale, double tol = 1e-12) {
  for (auto it = p.terms.begin(); it != p.terms.end();) {
    double mag;
    if constexpr (std::is_same_v<V, cplx>)
      mag = std::abs(it->second);
    else
      mag = it->second.norm();
    it = mag <= tol * scale ? p.terms.erase(it) : std::next(it);
  }
}

template <class V>
double max_coefficient(const SlowPolyT<V>& p) {
  double mx = 0.0;
  for (const auto& [m, c] : p.terms) {
    if constexpr (std::is_same_v<V, cplx>)
      mx = std::max(mx, std::abs(c));
    else
      mx = std::max(mx, c.norm());
  }
  return mx;
}

struct ExpansionOrderData {
  int order = 0;
  int n = 0;
  // psi[k][eta] for 1 <= k <= order, 0 <= eta <= k: coefficient of eps^k e^{i eta xi};
  // negative harmonics are the conjugates. psi[k][1] includes the kernel part A_{k-1} r / 2.
  std::vector<std::vector<SlowPoly>> psi;
  // amplitude_rhs[j] = right-hand side of the equation for A_j,T (j = 0 is the amplitude equation).
  std::vector<ScalarPoly> amplitude_rhs;

  SlowPoly harmonic(int k, int eta) const {
    if (k < 1 || k > order || std::abs(eta) > k) return {};
    return eta >= 0 ? psi[k][eta] : expansion_detail::conj(psi[k][-eta]);
  }
  Cvec coefficient(int k, int eta, const Monomial& m) const {
    return harmonic(k, eta).coefficient(m, Cvec::Zero(n));
  }
  cplx rhs_coefficient(int j, const Monomial& m) const { return amplitude_rhs.at(j).coefficient(m, cplx(0.0)); }
};

// Evaluates a polynomial given values for every variable.
template <class V>
V evaluate(const SlowPolyT<V>& p, const std::function<cplx(const SlowVar&)>& value, const V& zero) {
  V out = zero;
  for (const auto& [m, c] : p.terms) {
    cplx w = 1.0;
    for (const auto& v : m) w *= value(v);
    out = out + w * c;
  }
  return out;
}

inline ExpansionOrderData higher_order_expand(const ModelSpec& m, const TuringPoint& p, const QuadraticMultiplier& Q,
                                              const CubicMultiplier& C, int order) {
  using namespace expansion_detail;
  if (order < 3 || order > 4) fail(ErrorCode::InvalidArgument, "expansion order must be 3 or 4");
  const int n = m.n;
  const double ks = p.k_star, mu = p.mu_c, ds = p.d_star();
  const double speed = -p.d_lambda_dk.imag();
  const Cvec& r = p.triple.right_vec;
  const Crow& l = p.triple.left_vec;
  const cplx lr = p.triple.normalization;
  const Cmat Id = Cmat::Identity(n, n);
  FormTensors forms(Q, C, n);

  std::vector<Cmat> inverse(order + 1);
  for (int eta = 0; eta <= order; ++eta) {
    if (eta == 1) continue;
    Cmat M = symbol(m, eta * ks, mu) + I1 * (eta * ks * ds) * Id;
    Eigen::JacobiSVD<Cmat> svd(M);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) <= 1e-10 * std::max(1.0, s(0)))
      fail(ErrorCode::ResonantMode, "S(k* eta) + i k* d* eta is singular at eta = " + std::to_string(eta));
    inverse[eta] = M.inverse();
  }
  ReducedResolvent rr = reduced_resolvent(symbol(m, ks, mu) - p.lambda * Id, p.triple);
  const Cmat N1 = rr.inverse_on_range * (Id - rr.projector);

  ExpansionOrderData out;
  out.order = order;
  out.n = n;
  out.psi.assign(order + 1, {});
  for (int k = 1; k <= order; ++k) out.psi[k].assign(k + 1, SlowPoly{});
  out.psi[1][1].add({amp_var(0)}, Cvec(0.5 * r));

  auto power_mi = [](int a) { return std::pow(-I1, a); };

  for (int K = 2; K <= order; ++K) {
    for (int eta = 0; eta <= K; ++eta) {
      SlowPoly F;
      // Linear symbol expanded around eta k*, with the parameter shift eps^2 mu_tilde.
      for (int j = 1; j < K; ++j) {
        SlowPoly base = out.harmonic(j, eta);
        if (base.empty()) continue;
        const int lk = K - j;
        if (lk >= 1) {
          double f = 1.0;
          for (int q = 2; q <= lk; ++q) f *= q;
          F += apply_matrix(symbol_derivative(m, eta * ks, mu, lk, 0) * (power_mi(lk) / f), dX(base, lk));
        }
        const int lm = K - j - 2;
        if (lm >= 0) {
          double f = 1.0;
          for (int q = 2; q <= lm; ++q) f *= q;
          SlowPoly shifted;
          for (const auto& [mm, c] : dX(base, lm).terms) shifted.add(mm * Monomial{mu_var()}, c);
          F += apply_matrix(symbol_derivative(m, eta * ks, mu, lm, 1) * (power_mi(lm) / f), shifted);
        }
      }
      // Time derivative of the co-moving ansatz.
      F += dX(out.harmonic(K - 1, eta)).scaled(speed);
      if (K >= 3) F += dT(out.harmonic(K - 2, eta), out.amplitude_rhs).scaled(-1.0);
      // Quadratic terms.
      for (int j1 = 1; j1 < K; ++j1)
        for (int j2 = 1; j1 + j2 <= K; ++j2)
          for (int e1 = -j1; e1 <= j1; ++e1) {
            const int e2 = eta - e1;
            if (std::abs(e2) > j2) continue;
            SlowPoly P1 = out.harmonic(j1, e1), P2 = out.harmonic(j2, e2);
            if (P1.empty() || P2.empty()) continue;
            const int D = K - j1 - j2;
            for (int a = 0; a <= D; ++a) {
              const int b = D - a;
              const Tensor2& T = forms.quadratic_taylor(e1 * ks, e2 * ks, a, b);
              F += bilinear(T, dX(P1, a).scaled(power_mi(a)), dX(P2, b).scaled(power_mi(b)));
            }
          }
      // Cubic terms.
      for (int j1 = 1; j1 < K; ++j1)
        for (int j2 = 1; j1 + j2 < K; ++j2)
          for (int j3 = 1; j1 + j2 + j3 <= K; ++j3)
            for (int e1 = -j1; e1 <= j1; ++e1)
              for (int e2 = -j2; e2 <= j2; ++e2) {
                const int e3 = eta - e1 - e2;
                if (std::abs(e3) > j3) continue;
                SlowPoly P1 = out.harmonic(j1, e1), P2 = out.harmonic(j2, e2), P3 = out.harmonic(j3, e3);
                if (P1.empty() || P2.empty() || P3.empty()) continue;
                const int D = K - j1 - j2 - j3;
                for (int a = 0; a <= D; ++a)
                  for (int b = 0; a + b <= D; ++b) {
                    const int c = D - a - b;
                    const Tensor3& T = forms.cubic_taylor(e1 * ks, e2 * ks, e3 * ks, a, b, c);
                    F += trilinear(T, dX(P1, a).scaled(power_mi(a)), dX(P2, b).scaled(power_mi(b)),
                                   dX(P3, c).scaled(power_mi(c)));
                  }
              }

      if (eta != 1) {
        for (const auto& [mm, c] : F.terms)
          for (const auto& v : mm)
            if (v.time) fail(ErrorCode::InvalidArgument, "unresolved time derivative off the critical harmonic");
        out.psi[K][eta] = apply_matrix(-inverse[eta], F);
        continue;
      }
      // Solvability on the critical harmonic.
      ScalarPoly s;
      SlowPoly Fr;
      const SlowVar unknown{K - 3, 0, false, true};
      cplx unknown_coef = 0.0;
      for (const auto& [mm, c] : F.terms) {
        bool has_time = false;
        for (const auto& v : mm) has_time |= v.time;
        cplx proj = (l * c)(0) / lr;
        if (has_time) {
          if (mm.size() != 1 || !(mm[0] == unknown) || (c - proj * r).norm() > 1e-10 * std::max(1.0, c.norm()))
            fail(ErrorCode::InvalidArgument, "unexpected time-derivative structure in solvability condition");
          unknown_coef = proj;
          continue;
        }
        s.add(mm, proj);
        Fr.add(mm, c);
      }
      if (K == 2) {
        for (const auto& [mm, c] : s.terms)
          if (std::abs(c) > 1e-8)
            fail(ErrorCode::InvalidArgument, "group-speed solvability condition violated");
      } else {
        if (std::abs(unknown_coef + 0.5) > 1e-10)
          fail(ErrorCode::InvalidArgument, "unexpected coefficient of the amplitude time derivative");
        out.amplitude_rhs.push_back(s.scaled(-1.0 / unknown_coef));
      }
      SlowPoly range = apply_matrix(-N1, Fr);
      if (K - 1 >= 1) range.add({amp_var(K - 1)}, Cvec(0.5 * r));
      out.psi[K][1] = range;
    }
    double scale = 0.0;
    for (const auto& poly : out.psi[K]) scale = std::max(scale, max_coefficient(poly));
    for (auto& poly : out.psi[K]) prune(poly, scale);
    if (K >= 3) prune(out.amplitude_rhs.back(), max_coefficient(out.amplitude_rhs.back()));
  }
  return out;
}

inline ExpansionOrderData higher_order_expand(const ModelSpec& m, const TuringPoint& p, int order) {
  Forms f = forms_from_model(m, p, false);
  return higher_order_expand(m, p, f.Q, f.C, order);
}

}  // namespace cglforge
