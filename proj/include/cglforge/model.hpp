#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "polynomial.hpp"
#include "types.hpp"

namespace cglforge {

using MatrixFn = std::function<Rmat(double mu)>;
using SymbolFn = std::function<Cmat(double k, double mu)>;

// L(mu) = sum_j L_j(mu) d_x^j
struct LocalLinear {
  std::vector<MatrixFn> L;
  std::vector<MatrixFn> dL_dmu;  // optional analytic mu-derivatives
};

// Nonlocal multiplier with declared derivatives and ellipticity S(k) ~ |k|^s * leading(mu).
struct NonlocalLinear {
  SymbolFn symbol;
  SymbolFn dk, dk2, dmu;
  double ellipticity_order = 2.0;
  MatrixFn leading;
};

// u_t = L u + N(u), N(0) = DN(0) = 0; state is the perturbation U.
struct Semilinear {
  std::function<Rvec(const Rvec& U, double mu)> N;
  std::function<Rmat(const Rvec& U, double mu)> jacobian;  // optional
  std::optional<PolyJet> poly;                                // optional: components in (U, mu)
};

// u_t = (h(u) u_x)_x + f(u)_x + g(u) with equilibrium u*(mu).
// h has n*n row-major components; all are polynomials in (u, mu).
struct Quasilinear {
  PolyJet h, f, g;
  std::function<Rvec(double mu)> equilibrium;
};

using QuadFn = std::function<Cvec(double k1, double k2, const Cvec& u, const Cvec& v)>;
using CubicFn = std::function<Cvec(double k1, double k2, double k3, const Cvec& u, const Cvec& v, const Cvec& w)>;

// N(U) = Q(U,U) + C(U,U,U) given through its Fourier multipliers.
// When `filter` and `pointwise` are set the multipliers factor as filter(k1+..+kp) times
// the frequency-independent forms of `pointwise`, which enables pseudospectral evaluation.
struct Multilinear {
  QuadFn Q;
  CubicFn C;
  bool symmetric = true;
  std::function<cplx(double k)> filter;
  std::optional<PolyJet> pointwise;
};

// Semilinear nonlinearity given by polynomials in (U, mu); N and its Jacobian are evaluated from the jet.
inline Semilinear semilinear_from_poly(const PolyJet& jet) {
  Semilinear sl;
  sl.poly = jet;
  const int n = jet.n();
  sl.N = [jet, n](const Rvec& U, double mu) {
    std::vector<double> x(n + 1);
    for (int i = 0; i < n; ++i) x[i] = U(i);
    x[n] = mu;
    auto v = jet.eval(x.data(), 0);
    return Rvec(Eigen::Map<const Rvec>(v.v.data(), n));
  };
  sl.jacobian = [jet, n](const Rvec& U, double mu) {
    std::vector<double> x(n + 1);
    for (int i = 0; i < n; ++i) x[i] = U(i);
    x[n] = mu;
    auto v = jet.eval(x.data(), 1);
    Rmat J(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) J(i, j) = v.D1(i, j);
    return J;
  };
  return sl;
}

struct ModelSpec {
  std::string name;
  int n = 0;
  std::string parameter_name = "mu";
  std::variant<LocalLinear, NonlocalLinear> linear;
  std::variant<Semilinear, Quasilinear, Multilinear> nonlinearity;

  bool is_local() const { return std::holds_alternative<LocalLinear>(linear); }
  const LocalLinear& local() const {
    if (!is_local()) fail(ErrorCode::NonlocalUnsupported, "model has a nonlocal linear part");
    return std::get<LocalLinear>(linear);
  }
  int order() const {
    if (is_local()) return static_cast<int>(std::get<LocalLinear>(linear).L.size()) - 1;
    return static_cast<int>(std::ceil(std::get<NonlocalLinear>(linear).ellipticity_order - 1e-12));
  }
  double ellipticity_order() const {
    if (is_local()) return order();
    return std::get<NonlocalLinear>(linear).ellipticity_order;
  }
  bool is_semilinear() const { return std::holds_alternative<Semilinear>(nonlinearity); }
  bool is_quasilinear() const { return std::holds_alternative<Quasilinear>(nonlinearity); }
  bool is_multilinear() const { return std::holds_alternative<Multilinear>(nonlinearity); }
};

struct SymbolValue {
  double k = 0.0;
  double mu = 0.0;
  Cmat matrix;
};

inline double mu_step(double mu) { return 1e-6 * std::max(1.0, std::abs(mu)); }

inline Rmat local_coefficient(const LocalLinear& lin, int j, double mu) { return lin.L[j](mu); }

inline Rmat local_coefficient_dmu(const LocalLinear& lin, int j, double mu) {
  if (!lin.dL_dmu.empty() && lin.dL_dmu[j]) return lin.dL_dmu[j](mu);
  double h = mu_step(mu);
  return (lin.L[j](mu + h) - lin.L[j](mu - h)) / (2.0 * h);
}

inline Cmat call_symbol(const SymbolFn& fn, double k, double mu, const char* what) {
  if (!fn) fail(ErrorCode::MissingDerivativeCallback, what);
  try {
    return fn(k, mu);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::CallbackFailure, std::string(what) + ": " + e.what());
  }
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// d_k^dk d_mu^dmu S(k, mu). Local models accept any dk; nonlocal ones use declared callbacks.
inline Cmat symbol_derivative(const ModelSpec& m, double k, double mu, int dk, int dmu) {
  if (dk < 0 || dmu < 0 || dmu > 1) fail(ErrorCode::InvalidArgument, "unsupported derivative order");
  if (m.is_local()) {
    const auto& lin = std::get<LocalLinear>(m.linear);
    const int order = static_cast<int>(lin.L.size()) - 1;
    Cmat S = Cmat::Zero(m.n, m.n);
    const cplx ik = I1 * k;
    for (int j = dk; j <= order; ++j) {
      Rmat Lj = dmu ? local_coefficient_dmu(lin, j, mu) : local_coefficient(lin, j, mu);
      cplx c = binomial(j, dk) * std::pow(I1, dk) * (j - dk == 0 ? cplx(1.0) : std::pow(ik, j - dk));
      // d^dk/dk^dk of (ik)^j = j!/(j-dk)! i^dk (ik)^(j-dk); binomial carries j!/(dk!(j-dk)!)
      double fact = 1.0;
      for (int q = 2; q <= dk; ++q) fact *= q;
      S += (c * fact) * Lj.cast<cplx>();
    }
    return S;
  }
  const auto& nl = std::get<NonlocalLinear>(m.linear);
  if (dk == 0 && dmu == 0) return call_symbol(nl.symbol, k, mu, "symbol");
  if (dk == 1 && dmu == 0) return call_symbol(nl.dk, k, mu, "d_k symbol callback");
  if (dk == 2 && dmu == 0) return call_symbol(nl.dk2, k, mu, "d_k^2 symbol callback");
  if (dk == 0 && dmu == 1) return call_symbol(nl.dmu, k, mu, "d_mu symbol callback");
  fail(ErrorCode::MissingDerivativeCallback, "derivative (" + std::to_string(dk) + "," + std::to_string(dmu) +
                                                 ") not declared for nonlocal model");
}

inline Cmat symbol(const ModelSpec& m, double k, double mu) { return symbol_derivative(m, k, mu, 0, 0); }

inline SymbolValue assemble_symbol(const ModelSpec& m, double k, double mu) { return {k, mu, symbol(m, k, mu)}; }

// S~(eta) = sum_j i^j eta^(m-j) L_j, so that S(k) = k^m S~(1/k).
inline Cmat tail_symbol(const ModelSpec& m, double eta, double mu) {
  if (!m.is_local()) fail(ErrorCode::NonlocalUnsupported, "tail_symbol needs a local model");
  const auto& lin = std::get<LocalLinear>(m.linear);
  const int order = static_cast<int>(lin.L.size()) - 1;
  Cmat S = Cmat::Zero(m.n, m.n);
  for (int j = 0; j <= order; ++j) S += (std::pow(I1, j) * std::pow(eta, order - j)) * lin.L[j](mu).cast<cplx>();
  return S;
}

}  // namespace cglforge
