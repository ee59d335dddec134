#pragma once

#include <cmath>
#include <sstream>

#include "linalg.hpp"
#include "multilinear.hpp"
#include "turing.hpp"

namespace cglforge {

enum class Criticality { Supercritical, Subcritical };

inline const char* to_string(Criticality c) {
  return c == Criticality::Supercritical ? "supercritical" : "subcritical";
}

struct HarmonicResponses {
  Rvec v0;
  Cvec v2;
  Cmat slave_matrix;  // psi1 = slave_matrix * r * A_X
  Cvec slave_vector;  // slave_matrix * r
};

struct GammaRoutes {
  cplx multiplier;      // multiplier assembly with symmetrized forms
  cplx collected;  // collection of all permutations of the cubic resonance
};

struct CglCoefficients {
  double d_star = 0.0;
  double delta = 0.0;
  cplx diffusion{};  // -1/2 d_k^2 lambda
  cplx growth{};     // d_mu lambda
  cplx curvature{};  // d_k^2 lambda
  cplx gamma{};
  GammaRoutes routes;
  Rvec v0;
  Cvec v2;
  Cmat slave_matrix;
  Cvec slave_vector;
  Criticality criticality = Criticality::Supercritical;
};

struct DispersionPrediction {
  double kappa_tilde = 0.0;
  double mu_tilde = 0.0;
  double amplitude = 0.0;
  double omega = 0.0;
  bool in_band = false;
  bool subcritical = false;
  double band_edge = 0.0;
};

inline std::pair<double, double> phase_and_group(const TuringPoint& p) {
  double d = -p.lambda.imag() / p.k_star;
  double delta = -p.d_lambda_dk.imag() - d;
  return {d, delta};
}

inline Cmat checked_inverse(const Cmat& M, ErrorCode code, const std::string& what) {
  Eigen::JacobiSVD<Cmat> svd(M);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * std::max(1.0, s(0))) fail(code, what + " is singular");
  return M.inverse();
}

inline HarmonicResponses harmonic_responses(const ModelSpec& m, const TuringPoint& p, const QuadraticMultiplier& Q) {
  const Eigen::Index n = m.n;
  const double ks = p.k_star, mu = p.mu_c;
  const double ds = p.d_star();
  const Cvec& r = p.triple.right_vec;
  const Cvec rb = r.conjugate();
  const Cmat Id = Cmat::Identity(n, n);
  Cmat S0inv = checked_inverse(symbol(m, 0.0, mu), ErrorCode::ZeroModeSingular, "S(0, mu_c)");
  Cmat S2inv = checked_inverse(symbol(m, 2.0 * ks, mu) + I1 * (2.0 * ks * ds) * Id, ErrorCode::SecondHarmonicSingular,
                               "S(2k*, mu_c) + 2ik*d*");
  HarmonicResponses h;
  Cvec v0c = -0.25 * S0inv * (Q(ks, -ks, r, rb) + Q(-ks, ks, rb, r));
  double scale = std::max(1.0, v0c.norm());
  if (v0c.imag().norm() > 1e-10 * scale) {
    std::ostringstream os;
    os << "mean-mode response has imaginary part " << v0c.imag().norm();
    fail(ErrorCode::InvalidArgument, os.str() + " (forms violate reality)");
  }
  h.v0 = v0c.real();
  h.v2 = -0.5 * S2inv * Q(ks, ks, r, r);
  ReducedResolvent rr = reduced_resolvent(symbol(m, ks, mu) - p.lambda * Id, p.triple);
  h.slave_matrix = I1 * rr.inverse_on_range * (Id - rr.projector) * symbol_derivative(m, ks, mu, 1, 0);
  h.slave_vector = h.slave_matrix * r;
  return h;
}

// Coefficient of |A|^2 A e^{i xi} collected over all argument placements.
inline cplx gamma_collected(const TuringPoint& p, const QuadraticMultiplier& Q, const CubicMultiplier& C,
                            const HarmonicResponses& h) {
  const double k = p.k_star;
  const Cvec& r = p.triple.right_vec;
  const Cvec rb = r.conjugate();
  const Cvec v0 = h.v0.cast<cplx>();
  Cvec v3 = Q(0.0, k, v0, r) + Q(k, 0.0, r, v0);
  v3 += 0.5 * (Q(2 * k, -k, h.v2, rb) + Q(-k, 2 * k, rb, h.v2));
  v3 += 0.25 * (C(k, k, -k, r, r, rb) + C(k, -k, k, r, rb, r) + C(-k, k, k, rb, r, r));
  return (p.triple.left_vec * v3)(0) / p.triple.normalization;
}

// Closed multiplier formula in terms of B = D^2 N and T = D^3 N.
inline cplx gamma_multiplier(const ModelSpec& m, const TuringPoint& p, const QuadraticMultiplier& Qs,
                        const CubicMultiplier& Cs) {
  const double k = p.k_star, mu = p.mu_c;
  const Eigen::Index n = m.n;
  const Cvec& r = p.triple.right_vec;
  const Cvec rb = r.conjugate();
  auto B = [&](double k1, double k2, const Cvec& u, const Cvec& v) { return Cvec(2.0 * Qs(k1, k2, u, v)); };
  auto T = [&](double k1, double k2, double k3, const Cvec& u, const Cvec& v, const Cvec& w) {
    return Cvec(6.0 * Cs(k1, k2, k3, u, v, w));
  };
  Cmat S0 = symbol(m, 0.0, mu).inverse();
  Cmat S2 = (symbol(m, 2 * k, mu) + I1 * (2 * k * p.d_star()) * Cmat::Identity(n, n)).inverse();
  Cvec mean = (-0.125 * S0 * B(k, -k, r, rb).real().cast<cplx>()).eval();
  Cvec second = (-(1.0 / 16.0) * S2 * B(k, k, r, r)).eval();
  Cvec w = B(0.0, k, mean, r) + B(2 * k, -k, second, rb) + (1.0 / 16.0) * T(k, k, -k, r, r, rb);
  return 2.0 * (p.triple.left_vec * w)(0) / p.triple.normalization;
}

inline GammaRoutes landau_routes(const ModelSpec& m, const TuringPoint& p, const QuadraticMultiplier& Q,
                                 const CubicMultiplier& C) {
  HarmonicResponses h = harmonic_responses(m, p, Q);
  GammaRoutes g;
  g.collected = gamma_collected(p, Q, C, h);
  g.multiplier = gamma_multiplier(m, p, symmetrized(Q), symmetrized(C));
  return g;
}

inline cplx landau_constant(const ModelSpec& m, const TuringPoint& p, const QuadraticMultiplier& Q,
                            const CubicMultiplier& C) {
  GammaRoutes g = landau_routes(m, p, Q, C);
  if (std::abs(g.multiplier - g.collected) > 1e-8 * std::max(1.0, std::abs(g.collected))) {
    std::ostringstream os;
    os << "gamma routes disagree: " << g.multiplier << " vs " << g.collected;
    fail(ErrorCode::RouteMismatch, os.str());
  }
  return g.collected;
}

inline CglCoefficients cgl_coefficients(const ModelSpec& m, const TuringPoint& p, const Forms& forms) {
  CglCoefficients c;
  std::tie(c.d_star, c.delta) = phase_and_group(p);
  c.curvature = p.d2_lambda_dk2;
  c.diffusion = -0.5 * p.d2_lambda_dk2;
  c.growth = p.d_lambda_dmu;
  HarmonicResponses h = harmonic_responses(m, p, forms.Q);
  c.v0 = h.v0;
  c.v2 = h.v2;
  c.slave_matrix = h.slave_matrix;
  c.slave_vector = h.slave_vector;
  c.routes = landau_routes(m, p, forms.Q, forms.C);
  if (std::abs(c.routes.multiplier - c.routes.collected) > 1e-8 * std::max(1.0, std::abs(c.routes.collected)))
    fail(ErrorCode::RouteMismatch, "gamma routes disagree");
  c.gamma = c.routes.collected;
  c.criticality = c.gamma.real() < 0.0 ? Criticality::Supercritical : Criticality::Subcritical;
  return c;
}

inline CglCoefficients cgl_coefficients(const ModelSpec& m, const TuringPoint& p) {
  return cgl_coefficients(m, p, forms_from_model(m, p, false));
}

inline DispersionPrediction dispersion_band(const CglCoefficients& c, double kappa, double mu_tilde) {
  DispersionPrediction d;
  d.kappa_tilde = kappa;
  d.mu_tilde = mu_tilde;
  const double l2r = c.curvature.real(), l2i = c.curvature.imag();
  d.band_edge = 2.0 * c.growth.real() * mu_tilde / std::abs(l2r);
  d.subcritical = c.criticality == Criticality::Subcritical;
  double a2 = (-0.5 * kappa * kappa * l2r - c.growth.real() * mu_tilde) / c.gamma.real();
  if (!d.subcritical && a2 > 0.0) {
    d.in_band = true;
    d.amplitude = std::sqrt(a2);
  }
  double amp2 = d.amplitude * d.amplitude;
  d.omega = 0.5 * l2i * kappa * kappa + c.growth.imag() * mu_tilde + c.gamma.imag() * amp2;
  return d;
}

// Predicted rest-frame temporal frequency of the wave with k = k* + eps kappa.
inline double frequency_expansion(const TuringPoint& p, const CglCoefficients& c, double eps, double kappa,
                                  double mu_tilde) {
  DispersionPrediction d = dispersion_band(c, kappa, mu_tilde);
  return p.lambda.imag() + eps * kappa * p.d_lambda_dk.imag() + eps * eps * d.omega;
}

}  // namespace cglforge
