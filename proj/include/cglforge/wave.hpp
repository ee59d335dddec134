#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "amplitude.hpp"
#include "parallel.hpp"
#include "spectral.hpp"

namespace cglforge {

struct WaveSolution {
  Cmat modes;  // n x (N+1), eta = 0..N; U(-eta) = conj U(eta)
  double k = 0.0;
  double d = 0.0;
  double epsilon = 0.0;
  double mu = 0.0;        // absolute parameter value mu_c + eps^2 mu_tilde
  double mu_tilde = 0.0;
  double kappa_tilde = 0.0;
  double residual_norm = 0.0;
  cplx alpha_measured{};
  double Omega_measured = 0.0;
  int iterations = 0;
  double jacobian_fd_error = -1.0;  // filled in debug mode
};

struct WaveOptions {
  int N_trunc = 32;
  double tol = 1e-11;
  int max_iter = 25;
  bool debug_jacobian = false;
  bool check_collapse = true;
  bool check_tail = true;
};

namespace wave_detail {

inline int grid_size(int N) { return next_pow2(3 * (2 * N + 1)); }
inline int unknowns(int n, int N) { return n + 2 * n * N + 1; }

inline Rvec pack(const Cmat& modes, double d) {
  const int n = static_cast<int>(modes.rows()), N = static_cast<int>(modes.cols()) - 1;
  Rvec x(unknowns(n, N));
  for (int i = 0; i < n; ++i) x(i) = modes(i, 0).real();
  for (int e = 1; e <= N; ++e)
    for (int i = 0; i < n; ++i) {
      x(n + 2 * n * (e - 1) + i) = modes(i, e).real();
      x(n + 2 * n * (e - 1) + n + i) = modes(i, e).imag();
    }
  x(x.size() - 1) = d;
  return x;
}

inline void unpack(const Rvec& x, int n, int N, Cmat& modes, double& d) {
  modes = Cmat::Zero(n, N + 1);
  for (int i = 0; i < n; ++i) modes(i, 0) = x(i);
  for (int e = 1; e <= N; ++e)
    for (int i = 0; i < n; ++i)
      modes(i, e) = cplx(x(n + 2 * n * (e - 1) + i), x(n + 2 * n * (e - 1) + n + i));
  d = x(x.size() - 1);
}

// Steady traveling-wave problem S(eta k) U + i eta k d U + N(U) = 0, gauge Im(l U(1)) = 0.
class WaveProblem {
 public:
  WaveProblem(const ModelSpec& m, const TuringPoint& p, double k, double mu, int N)
      : m_(m), p_(p), k_(k), mu_(mu), N_(N), G_(grid_size(N)), sp_(G_), op_(m, mu, k) {
    S_.resize(N + 1);
    for (int e = 0; e <= N; ++e) S_[e] = symbol(m, e * k, mu);
  }

  int n() const { return m_.n; }
  int N() const { return N_; }

  Cmat nonlinear(const Cmat& modes) {
    Cmat full = full_from_half(modes, G_);
    return half_from_full(op_.apply(full, sp_), N_);
  }

  Cmat residual_modes(const Cmat& modes, double d) {
    Cmat R = nonlinear(modes);
    for (int e = 0; e <= N_; ++e) R.col(e) += S_[e] * modes.col(e) + I1 * (e * k_ * d) * modes.col(e);
    return R;
  }

  Rvec residual(const Rvec& x) {
    const int n = m_.n;
    Cmat modes;
    double d;
    unpack(x, n, N_, modes, d);
    Cmat R = residual_modes(modes, d);
    Rvec F(x.size());
    for (int i = 0; i < n; ++i) F(i) = R(i, 0).real();
    for (int e = 1; e <= N_; ++e)
      for (int i = 0; i < n; ++i) {
        F(n + 2 * n * (e - 1) + i) = R(i, e).real();
        F(n + 2 * n * (e - 1) + n + i) = R(i, e).imag();
      }
    F(F.size() - 1) = (p_.triple.left_vec * modes.col(1))(0).imag();
    return F;
  }

  // Scale of the linear part, used to make the residual relative.
  double linear_scale(const Rvec& x) {
    Cmat modes;
    double d;
    unpack(x, m_.n, N_, modes, d);
    double s = 0.0;
    for (int e = 0; e <= N_; ++e) s += (S_[e] * modes.col(e)).squaredNorm();
    return std::sqrt(s);
  }

  // Fourier-space Jacobian of N, rows eta = 0..N, cols eta' = -N..N.
  Cmat nonlinear_jacobian(const Cmat& modes) { return op_.fourier_jacobian(modes, sp_); }

  Rmat jacobian(const Rvec& x) {
    const int n = m_.n;
    Cmat modes;
    double d;
    unpack(x, n, N_, modes, d);
    Cmat JN = nonlinear_jacobian(modes);
    const int nu = static_cast<int>(x.size());
    Rmat J = Rmat::Zero(nu, nu);
    auto rowoff = [&](int e) { return e == 0 ? 0 : n + 2 * n * (e - 1); };
    for (int e = 0; e <= N_; ++e) {
      const int ro = rowoff(e);
      const int nrow = e == 0 ? n : 2 * n;
      for (int ep = 0; ep <= N_; ++ep) {
        Cmat A = JN.block(e * n, (ep + N_) * n, n, n);
        if (ep == e) A += S_[e] + I1 * (e * k_ * d) * Cmat::Identity(n, n);
        const int co = rowoff(ep);
        if (ep == 0) {
          J.block(ro, co, n, n) = A.real();
          if (e > 0) J.block(ro + n, co, n, n) = A.imag();
          continue;
        }
        Cmat K = JN.block(e * n, (N_ - ep) * n, n, n);
        Cmat X = A + K, Y = I1 * (A - K);
        J.block(ro, co, n, n) = X.real();
        J.block(ro, co + n, n, n) = Y.real();
        if (e > 0) {
          J.block(ro + n, co, n, n) = X.imag();
          J.block(ro + n, co + n, n, n) = Y.imag();
        }
      }
      Cvec dcol = I1 * (e * k_) * modes.col(e);
      J.block(ro, nu - 1, n, 1) = dcol.real();
      if (nrow == 2 * n) J.block(ro + n, nu - 1, n, 1) = dcol.imag();
    }
    const Crow& l = p_.triple.left_vec;
    for (int i = 0; i < n; ++i) {
      J(nu - 1, rowoff(1) + i) = l(i).imag();
      J(nu - 1, rowoff(1) + n + i) = l(i).real();
    }
    return J;
  }

 private:
  const ModelSpec& m_;
  const TuringPoint& p_;
  double k_, mu_;
  int N_, G_;
  Spectral sp_;
  NonlinearOperator op_;
  std::vector<Cmat> S_;
};

inline double fd_jacobian_error(WaveProblem& prob, const Rvec& x, const Rmat& J, int directions, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int t = 0; t < directions; ++t) {
    Rvec v(x.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = nd(rng);
    v /= v.norm();
    double h = 1e-6 * std::max(1.0, x.norm());
    Rvec fd = (prob.residual(x + h * v) - prob.residual(x - h * v)) / (2.0 * h);
    Rvec jv = J * v;
    worst = std::max(worst, (fd - jv).norm() / std::max(1e-300, jv.norm()));
  }
  return worst;
}

}  // namespace wave_detail

inline double mode_energy(const Cmat& modes) {
  double s = modes.col(0).squaredNorm();
  for (Eigen::Index e = 1; e < modes.cols(); ++e) s += 2.0 * modes.col(e).squaredNorm();
  return s;
}

inline void finalize_gauge(WaveSolution& w, const TuringPoint& p) {
  cplx a = (p.triple.left_vec * w.modes.col(1))(0);
  if (a.real() < 0.0)
    for (Eigen::Index e = 1; e < w.modes.cols(); e += 2) w.modes.col(e) *= -1.0;
  a = (p.triple.left_vec * w.modes.col(1))(0);
  w.alpha_measured = w.epsilon > 0.0 ? 2.0 * a / w.epsilon : cplx(0.0);
  w.Omega_measured = -w.d * w.k;
}

// Initial guess from the amplitude equation including the order eps^2 harmonics.
inline Cmat wave_predictor(const ModelSpec& m, const TuringPoint& p, const CglCoefficients& c, double eps,
                           double kappa, double mu_tilde, int N, double* d_out) {
  DispersionPrediction dp = dispersion_band(c, kappa, mu_tilde);
  const double alpha = dp.amplitude;
  Cmat modes = Cmat::Zero(m.n, N + 1);
  const Cvec& r = p.triple.right_vec;
  modes.col(0) = (eps * eps * alpha * alpha) * c.v0.cast<cplx>();
  modes.col(1) = 0.5 * eps * alpha * r + 0.5 * eps * eps * (I1 * kappa * alpha) * c.slave_vector;
  if (N >= 2) modes.col(2) = 0.5 * eps * eps * alpha * alpha * c.v2;
  const double k = p.k_star + eps * kappa;
  if (d_out) *d_out = -frequency_expansion(p, c, eps, kappa, mu_tilde) / k;
  return modes;
}

inline WaveSolution newton_from(const ModelSpec& m, const TuringPoint& p, double eps, double kappa, double mu_tilde,
                                Cmat modes, double d, const WaveOptions& opt) {
  using namespace wave_detail;
  const int n = m.n, N = opt.N_trunc;
  WaveSolution w;
  w.epsilon = eps;
  w.kappa_tilde = kappa;
  w.mu_tilde = mu_tilde;
  w.k = p.k_star + eps * kappa;
  w.mu = p.mu_c + eps * eps * mu_tilde;
  if (modes.cols() != N + 1) {
    Cmat t = Cmat::Zero(n, N + 1);
    const Eigen::Index c = std::min<Eigen::Index>(modes.cols(), N + 1);
    t.leftCols(c) = modes.leftCols(c);
    modes = t;
  }
  if (eps == 0.0) {
    w.modes = Cmat::Zero(n, N + 1);
    w.d = p.d_star();
    w.Omega_measured = -w.d * w.k;
    return w;
  }
  WaveProblem prob(m, p, w.k, w.mu, N);
  Rvec x = pack(modes, d);
  Rvec F = prob.residual(x);
  auto rel = [&](const Rvec& xx, const Rvec& FF) { return FF.norm() / std::max(1e-300, prob.linear_scale(xx)); };
  double res = rel(x, F);
  int it = 0;
  for (; it < opt.max_iter && !(res <= opt.tol); ++it) {
    Rmat J = prob.jacobian(x);
    if (it == 0 && opt.debug_jacobian) w.jacobian_fd_error = fd_jacobian_error(prob, x, J, 10, 12345u);
    Rvec dx = J.fullPivLu().solve(-F);
    if (!dx.allFinite()) fail(ErrorCode::NoConvergence, "singular Newton system");
    Rvec xn = x + dx;
    Rvec Fn = prob.residual(xn);
    if (!(Fn.norm() <= (1.0 - 1e-4) * F.norm())) {
      Rvec xh = x + 0.5 * dx;
      Rvec Fh = prob.residual(xh);
      if (Fh.norm() < Fn.norm()) {
        xn = xh;
        Fn = Fh;
      }
    }
    x = xn;
    F = Fn;
    res = rel(x, F);
    unpack(x, n, N, modes, d);
    double unorm = std::sqrt(mode_energy(modes));
    if (opt.check_collapse && unorm < eps * eps * eps) {
      std::ostringstream os;
      os << "iterate norm " << unorm << " below eps^3 after " << it + 1 << " steps";
      fail(ErrorCode::CollapseToZero, os.str());
    }
    if (!x.allFinite()) fail(ErrorCode::NoConvergence, "Newton iterate is not finite");
  }
  if (!(res <= opt.tol)) {
    std::ostringstream os;
    os << "relative residual " << res << " after " << it << " Newton steps";
    fail(ErrorCode::NoConvergence, os.str());
  }
  unpack(x, n, N, modes, d);
  double unorm = std::sqrt(mode_energy(modes));
  if (opt.check_collapse && unorm < eps * eps * eps) fail(ErrorCode::CollapseToZero, "converged to the trivial branch");
  if (opt.check_tail) {
    double tail = 0.0;
    for (int e = N / 2 + 1; e <= N; ++e) tail += 2.0 * modes.col(e).squaredNorm();
    if (tail > 1e-20 * mode_energy(modes)) {
      std::ostringstream os;
      os << "tail energy fraction " << tail / mode_energy(modes);
      fail(ErrorCode::TruncationInsufficient, os.str());
    }
  }
  w.modes = modes;
  w.d = d;
  w.residual_norm = res;
  w.iterations = it;
  finalize_gauge(w, p);
  return w;
}

inline WaveSolution newton_wave(const ModelSpec& m, const TuringPoint& p, const CglCoefficients& c, double eps,
                                double kappa, double mu_tilde, const WaveOptions& opt = {}) {
  if (opt.N_trunc < 16) fail(ErrorCode::InvalidArgument, "N_trunc must be at least 16");
  double d = 0.0;
  Cmat modes = wave_predictor(m, p, c, eps, kappa, mu_tilde, opt.N_trunc, &d);
  return newton_from(m, p, eps, kappa, mu_tilde, modes, d, opt);
}

// ---------------------------------------------------------------------------

struct BranchData {
  std::vector<WaveSolution> points;
  double kappa_tilde = 0.0;
  double mu_tilde = 0.0;
  // linear data of the critical point carried for the fit
  cplx lambda{}, d_lambda_dk{}, curvature{}, growth{};
  cplx gamma_LS{};
  std::vector<cplx> gamma_per_point;
  double observed_order = 0.0;
  double fit_residual = 0.0;
};

inline BranchData continue_branch(const ModelSpec& m, const TuringPoint& p, const CglCoefficients& c,
                                  const std::vector<double>& eps_list, double kappa, double mu_tilde,
                                  const WaveOptions& opt = {}) {
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] > eps_list[i - 1])) fail(ErrorCode::InvalidArgument, "epsilon list must be ascending");
  BranchData b;
  b.kappa_tilde = kappa;
  b.mu_tilde = mu_tilde;
  b.lambda = p.lambda;
  b.d_lambda_dk = p.d_lambda_dk;
  b.curvature = c.curvature;
  b.growth = c.growth;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double eps = eps_list[i];
    try {
      if (i == 0) {
        b.points.push_back(newton_wave(m, p, c, eps, kappa, mu_tilde, opt));
      } else {
        const WaveSolution& prev = b.points.back();
        double ratio = eps / prev.epsilon;
        Cmat modes = prev.modes;
        modes.col(0) *= ratio * ratio;
        for (Eigen::Index e = 1; e < modes.cols(); ++e) modes.col(e) *= std::pow(ratio, static_cast<double>(e));
        b.points.push_back(newton_from(m, p, eps, kappa, mu_tilde, modes, prev.d, opt));
      }
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " (at eps=" << eps << ")";
      throw Error(e.code(), os.str());
    }
  }
  return b;
}

// Landau constant implied by a measured branch point.
inline cplx gamma_from_point(const BranchData& b, const WaveSolution& w) {
  const double a2 = std::norm(w.alpha_measured);
  const double kap = b.kappa_tilde, mt = b.mu_tilde, eps = w.epsilon;
  double re = (-0.5 * kap * kap * b.curvature.real() - b.growth.real() * mt) / a2;
  double omega = (w.Omega_measured - b.lambda.imag() - eps * kap * b.d_lambda_dk.imag()) / (eps * eps);
  double im = (omega - 0.5 * b.curvature.imag() * kap * kap - b.growth.imag() * mt) / a2;
  return {re, im};
}

// Polynomial extrapolation in eps of the per-point Landau constants (degree = points - 1, at most 2).
inline cplx fit_landau(BranchData& b, double mu_tilde) {
  b.mu_tilde = mu_tilde;
  const std::size_t np = b.points.size();
  if (np < 3) fail(ErrorCode::InvalidArgument, "fit_landau needs at least three branch points");
  double amin = 1e300, amax = 0.0;
  for (const auto& w : b.points) {
    amin = std::min(amin, std::abs(w.alpha_measured));
    amax = std::max(amax, std::abs(w.alpha_measured));
  }
  if (amax - amin < 1e-6 * std::max(1.0, amax)) fail(ErrorCode::FitIllConditioned, "branch amplitudes do not vary");
  b.gamma_per_point.clear();
  for (const auto& w : b.points) b.gamma_per_point.push_back(gamma_from_point(b, w));
  const int deg = 2;
  Rmat V(np, deg + 1);
  Cvec y(np);
  for (std::size_t i = 0; i < np; ++i) {
    double e = b.points[i].epsilon;
    for (int j = 0; j <= deg; ++j) V(i, j) = std::pow(e, j);
    y(i) = b.gamma_per_point[i];
  }
  Cmat Vc = V.cast<cplx>();
  Cvec coef = Vc.colPivHouseholderQr().solve(y);
  b.gamma_LS = coef(0);
  b.fit_residual = (Vc * coef - y).norm();
  if (np >= 3) {
    cplx d1 = b.gamma_per_point[np - 1] - b.gamma_per_point[np - 2];
    cplx d0 = b.gamma_per_point[np - 2] - b.gamma_per_point[np - 3];
    double ratio = b.points[np - 1].epsilon / b.points[np - 2].epsilon;
    b.observed_order = std::log(std::abs(d1) / std::abs(d0)) / std::log(ratio);
  }
  return b.gamma_LS;
}

// ---------------------------------------------------------------------------

enum class ProbeOutcome { CollapseToZero, ExitedBall, ConvergedNontrivial, NoConvergence, OtherError };

inline const char* to_string(ProbeOutcome o) {
  switch (o) {
    case ProbeOutcome::CollapseToZero: return "collapse-to-zero";
    case ProbeOutcome::ExitedBall: return "exited-small-ball";
    case ProbeOutcome::ConvergedNontrivial: return "THEOREM-CONTRADICTION";
    case ProbeOutcome::NoConvergence: return "no-convergence";
    case ProbeOutcome::OtherError: return "error";
  }
  return "?";
}

struct ProbeStart {
  double initial_norm = 0.0;
  double final_norm = 0.0;
  ProbeOutcome outcome = ProbeOutcome::OtherError;
  std::string detail;
};

struct ProbeReport {
  double epsilon = 0.0;
  double kappa_tilde = 0.0;
  double band_edge = 0.0;
  std::vector<ProbeStart> starts;
  bool pass = false;
  bool contradiction = false;
};

inline ProbeReport nonexistence_probe(const ModelSpec& m, const TuringPoint& p, const CglCoefficients& c, double eps,
                                      double kappa, double mu_tilde, int N, int n_starts, unsigned seed,
                                      int threads = 0) {
  ProbeReport rep;
  rep.epsilon = eps;
  rep.kappa_tilde = kappa;
  rep.band_edge = dispersion_band(c, 0.0, mu_tilde).band_edge;
  rep.starts.resize(n_starts);
  if (eps == 0.0) {
    for (auto& s : rep.starts) s.outcome = ProbeOutcome::CollapseToZero;
    rep.pass = true;
    return rep;
  }
  const double scale = dispersion_band(c, 0.0, mu_tilde).amplitude;
  const double ball = std::sqrt(eps);
  std::vector<unsigned> seeds(n_starts);
  std::mt19937 master(seed);
  for (auto& s : seeds) s = master();
  parallel_for(static_cast<std::size_t>(n_starts), [&](std::size_t i) {
    std::mt19937_64 rng(seeds[i]);
    std::uniform_real_distribution<double> U(-1.0, 1.0), R(0.1, 1.0);
    Cmat modes = Cmat::Zero(m.n, N + 1);
    for (int e = 0; e <= 3; ++e)
      for (int j = 0; j < m.n; ++j) modes(j, e) = e == 0 ? cplx(U(rng), 0.0) : cplx(U(rng), U(rng));
    double target = R(rng) * 2.0 * eps * std::max(scale, 1e-3);
    modes *= target / std::sqrt(mode_energy(modes));
    ProbeStart& st = rep.starts[i];
    st.initial_norm = target;
    WaveOptions opt;
    opt.N_trunc = N;
    opt.check_tail = false;
    try {
      WaveSolution w = newton_from(m, p, eps, kappa, mu_tilde, modes, p.d_star(), opt);
      st.final_norm = std::sqrt(mode_energy(w.modes));
      if (st.final_norm > ball) {
        st.outcome = ProbeOutcome::ExitedBall;
      } else {
        st.outcome = ProbeOutcome::ConvergedNontrivial;
        st.detail = "converged to a small nontrivial solution; needs human review";
      }
    } catch (const Error& e) {
      st.detail = e.what();
      if (e.code() == ErrorCode::CollapseToZero)
        st.outcome = ProbeOutcome::CollapseToZero;
      else if (e.code() == ErrorCode::NoConvergence)
        st.outcome = ProbeOutcome::NoConvergence;
      else
        st.outcome = ProbeOutcome::OtherError;
    }
  }, threads);
  rep.pass = true;
  for (const auto& s : rep.starts) {
    if (s.outcome == ProbeOutcome::ConvergedNontrivial) rep.contradiction = true;
    if (s.outcome != ProbeOutcome::CollapseToZero && s.outcome != ProbeOutcome::ExitedBall) rep.pass = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct ModeProjections {
  double P = 0.0;  // 2 |Pi U(1)|
  double Q = 0.0;  // 2 |(I - Pi) U(1)|
  double R = 0.0;  // all other modes
  double P_over_eps = 0.0;
  double Q_over_P2 = 0.0;
  double R_over_P2 = 0.0;
  double second_harmonic_deviation = 0.0;  // relative to 1/2 eps^2 alpha^2 v2
};

inline ModeProjections mode_projections(const ModelSpec&, const TuringPoint& p, const CglCoefficients& c,
                                        const WaveSolution& w) {
  ModeProjections mp;
  const Cmat Pi = p.triple.projector();
  Cvec u1 = w.modes.col(1);
  Cvec pu = Pi * u1;
  mp.P = 2.0 * pu.norm();
  mp.Q = 2.0 * (u1 - pu).norm();
  double r2 = w.modes.col(0).squaredNorm();
  for (Eigen::Index e = 2; e < w.modes.cols(); ++e) r2 += 4.0 * w.modes.col(e).squaredNorm();
  mp.R = std::sqrt(r2);
  mp.P_over_eps = w.epsilon > 0 ? mp.P / w.epsilon : 0.0;
  mp.Q_over_P2 = mp.P > 0 ? mp.Q / (mp.P * mp.P) : 0.0;
  mp.R_over_P2 = mp.P > 0 ? mp.R / (mp.P * mp.P) : 0.0;
  if (w.modes.cols() > 2 && w.epsilon > 0) {
    cplx a = w.alpha_measured;
    Cvec pred = 0.5 * w.epsilon * w.epsilon * a * a * c.v2;
    mp.second_harmonic_deviation = (w.modes.col(2) - pred).norm() / std::max(1e-300, pred.norm());
  }
  return mp;
}

// Frechet derivative of the nonlinear term against central differences, along random
// conjugate-symmetric directions at the given state. Returns the worst relative error.
inline double jacobian_audit(const ModelSpec& m, const TuringPoint& p, double k, double mu, const Cmat& state,
                             int directions, unsigned seed) {
  const int N = static_cast<int>(state.cols()) - 1;
  wave_detail::WaveProblem prob(m, p, k, mu, N);
  Cmat JN = prob.nonlinear_jacobian(state);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  const int n = m.n;
  for (int t = 0; t < directions; ++t) {
    Cmat V = Cmat::Zero(n, N + 1);
    for (int e = 0; e <= N; ++e)
      for (int j = 0; j < n; ++j) {
        double decay = std::pow(0.5, e);
        V(j, e) = e == 0 ? cplx(nd(rng) * decay, 0.0) : cplx(nd(rng), nd(rng)) * decay;
      }
    V *= state.norm() / V.norm();
    Cvec full(n * (2 * N + 1));
    for (int e = -N; e <= N; ++e)
      full.segment((e + N) * n, n) = e >= 0 ? Cvec(V.col(e)) : Cvec(V.col(-e).conjugate());
    Cvec jv = JN * full;
    auto flat = [&](const Cmat& M) {
      Cvec f(n * (N + 1));
      for (int e = 0; e <= N; ++e) f.segment(e * n, n) = M.col(e);
      return f;
    };
    // fourth-order central difference
    const double h = 1e-3;
    Cvec fd = (-flat(prob.nonlinear(state + 2 * h * V)) + 8.0 * flat(prob.nonlinear(state + h * V)) -
               8.0 * flat(prob.nonlinear(state - h * V)) + flat(prob.nonlinear(state - 2 * h * V))) /
              (12.0 * h);
    worst = std::max(worst, (fd - jv).norm() / std::max(1e-300, jv.norm()));
  }
  return worst;
}

}  // namespace cglforge
