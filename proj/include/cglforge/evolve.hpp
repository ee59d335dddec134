#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "amplitude.hpp"
#include "spectral.hpp"

namespace cglforge {

struct FieldState {
  int G = 0;
  double length = 0.0;
  Rmat values;  // n x G
  double t = 0.0;
};

struct AmplitudeState {
  int G = 0;
  double length = 0.0;
  Cvec A;
  double T = 0.0;
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<double> l2_norms;
  std::vector<double> sup_norms;
  std::vector<FieldState> snapshots;
  FieldState final_state;
};

struct AmplitudeTrace {
  std::vector<double> times;
  std::vector<AmplitudeState> snapshots;
  AmplitudeState final_state;
};

namespace evolve_detail {

inline double sup_norm(const Rmat& U) { return U.size() ? U.cwiseAbs().maxCoeff() : 0.0; }
inline double l2_norm(const Rmat& U, double length) {
  return U.size() ? std::sqrt(U.squaredNorm() * length / U.cols()) : 0.0;
}

// Dealiased nonlinear term of a full spectrum on a 3x padded grid.
class PaddedNonlinear {
 public:
  PaddedNonlinear(const ModelSpec& m, double mu, double q, int G) : G_(G), sp_(3 * G), op_(m, mu, q) {}
  Cmat operator()(const Cmat& spec) {
    Cmat big = resize_spectrum(spec, 3 * G_);
    return resize_spectrum(op_.apply(big, sp_), G_);
  }

 private:
  int G_;
  Spectral sp_;
  NonlinearOperator op_;
};

}  // namespace evolve_detail

// Crank-Nicolson for the linear symbol, second-order Adams-Bashforth for the nonlinear term;
// the first step uses an IMEX Heun predictor-corrector to keep second order.
inline SimulationTrace integrate_full(const ModelSpec& m, const FieldState& state, double mu, double dt, double t_end,
                                      int stride = 0) {
  using namespace evolve_detail;
  const int G = state.G, n = m.n;
  const double q = 2.0 * kPi / state.length;
  Spectral sp(G);
  PaddedNonlinear nl(m, mu, q, G);
  std::vector<Cmat> Aminus(G), Aplus(G);
  const Cmat Id = Cmat::Identity(n, n);
  for (int j = 0; j < G; ++j) {
    Cmat S = symbol(m, q * wavenumber(j, G), mu);
    Aminus[j] = (Id - 0.5 * dt * S).inverse();
    Aplus[j] = Id + 0.5 * dt * S;
  }
  auto cn = [&](const Cmat& U, const Cmat& rhsN) {
    Cmat out(n, G);
    for (int j = 0; j < G; ++j) out.col(j) = Aminus[j] * (Aplus[j] * U.col(j) + dt * rhsN.col(j));
    if (G % 2 == 0) out.col(G / 2).setZero();
    return out;
  };

  SimulationTrace tr;
  Cmat U = sp.to_spectral(state.values);
  if (G % 2 == 0) U.col(G / 2).setZero();
  const double init = std::max(sup_norm(state.values), 1e-300);
  const bool zero_init = sup_norm(state.values) == 0.0;
  double t = state.t;
  const long steps = std::lround((t_end - state.t) / dt);
  auto record = [&](const Cmat& spec, double time) {
    Rmat phys = sp.to_physical(spec);
    tr.times.push_back(time);
    tr.l2_norms.push_back(l2_norm(phys, state.length));
    tr.sup_norms.push_back(sup_norm(phys));
    if (stride > 0) tr.snapshots.push_back({G, state.length, phys, time});
  };
  record(U, t);
  Cmat Nprev;
  for (long s = 0; s < steps; ++s) {
    Cmat Ncur = nl(U);
    Cmat Un;
    if (s == 0) {
      Cmat Up = cn(U, Ncur);
      Un = cn(U, 0.5 * (Ncur + nl(Up)));
    } else {
      Un = cn(U, 1.5 * Ncur - 0.5 * Nprev);
    }
    Nprev = Ncur;
    U = Un;
    t = state.t + (s + 1) * dt;
    if (!U.allFinite()) fail(ErrorCode::BlowUp, "state is not finite at t=" + std::to_string(t));
    if (stride > 0 && (s + 1) % stride == 0) {
      record(U, t);
      if (!zero_init && tr.sup_norms.back() > 1e6 * init)
        fail(ErrorCode::BlowUp, "state norm exceeded 1e6 x initial at t=" + std::to_string(t));
    }
  }
  if (stride <= 0 || steps % stride != 0) record(U, t);
  if (!zero_init && tr.sup_norms.back() > 1e6 * init) fail(ErrorCode::BlowUp, "state norm exceeded 1e6 x initial");
  tr.final_state = {G, state.length, sp.to_physical(U), t};
  return tr;
}

// ---------------------------------------------------------------------------
// Amplitude equation A_T = diffusion A_XX + growth mu_tilde A + gamma |A|^2 A.

inline Cvec cgl_rhs(const CglCoefficients& c, double mu_tilde, const AmplitudeState& s, Spectral& sp) {
  const int G = s.G;
  const double q = 2.0 * kPi / s.length;
  Cmat Ah = sp.to_spectral_complex(s.A.transpose());
  Cmat Axx(1, G);
  for (int j = 0; j < G; ++j) {
    double w = q * wavenumber(j, G);
    Axx(0, j) = -w * w * Ah(0, j);
  }
  Cvec axx = sp.to_physical_complex(Axx).row(0).transpose();
  Cvec out(G);
  for (int j = 0; j < G; ++j) out(j) = c.diffusion * axx(j) + c.growth * mu_tilde * s.A(j) + c.gamma * std::norm(s.A(j)) * s.A(j);
  return out;
}

inline AmplitudeTrace integrate_cgl(const CglCoefficients& c, const AmplitudeState& state, double mu_tilde, double dt,
                                    double T_end, int stride = 0) {
  const int G = state.G;
  const double q = 2.0 * kPi / state.length;
  Spectral sp(G), big(3 * G);
  std::vector<cplx> lin(G), am(G), ap(G);
  for (int j = 0; j < G; ++j) {
    double w = q * wavenumber(j, G);
    lin[j] = -c.diffusion * w * w + c.growth * mu_tilde;
    am[j] = 1.0 / (1.0 - 0.5 * dt * lin[j]);
    ap[j] = 1.0 + 0.5 * dt * lin[j];
  }
  auto nonlinear = [&](const Cmat& Ah) {
    Cmat padded = resize_spectrum(Ah, 3 * G);
    Cmat a = big.to_physical_complex(padded);
    Cmat p(1, 3 * G);
    for (int j = 0; j < 3 * G; ++j) p(0, j) = c.gamma * std::norm(a(0, j)) * a(0, j);
    return resize_spectrum(big.to_spectral_complex(p), G);
  };
  auto cn = [&](const Cmat& Ah, const Cmat& Nh) {
    Cmat out(1, G);
    for (int j = 0; j < G; ++j) out(0, j) = am[j] * (ap[j] * Ah(0, j) + dt * Nh(0, j));
    return out;
  };
  AmplitudeTrace tr;
  Cmat Ah = sp.to_spectral_complex(state.A.transpose());
  const double init = std::max(state.A.cwiseAbs().maxCoeff(), 1e-300);
  const bool zero_init = state.A.cwiseAbs().maxCoeff() == 0.0;
  const long steps = std::lround((T_end - state.T) / dt);
  auto snap = [&](const Cmat& spec, double T) {
    AmplitudeState s{G, state.length, sp.to_physical_complex(spec).row(0).transpose(), T};
    return s;
  };
  if (stride > 0) {
    tr.times.push_back(state.T);
    tr.snapshots.push_back(snap(Ah, state.T));
  }
  Cmat Nprev;
  double T = state.T;
  for (long s = 0; s < steps; ++s) {
    Cmat Ncur = nonlinear(Ah);
    Cmat An = s == 0 ? cn(Ah, 0.5 * (Ncur + nonlinear(cn(Ah, Ncur)))) : cn(Ah, 1.5 * Ncur - 0.5 * Nprev);
    Nprev = Ncur;
    Ah = An;
    T = state.T + (s + 1) * dt;
    if (!Ah.allFinite()) fail(ErrorCode::BlowUp, "amplitude is not finite at T=" + std::to_string(T));
    if (stride > 0 && (s + 1) % stride == 0) {
      tr.times.push_back(T);
      tr.snapshots.push_back(snap(Ah, T));
      if (!zero_init && tr.snapshots.back().A.cwiseAbs().maxCoeff() > 1e6 * init)
        fail(ErrorCode::BlowUp, "amplitude exceeded 1e6 x initial at T=" + std::to_string(T));
    }
  }
  tr.final_state = snap(Ah, T);
  if (!zero_init && tr.final_state.A.cwiseAbs().maxCoeff() > 1e6 * init)
    fail(ErrorCode::BlowUp, "amplitude exceeded 1e6 x initial");
  return tr;
}

// ---------------------------------------------------------------------------
// Reconstruction of the multiscale ansatz on the physical box of length 2 pi M / k*.

struct AnsatzOptions {
  bool include_psi0 = true;
  bool include_psi1 = true;
  bool include_psi2 = true;
  bool second_order = true;  // false: leading term only
};

// Slow derivatives of A sampled on a fine x-grid after the shift X = eps (x - c t).
struct SlowFields {
  Cvec A, AX, AXX, AT, AXT;
};

class AnsatzBuilder {
 public:
  AnsatzBuilder(const ModelSpec& m, const TuringPoint& p, const CglCoefficients& c, double eps, double mu_tilde,
                double slow_length, int Gx)
      : m_(m), p_(p), c_(c), eps_(eps), mu_tilde_(mu_tilde), Lhat_(slow_length), Gx_(Gx), spx_(Gx) {
    M_ = static_cast<int>(std::lround(slow_length * p.k_star / (2.0 * kPi * eps)));
    if (M_ < 1 || std::abs(M_ - slow_length * p.k_star / (2.0 * kPi * eps)) > 1e-8)
      fail(ErrorCode::InvalidArgument, "slow domain length is not an integer number of carrier periods");
    L_ = 2.0 * kPi * M_ / p.k_star;
  }

  int carrier_periods() const { return M_; }
  double length() const { return L_; }
  int grid() const { return Gx_; }

  SlowFields slow_fields(const AmplitudeState& a, double t) {
    const int GA = a.G;
    Spectral spa(GA);
    const double qa = 2.0 * kPi / Lhat_;
    Cvec rhs = cgl_rhs(c_, mu_tilde_, a, spa);
    Cmat Ah = spa.to_spectral_complex(a.A.transpose());
    Cmat Th = spa.to_spectral_complex(rhs.transpose());
    const double shift = eps_ * (p_.d_star() + c_.delta) * t;  // X = eps x - shift
    auto sample = [&](const Cmat& h, int order) {
      Cmat fine = Cmat::Zero(1, Gx_);
      const int K = (GA - 1) / 2;
      for (int w = -K; w <= K; ++w) {
        double kw = qa * w;
        cplx f = std::pow(I1 * kw, order) * std::exp(-I1 * kw * shift);
        fine(0, (w + Gx_) % Gx_) = f * h(0, (w + GA) % GA);
      }
      return Cvec(spx_.to_physical_complex(fine).row(0).transpose());
    };
    SlowFields s;
    s.A = sample(Ah, 0);
    s.AX = sample(Ah, 1);
    s.AXX = sample(Ah, 2);
    s.AT = sample(Th, 0);
    s.AXT = sample(Th, 1);
    return s;
  }

  // U and U_t on the x-grid at physical time t, for amplitude snapshot a (at T = eps^2 t).
  void build(const AmplitudeState& a, double t, const AnsatzOptions& o, Rmat& U, Rmat* Ut) {
    const int n = m_.n;
    SlowFields s = slow_fields(a, t);
    const double e = eps_, ks = p_.k_star, ds = p_.d_star(), cs = ds + c_.delta;
    const Cvec& r = p_.triple.right_vec;
    const Cvec v0 = c_.v0.cast<cplx>();
    const Cvec& w = c_.slave_vector;
    const Cvec& v2 = c_.v2;
    U = Rmat::Zero(n, Gx_);
    if (Ut) *Ut = Rmat::Zero(n, Gx_);
    for (int j = 0; j < Gx_; ++j) {
      const double x = L_ * j / Gx_;
      const cplx E = std::exp(I1 * (ks * (x - ds * t)));
      const cplx A = s.A(j), AX = s.AX(j), AXX = s.AXX(j);
      const cplx At = e * e * s.AT(j) - e * cs * AX;     // d/dt A(eps(x - c t), eps^2 t)
      const cplx AXt = e * e * s.AXT(j) - e * cs * AXX;  // d/dt A_X
      const cplx dE = -I1 * ks * ds;                     // d/dt E / E
      Cvec u = 0.5 * e * A * E * r;
      Cvec ut = 0.5 * e * (At + dE * A) * E * r;
      Cvec um = Cvec::Zero(n), umt = Cvec::Zero(n);
      if (o.second_order) {
        if (o.include_psi1) {
          u += 0.5 * e * e * AX * E * w;
          ut += 0.5 * e * e * (AXt + dE * AX) * E * w;
        }
        if (o.include_psi2) {
          u += 0.5 * e * e * A * A * E * E * v2;
          ut += 0.5 * e * e * (2.0 * A * At + 2.0 * dE * A * A) * E * E * v2;
        }
        if (o.include_psi0) {
          um = e * e * std::norm(A) * v0;
          umt = e * e * 2.0 * (std::conj(A) * At).real() * v0;
        }
      }
      U.col(j) = 2.0 * u.real() + um.real();
      if (Ut) Ut->col(j) = 2.0 * ut.real() + umt.real();
    }
  }

  // Leading-order term only.
  Rmat leading(const AmplitudeState& a, double t) {
    Rmat U;
    AnsatzOptions o;
    o.second_order = false;
    build(a, t, o, U, nullptr);
    return U;
  }

  Rmat residual(const AmplitudeState& a, double t, const AnsatzOptions& o) {
    Rmat U, Ut;
    build(a, t, o, U, &Ut);
    const double mu = p_.mu_c + eps_ * eps_ * mu_tilde_;
    const double q = 2.0 * kPi / L_;
    Cmat Uh = spx_.to_spectral(U);
    Cmat LU(m_.n, Gx_);
    for (int j = 0; j < Gx_; ++j) LU.col(j) = symbol(m_, q * wavenumber(j, Gx_), mu) * Uh.col(j);
    if (Gx_ % 2 == 0) LU.col(Gx_ / 2).setZero();
    Spectral big(3 * Gx_);
    NonlinearOperator op(m_, mu, q);
    Cmat Nh = resize_spectrum(op.apply(resize_spectrum(Uh, 3 * Gx_), big), Gx_);
    return Ut - spx_.to_physical(LU) - spx_.to_physical(Nh);
  }

 private:
  const ModelSpec& m_;
  const TuringPoint& p_;
  const CglCoefficients& c_;
  double eps_, mu_tilde_, Lhat_;
  int Gx_;
  Spectral spx_;
  int M_ = 0;
  double L_ = 0.0;
};

inline double slow_length_for(double k_star, double periods_times_eps) { return 2.0 * kPi * periods_times_eps / k_star; }

inline double spectral_tail(const AmplitudeState& a) {
  Spectral sp(a.G);
  Cmat h = sp.to_spectral_complex(a.A.transpose());
  double mx = h.cwiseAbs().maxCoeff(), tail = 0.0;
  for (int j = 0; j < a.G; ++j)
    if (std::abs(wavenumber(j, a.G)) > a.G / 4) tail = std::max(tail, std::abs(h(0, j)));
  return mx > 0 ? tail / mx : 0.0;
}

// Smooth periodic amplitude profile a0 exp(b cos(2 pi X / L)) / exp(b).
inline AmplitudeState bump_amplitude(double a0, double b, double slow_length, int G) {
  AmplitudeState s;
  s.G = G;
  s.length = slow_length;
  s.A.resize(G);
  for (int j = 0; j < G; ++j) s.A(j) = a0 * std::exp(b * (std::cos(2.0 * kPi * j / G) - 1.0));
  return s;
}

struct ResidualReport {
  double epsilon = 0.0;
  std::vector<double> sample_times;  // slow times T
  std::vector<double> residuals;     // sup over x per sample
  double residual = 0.0;             // max over samples
  int carrier_periods = 0;
};

inline ResidualReport ansatz_residual(const ModelSpec& m, const TuringPoint& p, const CglCoefficients& c, double eps,
                                      const AmplitudeState& A_field, double mu_tilde, const AnsatzOptions& o = {},
                                      int samples = 5, double dT = 1e-3) {
  if (spectral_tail(A_field) > 1e-12) fail(ErrorCode::UnderResolved, "amplitude spectral tail exceeds 1e-12");
  ResidualReport rep;
  rep.epsilon = eps;
  if (A_field.A.cwiseAbs().maxCoeff() == 0.0 || eps == 0.0) {
    for (int i = 0; i < samples; ++i) {
      rep.sample_times.push_back(samples > 1 ? static_cast<double>(i) / (samples - 1) : 0.0);
      rep.residuals.push_back(0.0);
    }
    return rep;
  }
  const int M = static_cast<int>(std::lround(A_field.length * p.k_star / (2.0 * kPi * eps)));
  const int Gx = next_pow2(12 * (M + A_field.G / 2) + 16);
  AnsatzBuilder ab(m, p, c, eps, mu_tilde, A_field.length, Gx);
  rep.carrier_periods = ab.carrier_periods();
  const int stride = std::max(1, static_cast<int>(std::lround(1.0 / ((samples - 1) * dT))));
  AmplitudeTrace at = integrate_cgl(c, A_field, mu_tilde, dT, 1.0, stride);
  for (std::size_t i = 0; i < at.snapshots.size(); ++i) {
    const auto& a = at.snapshots[i];
    double t = a.T / (eps * eps);
    Rmat R = ab.residual(a, t, o);
    rep.sample_times.push_back(a.T);
    rep.residuals.push_back(R.cwiseAbs().maxCoeff());
  }
  for (double r : rep.residuals) rep.residual = std::max(rep.residual, r);
  return rep;
}

// ---------------------------------------------------------------------------

struct CompareOptions {
  double periods_times_eps = 0.8;  // M = periods_times_eps / eps carrier periods
  double modulation = 0.4;         // bump strength of the initial amplitude
  double dt = 0.02;                // full-system step
  double dT = 1e-3;                // amplitude-equation step
  int amplitude_grid = 64;
  int samples = 5;
  double mu_tilde = 1.0;
};

struct ErrorTrace {
  double epsilon = 0.0;
  std::vector<double> slow_times;
  std::vector<double> gaps;  // sup_x |U_full - reconstructed ansatz|
  double max_gap = 0.0;
  int carrier_periods = 0;
  int grid = 0;
  SimulationTrace full;
};

inline ErrorTrace compare_evolution(const ModelSpec& m, const TuringPoint& p, const CglCoefficients& c, double eps,
                                    double T_cap, const CompareOptions& o = {}) {
  ErrorTrace et;
  et.epsilon = eps;
  const int samples = std::max(2, o.samples);
  if (eps == 0.0) {
    for (int i = 0; i < samples; ++i) {
      et.slow_times.push_back(T_cap * i / (samples - 1));
      et.gaps.push_back(0.0);
    }
    return et;
  }
  double Mreal = o.periods_times_eps / eps;
  int M = static_cast<int>(std::lround(Mreal));
  if (std::abs(M - Mreal) > 1e-8 || M < 1)
    fail(ErrorCode::InvalidArgument, "periods_times_eps / eps must be an integer number of carrier periods");
  const double Lhat = slow_length_for(p.k_star, o.periods_times_eps);
  const double a0 = dispersion_band(c, 0.0, o.mu_tilde).amplitude;
  AmplitudeState A0 = bump_amplitude(a0 > 0 ? a0 : 1.0, o.modulation, Lhat, o.amplitude_grid);
  const int G = next_pow2(16 * M + 2 * o.amplitude_grid);
  AnsatzBuilder ab(m, p, c, eps, o.mu_tilde, Lhat, G);
  et.carrier_periods = M;
  et.grid = G;

  const int stride_T = std::max(1, static_cast<int>(std::lround(T_cap / ((samples - 1) * o.dT))));
  AmplitudeTrace at = integrate_cgl(c, A0, o.mu_tilde, o.dT, T_cap, stride_T);

  FieldState s;
  s.G = G;
  s.length = ab.length();
  Rmat U0;
  ab.build(A0, 0.0, AnsatzOptions{}, U0, nullptr);
  s.values = U0;
  s.t = 0.0;
  const double mu = p.mu_c + eps * eps * o.mu_tilde;
  for (std::size_t i = 0; i < at.snapshots.size(); ++i) {
    const auto& a = at.snapshots[i];
    const double t = a.T / (eps * eps);
    if (i > 0) {
      SimulationTrace tr = integrate_full(m, s, mu, o.dt, t, 0);
      s = tr.final_state;
      s.t = t;
    }
    Rmat ref;
    ab.build(a, t, AnsatzOptions{}, ref, nullptr);
    double gap = (s.values - ref).cwiseAbs().maxCoeff();
    et.slow_times.push_back(a.T);
    et.gaps.push_back(gap);
    et.full.times.push_back(t);
    et.full.sup_norms.push_back(s.values.cwiseAbs().maxCoeff());
    et.full.l2_norms.push_back(evolve_detail::l2_norm(s.values, s.length));
  }
  et.full.final_state = s;
  for (double g : et.gaps) et.max_gap = std::max(et.max_gap, g);
  return et;
}

// ---------------------------------------------------------------------------
// Framed binary snapshots: "CGLF", u32 version, u32 G, u32 n, then n x G doubles row-major.

inline constexpr std::uint32_t kSnapshotVersion = 1;

inline void write_snapshot(const std::string& path, const FieldState& s) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot open " + path);
  f.write("CGLF", 4);
  std::uint32_t hdr[3] = {kSnapshotVersion, static_cast<std::uint32_t>(s.G), static_cast<std::uint32_t>(s.values.rows())};
  f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
  for (Eigen::Index i = 0; i < s.values.rows(); ++i)
    for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
      double v = s.values(i, j);
      f.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

inline FieldState read_snapshot(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string(magic, 4) != "CGLF") fail(ErrorCode::ParseError, "bad snapshot magic");
  std::uint32_t hdr[3];
  f.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
  if (!f || hdr[0] != kSnapshotVersion) fail(ErrorCode::ParseError, "unsupported snapshot version");
  FieldState s;
  s.G = static_cast<int>(hdr[1]);
  s.values.resize(hdr[2], hdr[1]);
  for (Eigen::Index i = 0; i < s.values.rows(); ++i)
    for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
      double v;
      f.read(reinterpret_cast<char*>(&v), sizeof(v));
      s.values(i, j) = v;
    }
  if (!f) fail(ErrorCode::ParseError, "truncated snapshot");
  return s;
}

inline void write_trace_csv(const std::string& path, const SimulationTrace& tr) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot open " + path);
  f << "t,l2,sup\n";
  f.precision(17);
  for (std::size_t i = 0; i < tr.times.size(); ++i) f << tr.times[i] << "," << tr.l2_norms[i] << "," << tr.sup_norms[i] << "\n";
}

inline void write_gap_csv(const std::string& path, const ErrorTrace& et) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot open " + path);
  f << "T,t,gap,sup\n";
  f.precision(17);
  for (std::size_t i = 0; i < et.gaps.size(); ++i)
    f << et.slow_times[i] << "," << et.full.times[i] << "," << et.gaps[i] << "," << et.full.sup_norms[i] << "\n";
}

}  // namespace cglforge
