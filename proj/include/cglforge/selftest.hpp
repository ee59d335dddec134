#pragma once

#include <chrono>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "amplitude.hpp"
#include "evolve.hpp"
#include "models.hpp"
#include "turing.hpp"
#include "wave.hpp"

namespace cglforge {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

namespace selftest_detail {

inline Cmat random_complex(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> nd;
  Cmat M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = cplx(nd(rng), nd(rng));
  return M;
}

inline Cmat random_unitary(std::mt19937_64& rng, int n) {
  Eigen::HouseholderQR<Cmat> qr(random_complex(rng, n, n));
  return qr.householderQ() * Cmat::Identity(n, n);
}

struct Fit {
  TuringPoint point;
  CglCoefficients coeffs;
};

inline Fit analyse(const Fixture& fx) {
  Fit f;
  f.point = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  f.coeffs = cgl_coefficients(fx.model, f.point);
  return f;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace selftest_detail

// Second derivative of a planted simple zero eigenvalue vs centered differences.
inline CriterionResult criterion_curvature(unsigned seed = 1) {
  using namespace selftest_detail;
  CriterionResult r{1, "eigenvalue curvature formula", false, "", 0, 10};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(0.5, 2.0), ph(0.0, 2 * kPi);
  int ok = 0;
  double worst = 0.0;
  const int trials = 100, n = 4;
  for (int t = 0; t < trials; ++t) {
    Cmat P = random_unitary(rng, n) + 0.3 * random_complex(rng, n, n);
    Cvec d(n);
    d(0) = 0.0;
    for (int i = 1; i < n; ++i) d(i) = ud(rng) * std::exp(I1 * ph(rng)) * double(i);
    Cmat M0 = P * d.asDiagonal() * P.inverse();
    Cmat M1 = random_complex(rng, n, n), M2 = random_complex(rng, n, n);
    EigenTriple tr = eigen_triple(M0, EigenSelect::near(0.0));
    cplx formula = eigenvalue_curvature(M0, M1, M2, tr);
    cplx slope = eigenvalue_derivative(M1, tr);
    auto eig_at = [&](double x) {
      Eigen::ComplexEigenSolver<Cmat> es(M0 + x * M1 + x * x * M2);
      cplx guess = tr.eigenvalue + x * slope, best = es.eigenvalues()(0);
      for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i) - guess) < std::abs(best - guess)) best = es.eigenvalues()(i);
      return best;
    };
    const double h = 1e-4;
    cplx fd = (eig_at(h) - 2.0 * eig_at(0.0) + eig_at(-h)) / (h * h);
    double err = std::abs(fd - formula) / std::abs(formula);
    worst = std::max(worst, err);
    if (err <= 1e-5) ++ok;
  }
  r.pass = ok == trials;
  r.detail = std::to_string(ok) + "/" + std::to_string(trials) + " within 1e-5, worst " + fmt(worst);
  return r;
}

// ||M^-1|| sigma_min = 1 on matrices with planted singular values.
inline CriterionResult criterion_svd_norm(unsigned seed = 2) {
  using namespace selftest_detail;
  CriterionResult r{2, "inverse norm equals 1/sigma_min", false, "", 0, 5};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(2, 8);
  std::uniform_real_distribution<double> lg(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = dim(rng);
    Rvec s(n);
    for (int i = 0; i < n; ++i) s(i) = std::pow(10.0, lg(rng));
    Cmat M = random_unitary(rng, n) * s.cast<cplx>().asDiagonal() * random_unitary(rng, n).adjoint();
    worst = std::max(worst, std::abs(inverse_norm(M) * s.minCoeff() - 1.0));
  }
  r.pass = worst <= 1e-12;
  r.detail = "worst |inverse_norm * sigma_min - 1| = " + fmt(worst);
  return r;
}

inline CriterionResult criterion_brusselator_point() {
  CriterionResult r{3, "Brusselator critical point", false, "", 0, 5};
  const double a = 2.0, D1 = 1.0, D2 = 16.0;
  Fixture fx = brusselator();
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  const double k = std::sqrt(a / std::sqrt(D1 * D2)), b = std::pow(1.0 + a * std::sqrt(D1 / D2), 2);
  double ek = std::abs(p.k_star - k) / k, eb = std::abs(p.mu_c - b) / b;
  r.pass = ek <= 1e-8 && eb <= 1e-8;
  r.detail = "rel err k* " + selftest_detail::fmt(ek) + ", b_c " + selftest_detail::fmt(eb);
  return r;
}

inline CriterionResult criterion_gamma_routes() {
  CriterionResult r{4, "Landau constant route consistency", true, "", 0, 5};
  for (const auto& name : fixture_names()) {
    Fixture fx = builtin_model(name);
    TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
    Forms f = forms_from_model(fx.model, p, false);
    GammaRoutes g = landau_routes(fx.model, p, f.Q, f.C);
    double diff = std::abs(g.multiplier - g.collected);
    r.pass = r.pass && diff <= 1e-10;
    r.detail += name + " " + selftest_detail::fmt(diff) + "; ";
  }
  return r;
}

inline CriterionResult criterion_gamma_ls() {
  CriterionResult r{5, "Landau constant from exact waves", true, "", 0, 120};
  for (const char* name : {"brusselator", "brusselator_advective"}) {
    auto f = selftest_detail::analyse(builtin_model(name));
    Fixture fx = builtin_model(name);
    BranchData b = continue_branch(fx.model, f.point, f.coeffs, {0.02, 0.04, 0.08}, 0.0, 1.0);
    fit_landau(b, 1.0);
    double rel = std::abs(b.gamma_LS - f.coeffs.gamma) / std::abs(f.coeffs.gamma);
    std::vector<double> dev;
    for (auto g : b.gamma_per_point) dev.push_back(std::abs(g - f.coeffs.gamma));
    double order = std::log(dev[2] / dev[1]) / std::log(2.0);
    bool ok = order >= 1.0 && dev[0] < dev[1] && dev[1] < dev[2] && rel <= 1e-3;
    r.pass = r.pass && ok;
    r.detail += std::string(name) + ": order " + selftest_detail::fmt(order) + ", extrapolated rel err " +
                selftest_detail::fmt(rel) + "; ";
  }
  return r;
}

inline CriterionResult criterion_o2() {
  CriterionResult r{6, "O(2) degeneracies", false, "", 0, 60};
  Fixture fx = brusselator();
  auto f = selftest_detail::analyse(fx);
  WaveSolution w = newton_wave(fx.model, f.point, f.coeffs, 0.05, 0.0, 1.0);
  double odd = 0.0, scale = w.modes.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < w.modes.size(); ++i) odd = std::max(odd, std::abs(w.modes.data()[i].imag()));
  const double ds = std::abs(f.coeffs.d_star), dl = std::abs(f.coeffs.delta), ig = std::abs(f.coeffs.gamma.imag());
  const double om = std::abs(w.Omega_measured);
  r.pass = ds <= 1e-10 && dl <= 1e-10 && ig <= 1e-8 && om <= 1e-10 && odd <= 1e-10 * scale;
  using selftest_detail::fmt;
  r.detail = "|d*| " + fmt(ds) + ", |delta| " + fmt(dl) + ", |Im gamma| " + fmt(ig) + ", |Omega| " + fmt(om) +
             ", odd part " + fmt(odd / scale);
  return r;
}

inline CriterionResult criterion_residual_order() {
  CriterionResult r{7, "ansatz residual order", true, "", 0, 60};
  for (const char* name : {"brusselator", "quasilinear_demo"}) {
    Fixture fx = builtin_model(name);
    auto f = selftest_detail::analyse(fx);
    const double a0 = dispersion_band(f.coeffs, 0.0, 1.0).amplitude;
    AmplitudeState A = bump_amplitude(a0, 0.4, slow_length_for(f.point.k_star, 0.8), 64);
    AnsatzOptions full, ablated;
    ablated.include_psi2 = false;
    double r1 = ansatz_residual(fx.model, f.point, f.coeffs, 0.1, A, 1.0, full).residual;
    double r2 = ansatz_residual(fx.model, f.point, f.coeffs, 0.05, A, 1.0, full).residual;
    double q1 = ansatz_residual(fx.model, f.point, f.coeffs, 0.1, A, 1.0, ablated).residual;
    double q2 = ansatz_residual(fx.model, f.point, f.coeffs, 0.05, A, 1.0, ablated).residual;
    double ratio = r1 / r2, ab = q1 / q2;
    r.pass = r.pass && ratio >= 6.0 && ratio <= 10.0 && ab < 6.0;
    r.detail += std::string(name) + ": ratio " + selftest_detail::fmt(ratio) + ", without second harmonic " +
                selftest_detail::fmt(ab) + "; ";
  }
  return r;
}

// Amplitude deviation O(eps), frequency deviation O(eps^3) under eps-halving.
inline CriterionResult criterion_wave_orders() {
  CriterionResult r{8, "wave expansion orders", false, "", 0, 120};
  Fixture fx = brusselator_advective();
  auto f = selftest_detail::analyse(fx);
  const double kap = 0.3 * std::sqrt(dispersion_band(f.coeffs, 0.0, 1.0).band_edge);
  const DispersionPrediction pred = dispersion_band(f.coeffs, kap, 1.0);
  std::vector<double> da, dO;
  for (double eps : {0.01, 0.02, 0.04}) {
    WaveSolution w = newton_wave(fx.model, f.point, f.coeffs, eps, kap, 1.0);
    da.push_back(std::abs(std::abs(w.alpha_measured) - pred.amplitude));
    dO.push_back(std::abs(w.Omega_measured - frequency_expansion(f.point, f.coeffs, eps, kap, 1.0)));
  }
  bool ok = true;
  std::string d = "kappa " + selftest_detail::fmt(kap) + "; amplitude ratios";
  for (int i = 0; i < 2; ++i) {
    double q = da[i + 1] / da[i];
    ok = ok && q >= 1.0 && q <= 4.0;
    d += " " + selftest_detail::fmt(q);
  }
  d += "; frequency ratios";
  for (int i = 0; i < 2; ++i) {
    double q = dO[i + 1] / dO[i];
    ok = ok && q >= 4.0 && q <= 16.0;
    d += " " + selftest_detail::fmt(q);
  }
  r.pass = ok;
  r.detail = d;
  return r;
}

inline CriterionResult criterion_existence_band(unsigned seed = 9, int threads = 0) {
  CriterionResult r{9, "existence band", true, "", 0, 180};
  for (const char* name : {"brusselator", "brusselator_advective"}) {
    Fixture fx = builtin_model(name);
    auto f = selftest_detail::analyse(fx);
    const double edge = dispersion_band(f.coeffs, 0.0, 1.0).band_edge;
    int converged = 0, total = 0;
    for (double eps : {0.03, 0.06})
      for (double frac : {0.0, 0.4, 0.8}) {
        ++total;
        try {
          WaveSolution w = newton_wave(fx.model, f.point, f.coeffs, eps, std::sqrt(frac * edge), 1.0);
          if (std::abs(w.alpha_measured) > 0.1 * dispersion_band(f.coeffs, std::sqrt(frac * edge), 1.0).amplitude)
            ++converged;
        } catch (const Error&) {
        }
      }
    int collapsed = 0, starts = 0;
    bool contradiction = false;
    for (double eps : {0.03, 0.06}) {
      ProbeReport pr = nonexistence_probe(fx.model, f.point, f.coeffs, eps, std::sqrt(1.2 * edge), 1.0, 16, 8,
                                          seed, threads);
      for (const auto& s : pr.starts) {
        ++starts;
        if (s.outcome == ProbeOutcome::CollapseToZero) ++collapsed;
      }
      contradiction = contradiction || pr.contradiction;
    }
    r.pass = r.pass && converged == total && collapsed == starts;
    r.detail += std::string(name) + ": in-band " + std::to_string(converged) + "/" + std::to_string(total) +
                ", out-of-band collapse " + std::to_string(collapsed) + "/" + std::to_string(starts) +
                (contradiction ? " (contradiction flagged)" : "") + "; ";
  }
  return r;
}

inline CriterionResult criterion_invertibility(int threads = 0) {
  CriterionResult r{10, "uniform invertibility", true, "", 0, 30};
  for (const auto& name : fixture_names()) {
    Fixture fx = builtin_model(name);
    TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
    InvertibilityReport a = uniform_invertibility(fx.model, p, 0.1, 0.1, 64, threads, 5);
    InvertibilityReport b = uniform_invertibility(fx.model, p, 0.1, 0.1, 128, threads, 9);
    double dl = std::abs(a.c_low - b.c_low) / a.c_low, dh = std::abs(a.c_high - b.c_high) / a.c_high;
    bool ok = a.c_low > 0 && a.c_high > 0 && b.c_low > 0 && b.c_high > 0 && dl < 0.05 && dh < 0.05;
    r.pass = r.pass && ok;
    r.detail += name + " c_low " + selftest_detail::fmt(a.c_low) + " c_high " + selftest_detail::fmt(a.c_high) +
                " drift " + selftest_detail::fmt(std::max(dl, dh)) + "; ";
  }
  ModelSpec res = planted_resonance_model();
  TuringPoint p = turing_point_at(res, 1.0, 0.0);
  int witness = 0;
  try {
    uniform_invertibility(res, p, 0.0, 0.0, 16, threads, 2);
  } catch (const BoundViolation& e) {
    witness = e.witness_eta();
  }
  r.pass = r.pass && std::abs(witness) == 2;
  r.detail += "planted resonance witness eta " + std::to_string(witness);
  return r;
}

inline CriterionResult criterion_evolution() {
  CriterionResult r{11, "evolution closeness", false, "", 0, 300};
  Fixture fx = brusselator_advective();
  auto f = selftest_detail::analyse(fx);
  ErrorTrace a = compare_evolution(fx.model, f.point, f.coeffs, 0.1, 1.0);
  ErrorTrace b = compare_evolution(fx.model, f.point, f.coeffs, 0.05, 1.0);
  double q = b.max_gap / a.max_gap;
  r.pass = q >= 0.125 && q <= 0.5;
  r.detail = "gap(0.1) " + selftest_detail::fmt(a.max_gap) + ", gap(0.05) " + selftest_detail::fmt(b.max_gap) +
             ", ratio " + selftest_detail::fmt(q);
  return r;
}

inline CriterionResult criterion_jacobian_audit(unsigned seed = 12) {
  CriterionResult r{12, "Frechet derivative audit", false, "", 0, 60};
  Fixture fx = quasilinear_demo();
  auto f = selftest_detail::analyse(fx);
  WaveSolution w = newton_wave(fx.model, f.point, f.coeffs, 0.1, 0.0, 1.0);
  double err = jacobian_audit(fx.model, f.point, w.k, w.mu, w.modes, 10, seed);
  r.pass = err <= 1e-6;
  r.detail = "worst relative error over 10 directions " + selftest_detail::fmt(err);
  return r;
}

inline std::vector<std::function<CriterionResult()>> acceptance_suite(unsigned seed = 0, int threads = 0) {
  return {
      [=] { return criterion_curvature(seed + 1); },
      [=] { return criterion_svd_norm(seed + 2); },
      [] { return criterion_brusselator_point(); },
      [] { return criterion_gamma_routes(); },
      [] { return criterion_gamma_ls(); },
      [] { return criterion_o2(); },
      [] { return criterion_residual_order(); },
      [] { return criterion_wave_orders(); },
      [=] { return criterion_existence_band(seed + 9, threads); },
      [=] { return criterion_invertibility(threads); },
      [] { return criterion_evolution(); },
      [=] { return criterion_jacobian_audit(seed + 12); },
  };
}

// Runs one criterion, timing it and converting errors into failures.
inline CriterionResult run_criterion(const std::function<CriterionResult()>& fn, int id) {
  auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r.id = id;
    r.name = "criterion " + std::to_string(id);
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.budget_seconds > 0 && r.seconds > r.budget_seconds) {
    r.pass = false;
    r.detail += " (over runtime budget " + selftest_detail::fmt(r.budget_seconds) + " s)";
  }
  return r;
}

inline std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " (" << std::fixed;
  os.precision(2);
  os << r.seconds << " s): " << r.detail;
  return os.str();
}

}  // namespace cglforge
