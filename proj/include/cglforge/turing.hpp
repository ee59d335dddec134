#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "model.hpp"
#include "parallel.hpp"

namespace cglforge {

struct TuringPoint {
  double k_star = 0.0;
  double mu_c = 0.0;
  cplx lambda{};
  EigenTriple triple;
  cplx d_lambda_dk{};
  cplx d2_lambda_dk2{};
  cplx d_lambda_dmu{};
  double curvature_fd_error = 0.0;  // relative gap between the curvature formula and finite differences

  double d_star() const { return -lambda.imag() / k_star; }
};

// All eigenvalues of S(k, mu), sorted by decreasing real part.
inline std::vector<cplx> symbol_spectrum(const ModelSpec& m, double k, double mu) {
  Eigen::ComplexEigenSolver<Cmat> es(symbol(m, k, mu), false);
  if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "symbol eigensolver failed");
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
  return ev;
}

inline double max_growth(const ModelSpec& m, double k, double mu) { return symbol_spectrum(m, k, mu).front().real(); }

// Derivative data of the critical eigenvalue at a given (k, mu).
inline TuringPoint turing_point_at(const ModelSpec& m, double k, double mu,
                                   std::optional<cplx> target = std::nullopt) {
  TuringPoint p;
  p.k_star = k;
  p.mu_c = mu;
  Cmat S = symbol(m, k, mu);
  p.triple = eigen_triple(S, target ? EigenSelect::near(*target) : EigenSelect::largest_real());
  p.lambda = p.triple.eigenvalue;
  Cmat S1 = symbol_derivative(m, k, mu, 1, 0);
  Cmat S2 = symbol_derivative(m, k, mu, 2, 0);
  p.d_lambda_dk = eigenvalue_derivative(S1, p.triple);
  p.d2_lambda_dk2 = eigenvalue_curvature(S, S1, 0.5 * S2, p.triple);
  p.d_lambda_dmu = eigenvalue_derivative(symbol_derivative(m, k, mu, 0, 1), p.triple);

  const double h = 1e-4 * std::max(1.0, k);
  auto track = [&](double kk) {
    auto ev = symbol_spectrum(m, kk, mu);
    cplx best = ev[0];
    for (auto e : ev)
      if (std::abs(e - p.lambda) < std::abs(best - p.lambda)) best = e;
    return best;
  };
  cplx fd = (track(k + h) - 2.0 * p.lambda + track(k - h)) / (h * h);
  p.curvature_fd_error = std::abs(fd - p.d2_lambda_dk2) / std::max(1e-300, std::abs(p.d2_lambda_dk2));
  return p;
}

// Random-phase gauge change (l, r) -> (l / c, c r); scalar outputs must not move.
inline TuringPoint regauged(TuringPoint p, cplx c) {
  p.triple.right_vec *= c;
  p.triple.left_vec /= c;
  return p;
}

struct GrowthMax {
  double k = 0.0;
  double value = 0.0;
  std::size_t grid_index = 0;
};

struct ScanOptions {
  int grid_points = 2048;
  double k_max = 0.0;  // 0: estimate
  int threads = 0;
};

inline std::vector<double> uniform_grid(double a, double b, int npts) {
  std::vector<double> g(npts);
  for (int i = 0; i < npts; ++i) g[i] = a + (b - a) * i / (npts - 1);
  return g;
}

inline std::vector<double> scan_growth(const ModelSpec& m, const std::vector<double>& ks, double mu, int threads = 0) {
  std::vector<double> out(ks.size());
  parallel_for(ks.size(), [&](std::size_t i) { out[i] = max_growth(m, ks[i], mu); }, threads);
  return out;
}

inline double golden_max(const std::function<double(double)>& f, double a, double b, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Newton polish of d_k Re lambda = 0 at fixed mu, starting from k0.
inline double polish_k(const ModelSpec& m, double k0, double mu) {
  double k = k0;
  for (int it = 0; it < 20; ++it) {
    TuringPoint p;
    try {
      Cmat S = symbol(m, k, mu);
      p.triple = eigen_triple(S);
      Cmat S1 = symbol_derivative(m, k, mu, 1, 0);
      Cmat S2 = symbol_derivative(m, k, mu, 2, 0);
      double g1 = eigenvalue_derivative(S1, p.triple).real();
      double g2 = eigenvalue_curvature(S, S1, 0.5 * S2, p.triple).real();
      if (g2 >= 0.0) break;
      double step = -g1 / g2;
      if (std::abs(step) > 0.01 * std::max(k, 1e-3)) break;
      k += step;
      if (std::abs(step) < 1e-14 * std::max(1.0, k)) break;
    } catch (const Error&) {
      break;
    }
  }
  return k;
}

inline GrowthMax maximize_growth(const ModelSpec& m, const std::vector<double>& ks, double mu, int threads = 0) {
  auto vals = scan_growth(m, ks, mu, threads);
  std::size_t im = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  GrowthMax r;
  r.grid_index = im;
  double a = ks[im > 0 ? im - 1 : 0], b = ks[std::min(im + 1, ks.size() - 1)];
  auto f = [&](double k) { return max_growth(m, k, mu); };
  double kk = golden_max(f, a, b, 1e-9 * std::max(1.0, ks.back()));
  if (im > 0) kk = polish_k(m, kk, mu);
  r.k = kk;
  r.value = f(kk);
  if (vals[im] > r.value) {
    r.k = ks[im];
    r.value = vals[im];
  }
  return r;
}

// Rough location of the most unstable wavenumber from a log scan, used to size the k-grid.
inline double estimate_k_scale(const ModelSpec& m, double mu) {
  double best_k = 1.0, best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 240; ++i) {
    double k = std::pow(10.0, -3.0 + 6.0 * i / 240.0);
    double v = max_growth(m, k, mu);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  return best_k;
}

inline std::vector<double> default_k_grid(const ModelSpec& m, double mu_hi, int npts = 2048) {
  return uniform_grid(0.0, 8.0 * estimate_k_scale(m, mu_hi), npts);
}

inline TuringPoint locate_critical(const ModelSpec& m, double mu_lo, double mu_hi, ScanOptions opt = {}) {
  if (mu_lo > mu_hi) std::swap(mu_lo, mu_hi);
  std::vector<double> ks = opt.k_max > 0 ? uniform_grid(0.0, opt.k_max, opt.grid_points)
                                         : default_k_grid(m, mu_hi, opt.grid_points);
  auto g = [&](double mu) { return maximize_growth(m, ks, mu, opt.threads); };
  GrowthMax glo = g(mu_lo), ghi = g(mu_hi);
  if (!(glo.value < 0.0 && ghi.value > 0.0)) {
    std::ostringstream os;
    os << "max_k Re lambda is " << glo.value << " at mu=" << mu_lo << " and " << ghi.value << " at mu=" << mu_hi;
    fail(ErrorCode::NoSignChange, os.str());
  }
  double a = mu_lo, b = mu_hi;
  double scale = std::max(1.0, std::abs(mu_hi - mu_lo));
  GrowthMax cur = ghi;
  double mu = b;
  while (b - a > 1e-6 * scale) {
    mu = 0.5 * (a + b);
    cur = g(mu);
    if (cur.value < 0.0)
      a = mu;
    else
      b = mu;
  }
  mu = 0.5 * (a + b);
  cur = g(mu);
  for (int it = 0; it < 50 && std::abs(cur.value) > 1e-13; ++it) {
    TuringPoint p = turing_point_at(m, cur.k, mu);
    double slope = p.d_lambda_dmu.real();
    if (!(slope > 0.0)) break;
    double next = mu - cur.value / slope;
    if (next < mu_lo || next > mu_hi) break;
    mu = next;
    cur = g(mu);
  }
  if (cur.grid_index == 0 || cur.k <= 1e-12) {
    std::ostringstream os;
    os << "maximum of Re lambda over k is attained at k=0 (mu=" << mu << ")";
    fail(ErrorCode::HypothesisFailure, os.str());
  }

  // uniqueness: other grid-separated local maxima must stay below zero
  auto vals = scan_growth(m, ks, mu, opt.threads);
  const double dk = ks[1] - ks[0];
  for (std::size_t i = 0; i < ks.size(); ++i) {
    bool lmax = (i == 0 || vals[i] >= vals[i - 1]) && (i + 1 == ks.size() || vals[i] >= vals[i + 1]);
    if (!lmax || std::abs(ks[i] - cur.k) <= 3.0 * dk) continue;
    double lo = ks[i > 0 ? i - 1 : 0], hi = ks[std::min(i + 1, ks.size() - 1)];
    double kk = golden_max([&](double k) { return max_growth(m, k, mu); }, lo, hi, 1e-10 * std::max(1.0, hi));
    if (max_growth(m, kk, mu) > -1e-8) {
      std::ostringstream os;
      os << "second critical wavenumber near k=" << kk << " besides k*=" << cur.k;
      fail(ErrorCode::NonUniqueCritical, os.str());
    }
  }
  return turing_point_at(m, cur.k, mu);
}

// ---------------------------------------------------------------------------

enum class Status { Pass, Fail, NotApplicable };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::NotApplicable: return "not-applicable";
  }
  return "?";
}

struct Witness {
  double k = 0.0;
  double mu = 0.0;
  cplx eigenvalue{};
};

struct HypothesisStatus {
  Status status = Status::NotApplicable;
  std::string detail;
  std::optional<Witness> witness;
  double margin = 0.0;
};

struct AsymptoticReport {
  HypothesisStatus zero_frequency;  // sigma(L0) in Re < 0
  HypothesisStatus leading_even;    // m even
  HypothesisStatus leading_odd;     // m odd
  bool all_pass() const {
    auto ok = [](const HypothesisStatus& s) { return s.status != Status::Fail; };
    return ok(zero_frequency) && ok(leading_even) && ok(leading_odd);
  }
};

inline AsymptoticReport asymptotic_criteria(const ModelSpec& model, double mu) {
  const auto& lin = model.local();
  const int m = model.order();
  AsymptoticReport r;
  auto check_stable = [&](const Rmat& A, double k, const std::string& what) {
    HypothesisStatus s;
    Eigen::ComplexEigenSolver<Cmat> es(A.cast<cplx>(), false);
    Eigen::Index im = 0;
    double mr = es.eigenvalues().real().maxCoeff(&im);
    s.margin = mr;
    if (mr < 0.0) {
      s.status = Status::Pass;
      s.detail = what + " spectrum in the open left half plane";
    } else {
      s.status = Status::Fail;
      s.detail = what + " has an eigenvalue with nonnegative real part";
      s.witness = Witness{k, mu, es.eigenvalues()(im)};
    }
    return s;
  };
  r.zero_frequency = check_stable(lin.L[0](mu), 0.0, "L0");
  if (m % 2 == 0) {
    double sgn = (m / 2) % 2 == 0 ? 1.0 : -1.0;
    r.leading_even = check_stable(sgn * lin.L[m](mu), std::numeric_limits<double>::infinity(), "(-1)^(m/2) L_m");
  } else {
    HypothesisStatus s;
    Rmat Lm = lin.L[m](mu);
    Eigen::EigenSolver<Rmat> es(Lm);
    const auto& ev = es.eigenvalues();
    const double nrm = std::max(Lm.norm(), 1e-300);
    s.status = Status::Pass;
    for (Eigen::Index j = 0; j < ev.size(); ++j)
      if (std::abs(ev(j).imag()) > 1e-10 * nrm) {
        s.status = Status::Fail;
        s.detail = "L_m has a non-real eigenvalue";
        s.witness = Witness{std::numeric_limits<double>::infinity(), mu, ev(j)};
      }
    Cmat V = es.eigenvectors();
    Eigen::JacobiSVD<Cmat> svd(V);
    double cond = svd.singularValues()(0) / svd.singularValues()(V.cols() - 1);
    if (!std::isfinite(cond) || cond > 1e8) fail(ErrorCode::NotDiagonalizable, "L_m is defective");
    if (s.status == Status::Pass) {
      Cmat W = V.inverse();
      double sgn = ((m - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
      Cmat Lm1 = (sgn * lin.L[m - 1](mu)).cast<cplx>();
      double worst = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < V.cols(); ++j) {
        cplx c = (W.row(j) * Lm1 * V.col(j))(0);
        worst = std::max(worst, c.real());
        if (!(c.real() < 0.0)) {
          s.status = Status::Fail;
          s.detail = "coupling l_j L_{m-1} r_j is not negative";
          s.witness = Witness{std::numeric_limits<double>::infinity(), mu, ev(j)};
        }
      }
      s.margin = worst;
      if (s.status == Status::Pass) s.detail = "L_m real-diagonalizable with negative coupling";
    }
    r.leading_odd = s;
  }
  return r;
}

struct HypothesisReport {
  std::map<std::string, HypothesisStatus> status;  // H1 H2 H3 H4 ellipticity m1_wrinkle
  std::vector<double> k_grid_range;                 // {k_min, k_max, points}
  std::vector<double> mu_samples;
  std::vector<double> h1_margins;  // worst Re lambda per mu sample below mu_c
  std::optional<TuringPoint> point;
  double mu_shift = 0.0;

  bool all_pass() const {
    for (const auto& [k, v] : status)
      if (v.status == Status::Fail) return false;
    return true;
  }
};

// Worst-case growth over a grid; throws GridTooCoarse if Re lambda changes sign twice in one cell.
inline std::pair<double, std::size_t> worst_growth(const ModelSpec& m, const std::vector<double>& ks, double mu,
                                                   int threads) {
  auto vals = scan_growth(m, ks, mu, threads);
  std::vector<double> mids(ks.size() - 1);
  std::vector<double> km(ks.size() - 1);
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) km[i] = 0.5 * (ks[i] + ks[i + 1]);
  mids = scan_growth(m, km, mu, threads);
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    bool a = vals[i] >= 0, b = vals[i + 1] >= 0, c = mids[i] >= 0;
    if (a == b && c != a) {
      std::ostringstream os;
      os << "Re lambda changes sign twice in [" << ks[i] << ", " << ks[i + 1] << "] at mu=" << mu;
      fail(ErrorCode::GridTooCoarse, os.str());
    }
  }
  std::size_t im = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  return {vals[im], im};
}

inline HypothesisReport verify_hypotheses(const ModelSpec& m, const std::vector<double>& k_grid,
                                          std::vector<double> mu_samples, int threads = 0) {
  HypothesisReport rep;
  std::sort(mu_samples.begin(), mu_samples.end());
  rep.mu_samples = mu_samples;
  rep.k_grid_range = {k_grid.front(), k_grid.back(), static_cast<double>(k_grid.size())};
  if (mu_samples.size() < 2) fail(ErrorCode::InvalidArgument, "need at least two mu samples");

  ScanOptions opt;
  opt.k_max = k_grid.back();
  opt.grid_points = static_cast<int>(k_grid.size());
  opt.threads = threads;

  HypothesisStatus h2;
  try {
    rep.point = locate_critical(m, mu_samples.front(), mu_samples.back(), opt);
    h2.status = Status::Pass;
    h2.detail = "unique critical wavenumber k* > 0";
    h2.margin = rep.point->lambda.real();
    h2.witness = Witness{rep.point->k_star, rep.point->mu_c, rep.point->lambda};
  } catch (const Error& e) {
    h2.status = Status::Fail;
    h2.detail = e.what();
    auto gm = maximize_growth(m, k_grid, mu_samples.back(), threads);
    h2.witness = Witness{gm.k, mu_samples.back(), symbol_spectrum(m, gm.k, mu_samples.back()).front()};
    if (gm.grid_index == 0) h2.detail += " (max over k at k=0)";
    h2.margin = gm.value;
  }
  rep.status["H2"] = h2;
  const double mu_c = rep.point ? rep.point->mu_c : mu_samples.back();
  rep.mu_shift = mu_c;

  HypothesisStatus h1;
  h1.status = Status::Pass;
  h1.margin = -std::numeric_limits<double>::infinity();
  bool any_below = false;
  for (double mu : mu_samples) {
    if (mu >= mu_c) continue;
    any_below = true;
    auto [worst, idx] = worst_growth(m, k_grid, mu, threads);
    rep.h1_margins.push_back(worst);
    h1.margin = std::max(h1.margin, worst);
    if (worst >= 0.0 && h1.status == Status::Pass) {
      h1.status = Status::Fail;
      h1.witness = Witness{k_grid[idx], mu, symbol_spectrum(m, k_grid[idx], mu).front()};
      h1.detail = "unstable mode below threshold";
    }
    if (m.is_local()) {
      auto ac = asymptotic_criteria(m, mu);
      if (!ac.all_pass() && h1.status == Status::Pass) {
        h1.status = Status::Fail;
        h1.detail = "high-frequency criterion fails";
        h1.witness = Witness{std::numeric_limits<double>::infinity(), mu, {}};
      }
    }
  }
  if (!any_below) {
    h1.status = Status::NotApplicable;
    h1.detail = "no mu sample below mu_c";
  } else if (h1.status == Status::Pass) {
    h1.detail = "all modes strictly damped below threshold";
  }
  rep.status["H1"] = h1;

  HypothesisStatus h3;
  if (rep.point) {
    const double ks = rep.point->k_star;
    const double excl = 0.02 * ks;
    std::vector<double> vals(k_grid.size());
    parallel_for(k_grid.size(), [&](std::size_t i) {
      auto ev = symbol_spectrum(m, k_grid[i], mu_c);
      vals[i] = std::abs(k_grid[i] - ks) > excl ? ev.front().real()
                                                 : (ev.size() > 1 ? ev[1].real() : -std::numeric_limits<double>::infinity());
    }, threads);
    std::size_t im = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    auto evs = symbol_spectrum(m, ks, mu_c);
    double other = evs.size() > 1 ? evs[1].real() : -std::numeric_limits<double>::infinity();
    h3.margin = std::max(vals[im], other);
    if (h3.margin < 0.0) {
      h3.status = Status::Pass;
      h3.detail = "all other modes damped at mu_c";
    } else {
      h3.status = Status::Fail;
      h3.detail = "a non-critical mode is not damped at mu_c";
      h3.witness = Witness{k_grid[im], mu_c, symbol_spectrum(m, k_grid[im], mu_c).front()};
    }
  } else {
    h3.status = Status::NotApplicable;
    h3.detail = "no critical point";
  }
  rep.status["H3"] = h3;

  HypothesisStatus h4;
  if (rep.point) {
    const auto& p = *rep.point;
    h4.witness = Witness{p.k_star, p.mu_c, p.lambda};
    bool ok = std::abs(p.d_lambda_dk.real()) <= 1e-8 && p.d2_lambda_dk2.real() < 0.0 && p.d_lambda_dmu.real() > 0.0;
    h4.status = ok ? Status::Pass : Status::Fail;
    h4.margin = std::min(-p.d2_lambda_dk2.real(), p.d_lambda_dmu.real());
    h4.detail = ok ? "nondegenerate fold of the growth curve and transversal crossing"
                   : "curvature, slope or crossing condition violated";
  } else {
    h4.status = Status::NotApplicable;
    h4.detail = "no critical point";
  }
  rep.status["H4"] = h4;

  HypothesisStatus ell;
  if (m.is_local()) {
    auto ac = asymptotic_criteria(m, mu_c);
    ell.status = ac.all_pass() ? Status::Pass : Status::Fail;
    ell.detail = ac.all_pass() ? "high-frequency part is dissipative" : "high-frequency criterion fails";
    ell.margin = m.order() % 2 == 0 ? ac.leading_even.margin : ac.leading_odd.margin;
    if (!ac.all_pass()) ell.witness = Witness{std::numeric_limits<double>::infinity(), mu_c, {}};
  } else {
    const auto& nl = std::get<NonlocalLinear>(m.linear);
    if (!nl.leading) {
      ell.status = Status::Fail;
      ell.detail = "nonlocal model must declare its leading ellipticity matrix";
      ell.witness = Witness{std::numeric_limits<double>::infinity(), mu_c, {}};
    } else {
      Eigen::ComplexEigenSolver<Cmat> es(nl.leading(mu_c).cast<cplx>(), false);
      double mr = es.eigenvalues().real().maxCoeff();
      ell.margin = mr;
      ell.status = mr < 0.0 ? Status::Pass : Status::Fail;
      ell.detail = mr < 0.0 ? "declared leading symbol is dissipative" : "declared leading symbol is not dissipative";
      if (mr >= 0.0) ell.witness = Witness{std::numeric_limits<double>::infinity(), mu_c, {}};
    }
  }
  rep.status["ellipticity"] = ell;

  HypothesisStatus m1;
  if (m.is_local() && m.order() == 1 && rep.point) {
    double ds = rep.point->d_star();
    Eigen::ComplexEigenSolver<Cmat> es(m.local().L[1](mu_c).cast<cplx>(), false);
    double dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) dist = std::min(dist, std::abs(es.eigenvalues()(j) - ds));
    m1.margin = dist;
    m1.status = dist > 1e-6 ? Status::Pass : Status::Fail;
    m1.detail = "distance of d* to the characteristic speeds";
    if (dist <= 1e-6) m1.witness = Witness{rep.point->k_star, mu_c, cplx(ds, 0.0)};
  } else {
    m1.status = Status::NotApplicable;
    m1.detail = "only relevant for first-order models";
  }
  rep.status["m1_wrinkle"] = m1;
  return rep;
}

// ---------------------------------------------------------------------------

class BoundViolation : public Error {
 public:
  BoundViolation(int eta, const std::string& what) : Error(ErrorCode::BoundViolated, what), eta_(eta) {}
  int witness_eta() const { return eta_; }

 private:
  int eta_;
};

struct InvertibilityReport {
  double c_low = 0.0;
  double c_high = 0.0;
  double c_tail = 0.0;
  int eta0 = 0;
  int eta_low_witness = 0;
  int eta_high_witness = 0;
  double bound_constant = 0.0;  // 1 / min(c_low, c_high)
};

inline Cmat orthonormal_kernel_basis(const Crow& l) {
  Eigen::JacobiSVD<Cmat> svd(Cmat(l), Eigen::ComputeFullV);
  const Eigen::Index n = l.size();
  return svd.matrixV().rightCols(n - 1);
}

inline InvertibilityReport uniform_invertibility(const ModelSpec& m, const TuringPoint& p, double kappa_box,
                                                 double mu_box, int eta_max, int threads = 0, int samples = 5) {
  const double ds = p.d_star();
  const double s = m.ellipticity_order();
  const int eta0 = 3;
  if (samples < 2) fail(ErrorCode::InvalidArgument, "need at least two samples per box direction");
  const int nk = samples, nm = samples;
  std::vector<double> kap(nk), mus(nm);
  for (int i = 0; i < nk; ++i) kap[i] = -kappa_box + 2.0 * kappa_box * i / (nk - 1);
  for (int i = 0; i < nm; ++i) mus[i] = p.mu_c - mu_box + 2.0 * mu_box * i / (nm - 1);

  const Cmat Pi = p.triple.projector();
  const Cmat Qp = orthonormal_kernel_basis(p.triple.left_vec);
  const Cmat Qm = orthonormal_kernel_basis(p.triple.left_vec.conjugate());
  const Eigen::Index n = m.n;
  const Cmat Id = Cmat::Identity(n, n);

  std::vector<int> etas;
  for (int e = -eta_max; e <= eta_max; ++e) etas.push_back(e);
  std::vector<double> vals(etas.size());
  parallel_for(etas.size(), [&](std::size_t idx) {
    const int eta = etas[idx];
    double best = std::numeric_limits<double>::infinity();
    for (double ka : kap)
      for (double mu : mus) {
        const double k = p.k_star + ka;
        Cmat M = symbol(m, eta * k, mu) + I1 * (eta * k * ds) * Id;
        double sv;
        if (eta == 1) {
          sv = sigma_min(Qp.adjoint() * (Id - Pi) * M * Qp);
        } else if (eta == -1) {
          sv = sigma_min(Qm.adjoint() * (Id - Pi.conjugate()) * M * Qm);
        } else {
          sv = sigma_min(M);
        }
        if (std::abs(eta) >= eta0) sv /= std::pow(std::abs(static_cast<double>(eta)), s);
        best = std::min(best, sv);
      }
    vals[idx] = best;
  }, threads);

  InvertibilityReport r;
  r.eta0 = eta0;
  r.c_low = std::numeric_limits<double>::infinity();
  r.c_high = std::numeric_limits<double>::infinity();
  // ties between eta and -eta report the positive harmonic
  auto better = [&](double v, double cur, int eta, int wit) { return v < cur || (v == cur && eta > 0 && wit < 0); };
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (std::abs(etas[i]) < eta0) {
      if (better(vals[i], r.c_low, etas[i], r.eta_low_witness)) {
        r.c_low = vals[i];
        r.eta_low_witness = etas[i];
      }
    } else if (better(vals[i], r.c_high, etas[i], r.eta_high_witness)) {
      r.c_high = vals[i];
      r.eta_high_witness = etas[i];
    }
  }

  // eta -> infinity limit of sigma_min(m(eta)) / |eta|^s
  double tail = std::numeric_limits<double>::infinity();
  for (double ka : kap)
    for (double mu : mus) {
      const double k = p.k_star + ka;
      Cmat T;
      if (m.is_local()) {
        T = tail_symbol(m, 0.0, mu);
        if (m.order() == 1) T += I1 * ds * Id;
      } else {
        T = std::get<NonlocalLinear>(m.linear).leading(mu).cast<cplx>();
      }
      tail = std::min(tail, std::pow(k, s) * sigma_min(T));
    }
  r.c_tail = tail;
  if (tail < r.c_high) {
    r.c_high = tail;
    r.eta_high_witness = 0;
  }
  if (r.c_low < 1e-10)
    throw BoundViolation(r.eta_low_witness,
                         "low-frequency multiplier nearly singular at eta=" + std::to_string(r.eta_low_witness));
  if (r.c_high < 1e-10)
    throw BoundViolation(r.eta_high_witness,
                         "high-frequency multiplier nearly singular at eta=" + std::to_string(r.eta_high_witness));
  r.bound_constant = 1.0 / std::min(r.c_low, r.c_high);
  return r;
}

}  // namespace cglforge
