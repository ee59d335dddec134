#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "types.hpp"

namespace cglforge {

struct EigenTriple {
  cplx eigenvalue{};
  Cvec right_vec;
  Crow left_vec;
  cplx normalization{1.0, 0.0};

  Cmat projector() const { return right_vec * left_vec / normalization; }
};

struct ReducedResolvent {
  Cmat projector;
  Cmat inverse_on_range;
};

struct EigenSelect {
  enum class Kind { LargestRealPart, Target };
  Kind kind = Kind::LargestRealPart;
  cplx target{};

  static EigenSelect largest_real() { return {}; }
  static EigenSelect near(cplx z) { return {Kind::Target, z}; }
};

inline double spectral_norm(const Cmat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Cmat> svd(M);
  return svd.singularValues()(0);
}

inline double sigma_min(const Cmat& M) {
  Eigen::JacobiSVD<Cmat> svd(M);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

// Rotates r so its largest-modulus entry is real positive, scales |r| = 1 and l r = 1.
inline void apply_gauge(EigenTriple& t) {
  Eigen::Index imax = 0;
  t.right_vec.cwiseAbs().maxCoeff(&imax);
  cplx ph = t.right_vec(imax) / std::abs(t.right_vec(imax));
  t.right_vec /= ph;
  t.right_vec /= t.right_vec.norm();
  t.right_vec(imax) = std::abs(t.right_vec(imax));
  cplx lr = (t.left_vec * t.right_vec)(0);
  t.left_vec /= lr;
  t.normalization = (t.left_vec * t.right_vec)(0);
}

inline EigenTriple eigen_triple(const Cmat& M, EigenSelect which = EigenSelect::largest_real()) {
  const Eigen::Index n = M.rows();
  if (n == 0 || M.cols() != n) fail(ErrorCode::InvalidArgument, "eigen_triple needs a square nonempty matrix");
  Eigen::ComplexEigenSolver<Cmat> es(M, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "complex eigensolver failed");
  const Cvec& ev = es.eigenvalues();
  Eigen::Index sel = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    bool better = which.kind == EigenSelect::Kind::LargestRealPart
                      ? ev(i).real() > ev(sel).real()
                      : std::abs(ev(i) - which.target) < std::abs(ev(sel) - which.target);
    if (better) sel = i;
  }
  const double mnorm = std::max(spectral_norm(M), std::numeric_limits<double>::min());
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != sel) gap = std::min(gap, std::abs(ev(i) - ev(sel)));
  if (gap <= 1e-8 * mnorm) {
    std::ostringstream os;
    os << "eigenvalue " << ev(sel) << " has gap " << gap;
    fail(ErrorCode::NonSimpleEigenvalue, os.str());
  }

  EigenTriple t;
  t.eigenvalue = ev(sel);
  Cmat shifted = M - t.eigenvalue * Cmat::Identity(n, n);
  Eigen::JacobiSVD<Cmat> svd(shifted, Eigen::ComputeFullU | Eigen::ComputeFullV);
  t.right_vec = svd.matrixV().col(n - 1);
  t.left_vec = svd.matrixU().col(n - 1).adjoint();
  cplx lr = (t.left_vec * t.right_vec)(0);
  if (std::abs(lr) < 1e-14) fail(ErrorCode::NonSimpleEigenvalue, "left and right eigenvectors are orthogonal");
  apply_gauge(t);

  double rres = (M * t.right_vec - t.eigenvalue * t.right_vec).norm() / t.right_vec.norm();
  double lres = (t.left_vec * M - t.eigenvalue * t.left_vec).norm() / t.left_vec.norm();
  if (rres > 1e-10 * mnorm || lres > 1e-10 * mnorm) {
    std::ostringstream os;
    os << "eigenvector residuals " << rres << ", " << lres;
    fail(ErrorCode::NoConvergence, os.str());
  }
  return t;
}

inline double inverse_norm(const Cmat& M) {
  Eigen::JacobiSVD<Cmat> svd(M);
  const auto& s = svd.singularValues();
  double smax = s(0), smin = s(s.size() - 1);
  if (smin <= 1e-14 * smax || smin == 0.0) fail(ErrorCode::SingularMatrix, "sigma_min below 1e-14 ||M||");
  return 1.0 / smin;
}

// N with N (I-P) M0 (I-P) = (I-P), P N = N P = 0, via the bordered system [M0 r; l 0].
inline ReducedResolvent reduced_resolvent(const Cmat& M0, const EigenTriple& t) {
  const Eigen::Index n = M0.rows();
  ReducedResolvent out;
  out.projector = t.projector();
  Cmat Q = Cmat::Identity(n, n) - out.projector;
  Cmat B = Cmat::Zero(n + 1, n + 1);
  B.topLeftCorner(n, n) = M0;
  B.topRightCorner(n, 1) = t.right_vec;
  B.bottomLeftCorner(1, n) = t.left_vec;
  Eigen::FullPivLU<Cmat> lu(B);
  double scale = std::max({spectral_norm(M0), t.right_vec.norm(), t.left_vec.norm()});
  lu.setThreshold(1e-13);
  if (!lu.isInvertible() || std::abs(lu.determinant()) == 0.0)
    fail(ErrorCode::ReducedResolventSingular, "bordered system is singular");
  Cmat rhs = Cmat::Zero(n + 1, n);
  rhs.topRows(n) = Q;
  Cmat X = lu.solve(rhs);
  out.inverse_on_range = Q * X.topRows(n);
  Cmat check = out.inverse_on_range * Q * M0 * Q - Q;
  if (check.norm() > 1e-8 * std::max(1.0, scale * out.inverse_on_range.norm()))
    fail(ErrorCode::ReducedResolventSingular, "(I-P)M0(I-P) is not invertible on range(I-P)");
  return out;
}

inline cplx eigenvalue_derivative(const Cmat& M1, const EigenTriple& t) {
  return (t.left_vec * M1 * t.right_vec)(0) / (t.left_vec * t.right_vec)(0);
}

// Second derivative of the eigenvalue of M0 + x M1 + x^2 M2 at x = 0.
inline cplx eigenvalue_curvature(const Cmat& M0, const Cmat& M1, const Cmat& M2, const EigenTriple& t) {
  const Eigen::Index n = M0.rows();
  Cmat shifted = M0 - t.eigenvalue * Cmat::Identity(n, n);
  ReducedResolvent rr = reduced_resolvent(shifted, t);
  cplx lr = (t.left_vec * t.right_vec)(0);
  cplx a = (t.left_vec * M2 * t.right_vec)(0);
  cplx b = (t.left_vec * M1 * rr.inverse_on_range * M1 * t.right_vec)(0);
  return 2.0 * (a - b) / lr;
}

}  // namespace cglforge
