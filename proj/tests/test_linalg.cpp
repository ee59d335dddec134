#include <gtest/gtest.h>

#include <random>

#include <cglforge/linalg.hpp>

using namespace cglforge;

namespace {

Cmat random_matrix(std::mt19937& rng, int n) {
  std::normal_distribution<double> nd;
  Cmat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = cplx(nd(rng), nd(rng));
  return M;
}

// Eigenvalue of M nearest to z, found by brute force over the full spectrum.
cplx nearest_eigenvalue(const Cmat& M, cplx z) {
  Eigen::ComplexEigenSolver<Cmat> es(M, false);
  cplx best = es.eigenvalues()(0);
  for (Eigen::Index i = 1; i < M.rows(); ++i)
    if (std::abs(es.eigenvalues()(i) - z) < std::abs(best - z)) best = es.eigenvalues()(i);
  return best;
}

}  // namespace

TEST(EigenTriple, DiagonalMatrixPicksLargestRealPart) {
  Cmat M = Cmat::Zero(3, 3);
  M.diagonal() << cplx(-1, 0), cplx(0.5, 2), cplx(-3, 1);
  EigenTriple t = eigen_triple(M);
  EXPECT_NEAR(std::abs(t.eigenvalue - cplx(0.5, 2)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(t.right_vec(1)), 1.0, 1e-14);
}

TEST(EigenTriple, ResidualsAndNormalization) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Cmat M = random_matrix(rng, 5);
    EigenTriple t = eigen_triple(M);
    double nm = spectral_norm(M);
    EXPECT_LE((M * t.right_vec - t.eigenvalue * t.right_vec).norm(), 1e-10 * nm);
    EXPECT_LE((t.left_vec * M - t.eigenvalue * t.left_vec).norm(), 1e-10 * nm);
    EXPECT_NEAR(std::abs((t.left_vec * t.right_vec)(0) - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(t.right_vec.norm(), 1.0, 1e-12);
  }
}

TEST(EigenTriple, GaugeIsFixed) {
  std::mt19937 rng(2);
  Cmat M = random_matrix(rng, 4);
  EigenTriple a = eigen_triple(M);
  // Rescaling M rescales the eigenvalue but must leave the gauged eigenvectors unchanged.
  EigenTriple b = eigen_triple(Cmat(2.5 * M));
  EXPECT_LE((a.right_vec - b.right_vec).norm(), 1e-10);
  EXPECT_LE((a.left_vec - b.left_vec).norm(), 1e-10);
  Eigen::Index imax;
  a.right_vec.cwiseAbs().maxCoeff(&imax);
  EXPECT_NEAR(a.right_vec(imax).imag(), 0.0, 1e-14);
  EXPECT_GT(a.right_vec(imax).real(), 0.0);
}

TEST(EigenTriple, TargetSelection) {
  Cmat M = Cmat::Zero(3, 3);
  M.diagonal() << cplx(1, 0), cplx(2, 0), cplx(3, 0);
  EigenTriple t = eigen_triple(M, EigenSelect::near(cplx(2.1, 0)));
  EXPECT_NEAR(t.eigenvalue.real(), 2.0, 1e-14);
}

TEST(EigenTriple, RejectsNonSimpleEigenvalue) {
  Cmat M = Cmat::Identity(3, 3);
  EXPECT_THROW(eigen_triple(M), Error);
}

TEST(InverseNorm, MatchesExplicitInverse) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Cmat M = random_matrix(rng, 6);
    double direct = spectral_norm(M.inverse());
    EXPECT_NEAR(inverse_norm(M) / direct, 1.0, 1e-10);
    EXPECT_NEAR(inverse_norm(M) * sigma_min(M), 1.0, 1e-12);
  }
}

TEST(InverseNorm, SingularThrows) {
  Cmat M = Cmat::Zero(3, 3);
  M(0, 0) = 1.0;
  M(1, 1) = 2.0;
  try {
    inverse_norm(M);
    FAIL() << "expected SingularMatrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularMatrix);
  }
}

TEST(ReducedResolvent, DefiningIdentities) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Cmat M = random_matrix(rng, 5);
    EigenTriple t = eigen_triple(M);
    Cmat M0 = M - t.eigenvalue * Cmat::Identity(5, 5);
    ReducedResolvent rr = reduced_resolvent(M0, t);
    Cmat Q = Cmat::Identity(5, 5) - rr.projector;
    const Cmat& N = rr.inverse_on_range;
    EXPECT_LE((N * Q * M0 * Q - Q).norm(), 1e-10);
    EXPECT_LE((rr.projector * N).norm(), 1e-10);
    EXPECT_LE((N * rr.projector).norm(), 1e-10);
  }
}

TEST(EigenvalueCurvature, MatchesFiniteDifferenceTrack) {
  std::mt19937 rng(5);
  const double h = 1e-4;
  for (int trial = 0; trial < 20; ++trial) {
    Cmat M0 = random_matrix(rng, 4), M1 = random_matrix(rng, 4), M2 = random_matrix(rng, 4);
    EigenTriple t = eigen_triple(M0);
    cplx formula = eigenvalue_curvature(M0, M1, M2, t);
    cplx lp = nearest_eigenvalue(M0 + h * M1 + h * h * M2, t.eigenvalue);
    cplx lm = nearest_eigenvalue(M0 - h * M1 + h * h * M2, t.eigenvalue);
    cplx fd = (lp - 2.0 * t.eigenvalue + lm) / (h * h);
    EXPECT_LE(std::abs(formula - fd) / std::max(1.0, std::abs(formula)), 1e-5) << "trial " << trial;
    cplx d1 = (lp - lm) / (2.0 * h);
    EXPECT_LE(std::abs(eigenvalue_derivative(M1, t) - d1) / std::max(1.0, std::abs(d1)), 1e-6);
  }
}
