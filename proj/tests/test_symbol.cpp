#include <gtest/gtest.h>

#include <random>

#include <cglforge/models.hpp>

using namespace cglforge;

namespace {

// Local model of order m with random coefficients L_j(mu) = A_j + mu B_j.
ModelSpec random_local_model(std::mt19937& rng, int n, int order) {
  std::normal_distribution<double> nd;
  LocalLinear lin;
  for (int j = 0; j <= order; ++j) {
    Rmat A(n, n), B(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        A(r, c) = nd(rng);
        B(r, c) = nd(rng);
      }
    lin.L.push_back([A, B](double mu) { return Rmat(A + mu * B); });
  }
  ModelSpec m;
  m.name = "random";
  m.n = n;
  m.linear = lin;
  m.nonlinearity = Semilinear{};
  return m;
}

double rel(const Cmat& a, const Cmat& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace

TEST(Symbol, SumOfPowersOfIk) {
  LocalLinear lin;
  lin.L = {[](double) { return Rmat::Constant(1, 1, 2.0); }, [](double) { return Rmat::Constant(1, 1, 3.0); },
           [](double mu) { return Rmat::Constant(1, 1, mu); }};
  ModelSpec m;
  m.n = 1;
  m.linear = lin;
  m.nonlinearity = Semilinear{};
  const double k = 0.7, mu = -1.3;
  cplx expect = 2.0 + 3.0 * I1 * k + mu * (I1 * k) * (I1 * k);
  EXPECT_NEAR(std::abs(symbol(m, k, mu)(0, 0) - expect), 0.0, 1e-15);
  EXPECT_EQ(m.order(), 2);
}

TEST(Symbol, FirstDerivativeMatchesFiniteDifference) {
  std::mt19937 rng(11);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    ModelSpec m = random_local_model(rng, 3, 4);
    std::uniform_real_distribution<double> ud(-2.0, 2.0);
    double k = ud(rng), mu = ud(rng);
    Cmat fd = (symbol(m, k + h, mu) - symbol(m, k - h, mu)) / (2.0 * h);
    EXPECT_LE(rel(symbol_derivative(m, k, mu, 1, 0), fd), 1e-8);
  }
}

TEST(Symbol, DerivativeConsistencyAllOrders) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> ud(-1.5, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    ModelSpec m = random_local_model(rng, 2, 4);
    double k = ud(rng), mu = ud(rng);
    const double hk = 1e-4, hm = 1e-5;
    Cmat S0 = symbol(m, k, mu);
    Cmat d1 = (symbol(m, k + hk, mu) - symbol(m, k - hk, mu)) / (2.0 * hk);
    Cmat d2 = (symbol(m, k + hk, mu) - 2.0 * S0 + symbol(m, k - hk, mu)) / (hk * hk);
    Cmat dm = (symbol(m, k, mu + hm) - symbol(m, k, mu - hm)) / (2.0 * hm);
    EXPECT_LE(rel(symbol_derivative(m, k, mu, 1, 0), d1), 1e-6);
    EXPECT_LE(rel(symbol_derivative(m, k, mu, 2, 0), d2), 1e-6);
    EXPECT_LE(rel(symbol_derivative(m, k, mu, 0, 1), dm), 1e-6);
  }
}

TEST(Symbol, SecondDerivativeOfDiffusionIsMinusTwoL2) {
  LocalLinear lin;
  Rmat D(2, 2);
  D << 1.0, 0.5, -0.25, 16.0;
  lin.L = {[](double) { return Rmat::Zero(2, 2).eval(); }, [](double) { return Rmat::Zero(2, 2).eval(); },
           [D](double) { return D; }};
  ModelSpec m;
  m.n = 2;
  m.linear = lin;
  m.nonlinearity = Semilinear{};
  EXPECT_LE((symbol_derivative(m, 0.9, 0.0, 2, 0) + 2.0 * D.cast<cplx>()).norm(), 1e-14);
}

TEST(Symbol, TailSymbolIdentity) {
  std::mt19937 rng(13);
  ModelSpec m = random_local_model(rng, 3, 4);
  std::uniform_real_distribution<double> ud(0.2, 3.0);
  for (int i = 0; i < 20; ++i) {
    double k = ud(rng) * (i % 2 ? 1.0 : -1.0), mu = ud(rng) - 1.5;
    Cmat lhs = std::pow(k, m.order()) * tail_symbol(m, 1.0 / k, mu);
    EXPECT_LE(rel(lhs, symbol(m, k, mu)), 1e-12);
  }
}

TEST(Symbol, AnalyticMuDerivativeIsUsed) {
  LocalLinear lin;
  lin.L = {[](double mu) { return Rmat::Constant(1, 1, mu * mu); }};
  lin.dL_dmu = {[](double) { return Rmat::Constant(1, 1, 42.0); }};
  ModelSpec m;
  m.n = 1;
  m.linear = lin;
  m.nonlinearity = Semilinear{};
  EXPECT_DOUBLE_EQ(symbol_derivative(m, 0.3, 1.0, 0, 1)(0, 0).real(), 42.0);
}

TEST(Symbol, NonlocalUsesCallbacksAndReportsMissingOnes) {
  Fixture fx = nonlocal_demo();
  const double k = 0.6, mu = 3.0;
  Cmat fd = (symbol(fx.model, k + 1e-5, mu) - symbol(fx.model, k - 1e-5, mu)) / 2e-5;
  EXPECT_LE(rel(symbol_derivative(fx.model, k, mu, 1, 0), fd), 1e-6);
  try {
    symbol_derivative(fx.model, k, mu, 3, 0);
    FAIL() << "expected MissingDerivativeCallback";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingDerivativeCallback);
  }
  EXPECT_THROW(tail_symbol(fx.model, 0.5, mu), Error);
}

TEST(Symbol, CallbackExceptionsAreWrapped) {
  NonlocalLinear nl;
  nl.symbol = [](double, double) -> Cmat { throw std::runtime_error("boom"); };
  ModelSpec m;
  m.n = 1;
  m.linear = nl;
  m.nonlinearity = Semilinear{};
  try {
    symbol(m, 1.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CallbackFailure);
  }
}
