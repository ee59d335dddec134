#pragma once

#include <cmath>
#include <vector>

#include "errors.hpp"

namespace cglforge {

// Real polynomial in nvars variables; by convention variables 0..n-1 are the state
// and the last one is the bifurcation parameter.
class Polynomial {
 public:
  struct Term {
    double coef;
    std::vector<int> powers;
  };

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double c) {
    Polynomial p(nvars);
    if (c != 0.0) p.add(c, std::vector<int>(nvars, 0));
    return p;
  }
  static Polynomial variable(int nvars, int v, double c = 1.0) {
    Polynomial p(nvars);
    std::vector<int> e(nvars, 0);
    e[v] = 1;
    p.add(c, e);
    return p;
  }

  Polynomial& add(double coef, std::vector<int> powers) {
    if (static_cast<int>(powers.size()) != nvars_) fail(ErrorCode::InvalidArgument, "polynomial term arity mismatch");
    for (auto& t : terms_)
      if (t.powers == powers) {
        t.coef += coef;
        return *this;
      }
    terms_.push_back({coef, std::move(powers)});
    return *this;
  }

  int nvars() const { return nvars_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const {
    for (const auto& t : terms_)
      if (t.coef != 0.0) return false;
    return true;
  }

  double operator()(const double* x) const {
    double s = 0.0;
    for (const auto& t : terms_) {
      double v = t.coef;
      for (int i = 0; i < nvars_; ++i)
        for (int e = 0; e < t.powers[i]; ++e) v *= x[i];
      s += v;
    }
    return s;
  }
  double operator()(const std::vector<double>& x) const { return (*this)(x.data()); }

  Polynomial derivative(int v) const {
    Polynomial d(nvars_);
    for (const auto& t : terms_) {
      if (t.powers[v] == 0 || t.coef == 0.0) continue;
      auto p = t.powers;
      double c = t.coef * p[v];
      --p[v];
      d.add(c, p);
    }
    return d;
  }

  Polynomial operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& t : o.terms_) r.add(t.coef, t.powers);
    return r;
  }
  Polynomial operator*(const Polynomial& o) const {
    Polynomial r(nvars_);
    for (const auto& a : terms_)
      for (const auto& b : o.terms_) {
        std::vector<int> p(nvars_);
        for (int i = 0; i < nvars_; ++i) p[i] = a.powers[i] + b.powers[i];
        r.add(a.coef * b.coef, p);
      }
    return r;
  }
  Polynomial scaled(double c) const {
    Polynomial r = *this;
    for (auto& t : r.terms_) t.coef *= c;
    return r;
  }

 private:
  int nvars_ = 0;
  std::vector<Term> terms_;
};

// Derivatives up to third order (in the first n variables) of a list of polynomials,
// precomputed once and evaluated pointwise.
class PolyJet {
 public:
  PolyJet() = default;
  PolyJet(std::vector<Polynomial> comps, int n) : n_(n), comps_(std::move(comps)) {
    const int c = static_cast<int>(comps_.size());
    d1_.resize(c * n);
    d2_.resize(c * n * n);
    d3_.resize(c * n * n * n);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < n; ++j) {
        d1_[i * n + j] = comps_[i].derivative(j);
        for (int k = 0; k < n; ++k) {
          d2_[(i * n + j) * n + k] = d1_[i * n + j].derivative(k);
          for (int l = 0; l < n; ++l) d3_[((i * n + j) * n + k) * n + l] = d2_[(i * n + j) * n + k].derivative(l);
        }
      }
  }

  struct Values {
    int n = 0;
    std::vector<double> v, d1, d2, d3;
    double val(int i) const { return v[i]; }
    double D1(int i, int j) const { return d1[i * n + j]; }
    double D2(int i, int j, int k) const { return d2[(i * n + j) * n + k]; }
    double D3(int i, int j, int k, int l) const { return d3[((i * n + j) * n + k) * n + l]; }
  };

  // order: highest derivative order needed (0..3)
  Values eval(const double* x, int order = 3) const {
    Values r;
    r.n = n_;
    r.v.resize(comps_.size());
    for (size_t i = 0; i < comps_.size(); ++i) r.v[i] = comps_[i](x);
    if (order >= 1) {
      r.d1.resize(d1_.size());
      for (size_t i = 0; i < d1_.size(); ++i) r.d1[i] = d1_[i](x);
    }
    if (order >= 2) {
      r.d2.resize(d2_.size());
      for (size_t i = 0; i < d2_.size(); ++i) r.d2[i] = d2_[i](x);
    }
    if (order >= 3) {
      r.d3.resize(d3_.size());
      for (size_t i = 0; i < d3_.size(); ++i) r.d3[i] = d3_[i](x);
    }
    return r;
  }

  int size() const { return static_cast<int>(comps_.size()); }
  int n() const { return n_; }
  const std::vector<Polynomial>& components() const { return comps_; }

 private:
  int n_ = 0;
  std::vector<Polynomial> comps_;
  std::vector<Polynomial> d1_, d2_, d3_;
};

}  // namespace cglforge
