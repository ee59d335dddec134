#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "models.hpp"

namespace cglforge {

using nlohmann::json;

inline constexpr int kModelSchemaVersion = 1;

namespace json_detail {

[[noreturn]] inline void bad(const std::string& path, const std::string& what) {
  fail(ErrorCode::ParseError, path + ": " + what);
}

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(path + "." + key, "missing field");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  return j.get<int>();
}

// A number or a list of at most five mu-polynomial coefficients [c0, c1, ...].
struct MuPoly {
  std::vector<double> c;
  double operator()(double mu) const {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * mu + *it;
    return v;
  }
  double derivative(double mu) const {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 1;) v = v * mu + static_cast<double>(i) * c[i];
    return v;
  }
};

inline MuPoly mu_poly(const json& j, const std::string& path) {
  MuPoly p;
  if (j.is_number()) {
    p.c.push_back(j.get<double>());
  } else if (j.is_array()) {
    if (j.empty() || j.size() > 5) bad(path, "mu-polynomial must have 1 to 5 coefficients (degree <= 4)");
    for (std::size_t i = 0; i < j.size(); ++i) p.c.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  } else {
    bad(path, "expected a number or a coefficient list");
  }
  return p;
}

// Row-major n x n matrix of mu-polynomials.
inline std::vector<MuPoly> mu_matrix(const json& j, int n, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != n * n)
    bad(path, "expected a row-major array of " + std::to_string(n * n) + " entries");
  std::vector<MuPoly> out;
  for (int i = 0; i < n * n; ++i) out.push_back(mu_poly(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// Terms [{"coef": c, "powers": [p_1, ..., p_nvars]}, ...].
inline Polynomial polynomial(const json& j, int nvars, const std::string& path) {
  if (!j.is_array()) bad(path, "expected a list of terms");
  Polynomial p(nvars);
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string tp = path + "[" + std::to_string(t) + "]";
    double c = number(field(j[t], "coef", tp), tp + ".coef");
    const json& pw = field(j[t], "powers", tp);
    if (!pw.is_array() || static_cast<int>(pw.size()) != nvars)
      bad(tp + ".powers", "expected " + std::to_string(nvars) + " integer exponents");
    std::vector<int> e;
    for (std::size_t i = 0; i < pw.size(); ++i) {
      int v = integer(pw[i], tp + ".powers[" + std::to_string(i) + "]");
      if (v < 0) bad(tp + ".powers[" + std::to_string(i) + "]", "negative exponent");
      e.push_back(v);
    }
    p.add(c, e);
  }
  return p;
}

inline std::vector<Polynomial> polynomial_list(const json& j, int count, int nvars, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != count)
    bad(path, "expected " + std::to_string(count) + " polynomials");
  std::vector<Polynomial> out;
  for (int i = 0; i < count; ++i) out.push_back(polynomial(j[i], nvars, path + "[" + std::to_string(i) + "]"));
  return out;
}

inline void check_no_linear_part(const std::vector<Polynomial>& comps, int n, const std::string& path) {
  std::vector<double> zero(n + 1, 0.0);
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (const auto& t : comps[i].terms()) {
      int deg = 0;
      for (int v = 0; v < n; ++v) deg += t.powers[v];
      if (deg < 2 && t.coef != 0.0)
        bad(path + "[" + std::to_string(i) + "]", "nonlinearity must vanish to second order at U = 0");
    }
}

inline Rmat eval_matrix(const std::vector<MuPoly>& M, int n, double mu, bool deriv) {
  Rmat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = deriv ? M[i * n + j].derivative(mu) : M[i * n + j](mu);
  return out;
}

inline LocalLinear local_linear(const json& j, int n, const std::string& path) {
  const std::string kind = field(j, "kind", path).get<std::string>();
  if (kind != "local") bad(path + ".kind", "only 'local' linear parts are loadable; use a fixture for others");
  const json& coefs = field(j, "coefficients", path);
  if (!coefs.is_array() || coefs.empty()) bad(path + ".coefficients", "expected a non-empty list of matrices");
  LocalLinear lin;
  for (std::size_t d = 0; d < coefs.size(); ++d) {
    auto M = mu_matrix(coefs[d], n, path + ".coefficients[" + std::to_string(d) + "]");
    lin.L.push_back([M, n](double mu) { return eval_matrix(M, n, mu, false); });
    lin.dL_dmu.push_back([M, n](double mu) { return eval_matrix(M, n, mu, true); });
  }
  return lin;
}

inline std::function<cplx(double)> filter(const json& j, const std::string& path) {
  if (j.is_null()) return {};
  const std::string kind = field(j, "kind", path).get<std::string>();
  if (kind == "none") return {};
  if (kind == "lorentzian") {
    double rho = number(field(j, "rho", path), path + ".rho");
    return [rho](double k) { return cplx(1.0 / (1.0 + rho * k * k), 0.0); };
  }
  if (kind == "gaussian") {
    double s = number(field(j, "sigma", path), path + ".sigma");
    return [s](double k) { return cplx(std::exp(-0.5 * s * s * k * k), 0.0); };
  }
  bad(path + ".kind", "unknown filter '" + kind + "'");
}

inline Multilinear multilinear_from_pointwise(const PolyJet& jet, std::function<cplx(double)> w, int n) {
  std::vector<double> x(n + 1, 0.0);
  auto v = jet.eval(x.data(), 3);
  auto weight = [w](double k) { return w ? w(k) : cplx(1.0); };
  Multilinear ml;
  ml.symmetric = true;
  ml.filter = w;
  ml.pointwise = jet;
  ml.Q = [v, n, weight](double k1, double k2, const Cvec& a, const Cvec& b) {
    Cvec out = Cvec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) out(i) += 0.5 * v.D2(i, j, l) * a(j) * b(l);
    return Cvec(weight(k1 + k2) * out);
  };
  ml.C = [v, n, weight](double k1, double k2, double k3, const Cvec& a, const Cvec& b, const Cvec& c) {
    Cvec out = Cvec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m) out(i) += v.D3(i, j, l, m) * a(j) * b(l) * c(m) / 6.0;
    return Cvec(weight(k1 + k2 + k3) * out);
  };
  return ml;
}

inline Params params_from(const json& j, const std::string& path) {
  Params p;
  if (j.is_null()) return p;
  if (!j.is_object()) bad(path, "expected an object of numeric overrides");
  for (auto it = j.begin(); it != j.end(); ++it) p[it.key()] = number(it.value(), path + "." + it.key());
  return p;
}

}  // namespace json_detail

struct LoadedModel {
  Fixture fixture;
  json source;
};

// Builds a model from a parsed document; see docs/model_schema.md.
inline Fixture model_from_json(const json& doc) {
  using namespace json_detail;
  const json& ver = field(doc, "version", "$");
  if (integer(ver, "$.version") != kModelSchemaVersion)
    bad("$.version", "unsupported schema version " + ver.dump() + " (expected " + std::to_string(kModelSchemaVersion) + ")");
  if (doc.contains("fixture")) {
    const json& f = doc["fixture"];
    if (!f.is_string()) bad("$.fixture", "expected a fixture name");
    Params over = params_from(doc.value("set", json()), "$.set");
    return builtin_model(f.get<std::string>(), over);
  }
  const int n = integer(field(doc, "n", "$"), "$.n");
  if (n < 1) bad("$.n", "state dimension must be positive");
  Fixture fx;
  ModelSpec& m = fx.model;
  m.name = doc.value("name", std::string("custom"));
  m.n = n;
  m.parameter_name = doc.value("parameter", std::string("mu"));
  fx.truth.tag = "none";
  if (doc.contains("bracket")) {
    const json& b = doc["bracket"];
    if (!b.is_array() || b.size() != 2) bad("$.bracket", "expected [mu_lo, mu_hi]");
    fx.truth.mu_lo = number(b[0], "$.bracket[0]");
    fx.truth.mu_hi = number(b[1], "$.bracket[1]");
    if (!(fx.truth.mu_lo < fx.truth.mu_hi)) bad("$.bracket", "mu_lo must be below mu_hi");
  }
  const json& nl = field(doc, "nonlinearity", "$");
  const std::string kind = field(nl, "kind", "$.nonlinearity").get<std::string>();
  const int nv = n + 1;
  if (kind == "semilinear") {
    m.linear = local_linear(field(doc, "linear", "$"), n, "$.linear");
    auto comps = polynomial_list(field(nl, "components", "$.nonlinearity"), n, nv, "$.nonlinearity.components");
    check_no_linear_part(comps, n, "$.nonlinearity.components");
    m.nonlinearity = semilinear_from_poly(PolyJet(comps, n));
  } else if (kind == "multilinear") {
    m.linear = local_linear(field(doc, "linear", "$"), n, "$.linear");
    auto comps = polynomial_list(field(nl, "pointwise", "$.nonlinearity"), n, nv, "$.nonlinearity.pointwise");
    check_no_linear_part(comps, n, "$.nonlinearity.pointwise");
    for (std::size_t i = 0; i < comps.size(); ++i)
      for (const auto& t : comps[i].terms()) {
        int deg = 0;
        for (int v = 0; v < n; ++v) deg += t.powers[v];
        if (t.powers[n] != 0 || deg > 3)
          bad("$.nonlinearity.pointwise[" + std::to_string(i) + "]",
              "multilinear payloads must be quadratic or cubic in U and independent of the parameter");
      }
    m.nonlinearity = multilinear_from_pointwise(PolyJet(comps, n), filter(nl.value("filter", json()), "$.nonlinearity.filter"), n);
  } else if (kind == "quasilinear") {
    if (doc.contains("linear")) bad("$.linear", "quasilinear models derive their linear part; remove this field");
    Quasilinear q;
    q.h = PolyJet(polynomial_list(field(nl, "h", "$.nonlinearity"), n * n, nv, "$.nonlinearity.h"), n);
    q.f = PolyJet(polynomial_list(field(nl, "f", "$.nonlinearity"), n, nv, "$.nonlinearity.f"), n);
    q.g = PolyJet(polynomial_list(field(nl, "g", "$.nonlinearity"), n, nv, "$.nonlinearity.g"), n);
    const json& eqj = field(nl, "equilibrium", "$.nonlinearity");
    if (!eqj.is_array() || static_cast<int>(eqj.size()) != n) bad("$.nonlinearity.equilibrium", "expected n entries");
    std::vector<MuPoly> eq;
    for (int i = 0; i < n; ++i) eq.push_back(mu_poly(eqj[i], "$.nonlinearity.equilibrium[" + std::to_string(i) + "]"));
    q.equilibrium = [eq, n](double mu) {
      Rvec u(n);
      for (int i = 0; i < n; ++i) u(i) = eq[i](mu);
      return u;
    };
    LocalLinear lin;
    auto at = [q, n](const PolyJet& J, double mu, int order) {
      Rvec u = q.equilibrium(mu);
      std::vector<double> x(u.data(), u.data() + n);
      x.push_back(mu);
      return J.eval(x.data(), order);
    };
    lin.L.push_back([q, n, at](double mu) {
      auto v = at(q.g, mu, 1);
      Rmat L(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) L(i, j) = v.D1(i, j);
      return L;
    });
    lin.L.push_back([q, n, at](double mu) {
      auto v = at(q.f, mu, 1);
      Rmat L(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) L(i, j) = v.D1(i, j);
      return L;
    });
    lin.L.push_back([q, n, at](double mu) {
      auto v = at(q.h, mu, 0);
      Rmat L(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) L(i, j) = v.val(i * n + j);
      return L;
    });
    m.linear = lin;
    m.nonlinearity = q;
  } else {
    bad("$.nonlinearity.kind", "unknown kind '" + kind + "' (semilinear | quasilinear | multilinear)");
  }
  return fx;
}

// Parses text, reporting syntax errors with line and column.
inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::ParseError,
         origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + std::string(e.what()));
  }
}

inline LoadedModel load_model_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::ParseError, path + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  json doc = parse_json_text(ss.str(), path);
  try {
    return {model_from_json(doc), doc};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) fail(ErrorCode::ParseError, path + ": " + e.message());
    throw;
  }
}

}  // namespace cglforge
