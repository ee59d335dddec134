#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "evolve.hpp"
#include "expansion.hpp"
#include "turing.hpp"
#include "wave.hpp"

namespace cglforge {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// Complex values are written as [re, im].
inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const Cvec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

inline json to_json(const Crow& v) { return to_json(Cvec(v.transpose())); }

inline json to_json(const Rvec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json to_json(const Cmat& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) rows.push_back(to_json(Cvec(M.row(i).transpose())));
  return rows;
}

inline json to_json(const TuringPoint& p) {
  return {{"k_star", p.k_star},
          {"mu_c", p.mu_c},
          {"lambda", to_json(p.lambda)},
          {"right_vector", to_json(p.triple.right_vec)},
          {"left_vector", to_json(p.triple.left_vec)},
          {"d_lambda_dk", to_json(p.d_lambda_dk)},
          {"d2_lambda_dk2", to_json(p.d2_lambda_dk2)},
          {"d_lambda_dmu", to_json(p.d_lambda_dmu)},
          {"curvature_fd_error", p.curvature_fd_error}};
}

inline json to_json(const HypothesisStatus& s) {
  json j = {{"status", to_string(s.status)}, {"detail", s.detail}, {"margin", s.margin}};
  if (s.witness) j["witness"] = {{"k", s.witness->k}, {"mu", s.witness->mu}, {"eigenvalue", to_json(s.witness->eigenvalue)}};
  return j;
}

inline json to_json(const HypothesisReport& r) {
  json st = json::object();
  for (const auto& [k, v] : r.status) st[k] = to_json(v);
  json j = {{"status", st},
            {"all_pass", r.all_pass()},
            {"k_grid_range", r.k_grid_range},
            {"mu_samples", r.mu_samples},
            {"h1_margins", r.h1_margins},
            {"mu_shift", r.mu_shift}};
  if (r.point) j["critical_point"] = to_json(*r.point);
  return j;
}

inline json to_json(const InvertibilityReport& r) {
  return {{"c_low", r.c_low},
          {"c_high", r.c_high},
          {"c_tail", r.c_tail},
          {"eta0", r.eta0},
          {"eta_low_witness", r.eta_low_witness},
          {"eta_high_witness", r.eta_high_witness},
          {"bound_constant", r.bound_constant}};
}

inline json to_json(const CglCoefficients& c) {
  return {{"d_star", c.d_star},
          {"delta", c.delta},
          {"diffusion", to_json(c.diffusion)},
          {"growth", to_json(c.growth)},
          {"curvature", to_json(c.curvature)},
          {"gamma", to_json(c.gamma)},
          {"gamma_routes", {{"multiplier", to_json(c.routes.multiplier)}, {"collected", to_json(c.routes.collected)}}},
          {"v0", to_json(c.v0)},
          {"v2", to_json(c.v2)},
          {"slave_matrix", to_json(c.slave_matrix)},
          {"slave_vector", to_json(c.slave_vector)},
          {"criticality", to_string(c.criticality)}};
}

inline json to_json(const DispersionPrediction& d) {
  return {{"kappa_tilde", d.kappa_tilde}, {"mu_tilde", d.mu_tilde}, {"amplitude", d.amplitude}, {"omega", d.omega},
          {"in_band", d.in_band},         {"subcritical", d.subcritical}, {"band_edge", d.band_edge}};
}

inline json to_json(const WaveSolution& w) {
  json modes = json::array();
  for (Eigen::Index e = 0; e < w.modes.cols(); ++e) modes.push_back(to_json(Cvec(w.modes.col(e))));
  json j = {{"k", w.k},
            {"d", w.d},
            {"epsilon", w.epsilon},
            {"mu", w.mu},
            {"mu_tilde", w.mu_tilde},
            {"kappa_tilde", w.kappa_tilde},
            {"residual_norm", w.residual_norm},
            {"alpha_measured", to_json(w.alpha_measured)},
            {"Omega_measured", w.Omega_measured},
            {"iterations", w.iterations},
            {"modes", modes},
            {"uniqueness", "local (Newton contraction basin)"}};
  if (w.jacobian_fd_error >= 0.0) j["jacobian_fd_error"] = w.jacobian_fd_error;
  return j;
}

inline json to_json(const BranchData& b) {
  json pts = json::array();
  for (const auto& w : b.points) pts.push_back(to_json(w));
  json per = json::array();
  for (auto g : b.gamma_per_point) per.push_back(to_json(g));
  return {{"kappa_tilde", b.kappa_tilde}, {"mu_tilde", b.mu_tilde}, {"points", pts},
          {"gamma_per_point", per},       {"gamma_LS", to_json(b.gamma_LS)},
          {"observed_order", b.observed_order}, {"fit_residual", b.fit_residual}};
}

inline json to_json(const ProbeReport& r) {
  json st = json::array();
  for (const auto& s : r.starts)
    st.push_back({{"initial_norm", s.initial_norm},
                  {"final_norm", s.final_norm},
                  {"outcome", to_string(s.outcome)},
                  {"detail", s.detail}});
  return {{"epsilon", r.epsilon}, {"kappa_tilde", r.kappa_tilde}, {"band_edge", r.band_edge},
          {"starts", st},         {"pass", r.pass},                 {"contradiction", r.contradiction}};
}

inline json to_json(const ResidualReport& r) {
  return {{"epsilon", r.epsilon},
          {"sample_times", r.sample_times},
          {"residuals", r.residuals},
          {"residual", r.residual},
          {"carrier_periods", r.carrier_periods}};
}

inline json to_json(const ErrorTrace& e) {
  return {{"epsilon", e.epsilon},
          {"slow_times", e.slow_times},
          {"gaps", e.gaps},
          {"max_gap", e.max_gap},
          {"carrier_periods", e.carrier_periods},
          {"grid", e.grid},
          {"times", e.full.times},
          {"sup_norms", e.full.sup_norms}};
}

inline json to_json(const SimulationTrace& t) {
  return {{"times", t.times}, {"l2_norms", t.l2_norms}, {"sup_norms", t.sup_norms}};
}

inline std::string monomial_string(const Monomial& m) {
  std::string s;
  for (const auto& v : m) {
    if (!s.empty()) s += "*";
    if (v.amp < 0) {
      s += "mu_tilde";
      continue;
    }
    std::string base = v.amp == 0 ? "A" : "A" + std::to_string(v.amp);
    if (v.conj) base = "conj(" + base + ")";
    if (v.deriv > 0) base = "d" + std::to_string(v.deriv) + "X(" + base + ")";
    s += base;
  }
  return s.empty() ? "1" : s;
}

inline json to_json(const ExpansionOrderData& e) {
  json psi = json::object();
  for (int k = 1; k <= e.order; ++k)
    for (int eta = 0; eta <= k; ++eta) {
      json terms = json::object();
      for (const auto& [m, c] : e.psi[k][eta].terms) terms[monomial_string(m)] = to_json(c);
      psi["psi_" + std::to_string(k) + "_" + std::to_string(eta)] = terms;
    }
  json rhs = json::array();
  for (const auto& r : e.amplitude_rhs) {
    json terms = json::object();
    for (const auto& [m, c] : r.terms) terms[monomial_string(m)] = to_json(c);
    rhs.push_back(terms);
  }
  return {{"order", e.order}, {"psi", psi}, {"amplitude_rhs", rhs}};
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The body carries config, version and results; the header carries the timestamp and
// the hash of the serialized body, so equal inputs give equal bodies and hashes.
inline json make_report(const std::string& command, const json& config, const json& result, int exit_status) {
  json body = {{"command", command},
               {"config", config},
               {"library", "cglforge"},
               {"version", kVersion},
               {"exit_status", exit_status},
               {"result", result}};
  json header = {{"timestamp", utc_timestamp()}, {"determinism_hash", "fnv1a64:" + hex64(fnv1a(body.dump()))}};
  return {{"header", header}, {"body", body}};
}

inline bool verify_report_hash(const json& report) {
  return report.at("header").at("determinism_hash").get<std::string>() ==
         "fnv1a64:" + hex64(fnv1a(report.at("body").dump()));
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot open " + path);
  f << j.dump(2) << "\n";
}

// Wave profile on a uniform xi-grid: columns xi, u_1..u_n.
inline void write_profile_csv(const std::string& path, const WaveSolution& w, int points = 256) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot open " + path);
  const Eigen::Index n = w.modes.rows();
  f << "xi";
  for (Eigen::Index i = 0; i < n; ++i) f << ",u" << (i + 1);
  f << "\n";
  f.precision(17);
  for (int j = 0; j < points; ++j) {
    double xi = 2.0 * kPi * j / points;
    f << xi;
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = w.modes(i, 0).real();
      for (Eigen::Index e = 1; e < w.modes.cols(); ++e) v += 2.0 * (w.modes(i, e) * std::exp(I1 * (double(e) * xi))).real();
      f << "," << v;
    }
    f << "\n";
  }
}

}  // namespace cglforge
