// Command-line front end: fixture or JSON model in, JSON reports and CSV curves out.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <cglforge/cglforge.hpp>

using namespace cglforge;
namespace fs = std::filesystem;

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* v = std::getenv("CGLFORGE_LOG");
  if (!v) return LogLevel::Info;
  std::string s(v);
  if (s == "quiet" || s == "0" || s == "error") return LogLevel::Quiet;
  if (s == "debug" || s == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

void log(LogLevel lvl, const std::string& msg) {
  if (static_cast<int>(lvl) <= static_cast<int>(log_level())) std::cerr << "[cglforge] " << msg << "\n";
}

struct RunConfig {
  std::string command;
  std::string model = "brusselator";
  std::vector<std::string> sets;
  std::vector<double> eps;
  double kappa = 0.0;
  double mu_tilde = 1.0;
  int modes = 32;
  int threads = 1;
  unsigned seed = 0;
  std::string out = ".";
  std::string format = "json";
  std::vector<double> mu_range;
  int k_points = 2048;
  int mu_samples = 9;
  double tol = 1e-11;
  int starts = 8;
  int expansion_order = 0;
  double t_cap = 1.0;
  double dt = 0.02;
  int periods = 0;
  bool drop_psi2 = false;
  bool invertibility = true;

  json to_json() const {
    return {{"command", command},   {"model", model},       {"set", sets},
            {"eps", eps},           {"kappa", kappa},       {"mu_tilde", mu_tilde},
            {"modes", modes},       {"threads", threads},   {"seed", seed},
            {"format", format},     {"mu_range", mu_range}, {"k_points", k_points},
            {"mu_samples", mu_samples}, {"tol", tol},       {"starts", starts},
            {"expansion_order", expansion_order}, {"t_cap", t_cap}, {"dt", dt},
            {"periods", periods},   {"drop_psi2", drop_psi2}, {"invertibility", invertibility}};
  }
};

void validate(const RunConfig& c) {
  auto bad = [](const std::string& field, const std::string& what) {
    fail(ErrorCode::InvalidArgument, "config field '" + field + "': " + what);
  };
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    if (!(c.eps[i] > 0.0)) bad("eps", "values must be positive");
    if (i > 0 && !(c.eps[i] > c.eps[i - 1])) bad("eps", "list must be ascending");
  }
  if (!(c.tol > 0.0)) bad("tol", "must be positive");
  if (!(c.mu_tilde > 0.0)) bad("mu-tilde", "must be positive");
  if (!(c.dt > 0.0)) bad("dt", "must be positive");
  if (!(c.t_cap > 0.0)) bad("t-cap", "must be positive");
  if (c.modes < 4) bad("modes", "need at least 4 Fourier modes");
  if (c.threads < 1) bad("threads", "must be at least 1");
  if (!c.mu_range.empty() && (c.mu_range.size() != 2 || !(c.mu_range[0] < c.mu_range[1])))
    bad("mu-range", "expected lo,hi with lo < hi");
  if (c.format != "json" && c.format != "csv") bad("format", "expected json or csv");
}

Fixture load(const RunConfig& c) {
  Params over;
  for (const auto& s : c.sets) {
    auto pos = s.find('=');
    if (pos == std::string::npos) fail(ErrorCode::InvalidArgument, "--set expects key=value, got '" + s + "'");
    try {
      over[s.substr(0, pos)] = std::stod(s.substr(pos + 1));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "--set value for '" + s.substr(0, pos) + "' is not a number");
    }
  }
  Fixture fx;
  if (c.model.size() > 5 && c.model.substr(c.model.size() - 5) == ".json") {
    if (!over.empty()) fail(ErrorCode::InvalidArgument, "--set applies to built-in fixtures only");
    fx = load_model_file(c.model).fixture;
  } else {
    fx = builtin_model(c.model, over);
  }
  if (!c.mu_range.empty()) {
    fx.truth.mu_lo = c.mu_range[0];
    fx.truth.mu_hi = c.mu_range[1];
  }
  if (!(fx.truth.mu_lo < fx.truth.mu_hi))
    fail(ErrorCode::InvalidArgument, "no parameter bracket: give --mu-range or a 'bracket' field in the model");
  return fx;
}

std::vector<double> eps_or(const RunConfig& c, std::vector<double> def) { return c.eps.empty() ? def : c.eps; }

std::string tag(double eps) {
  std::ostringstream os;
  os << eps;
  return os.str();
}

struct Outcome {
  json result;
  int status = 0;
};

Outcome run_analyze(const RunConfig& c, const Fixture& fx) {
  const auto& m = fx.model;
  std::vector<double> mus = uniform_grid(fx.truth.mu_lo, fx.truth.mu_hi, c.mu_samples);
  std::vector<double> ks = default_k_grid(m, fx.truth.mu_hi, c.k_points);
  log(LogLevel::Info, "verifying hypotheses on " + std::to_string(ks.size()) + " wavenumbers");
  HypothesisReport rep = verify_hypotheses(m, ks, mus, c.threads);
  Outcome o;
  o.result = {{"model", m.name}, {"parameter", m.parameter_name}, {"hypotheses", to_json(rep)}};
  if (fx.truth.k_star) o.result["ground_truth"] = {{"k_star", *fx.truth.k_star}, {"mu_c", *fx.truth.mu_c}};
  if (rep.point && c.invertibility) {
    try {
      o.result["invertibility"] = to_json(uniform_invertibility(m, *rep.point, 0.1, 0.1, 64, c.threads));
    } catch (const BoundViolation& e) {
      o.result["invertibility"] = {{"violation", e.what()}, {"witness_eta", e.witness_eta()}};
      o.status = 2;
    }
  }
  if (!rep.all_pass()) o.status = 2;
  return o;
}

struct Analysis {
  TuringPoint point;
  CglCoefficients coeffs;
};

Analysis analyse(const Fixture& fx, const RunConfig& c) {
  ScanOptions opt;
  opt.threads = c.threads;
  opt.grid_points = c.k_points;
  Analysis a;
  a.point = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi, opt);
  a.coeffs = cgl_coefficients(fx.model, a.point);
  return a;
}

Outcome run_coefficients(const RunConfig& c, const Fixture& fx) {
  Analysis a = analyse(fx, c);
  Outcome o;
  o.result = {{"model", fx.model.name},
              {"critical_point", to_json(a.point)},
              {"coefficients", to_json(a.coeffs)},
              {"dispersion", to_json(dispersion_band(a.coeffs, c.kappa, c.mu_tilde))}};
  if (c.expansion_order >= 3)
    o.result["expansion"] = to_json(higher_order_expand(fx.model, a.point, c.expansion_order));
  return o;
}

Outcome run_wave(const RunConfig& c, const Fixture& fx) {
  Analysis a = analyse(fx, c);
  WaveOptions opt;
  opt.N_trunc = c.modes;
  opt.tol = c.tol;
  auto eps = eps_or(c, {0.02, 0.04, 0.08});
  Outcome o;
  o.result = {{"model", fx.model.name}, {"prediction", to_json(dispersion_band(a.coeffs, c.kappa, c.mu_tilde))}};
  if (eps.size() >= 3) {
    BranchData b = continue_branch(fx.model, a.point, a.coeffs, eps, c.kappa, c.mu_tilde, opt);
    fit_landau(b, c.mu_tilde);
    o.result["branch"] = to_json(b);
    o.result["gamma_formula"] = to_json(a.coeffs.gamma);
    for (const auto& w : b.points)
      if (c.format == "csv") write_profile_csv((fs::path(c.out) / ("profile_eps" + tag(w.epsilon) + ".csv")).string(), w);
  } else {
    json pts = json::array();
    for (double e : eps) {
      WaveSolution w = newton_wave(fx.model, a.point, a.coeffs, e, c.kappa, c.mu_tilde, opt);
      pts.push_back(to_json(w));
      if (c.format == "csv") write_profile_csv((fs::path(c.out) / ("profile_eps" + tag(e) + ".csv")).string(), w);
    }
    o.result["points"] = pts;
  }
  return o;
}

Outcome run_probe(const RunConfig& c, const Fixture& fx) {
  Analysis a = analyse(fx, c);
  Outcome o;
  double kappa = c.kappa;
  const double edge = dispersion_band(a.coeffs, 0.0, c.mu_tilde).band_edge;
  if (kappa == 0.0) kappa = std::sqrt(1.2 * edge);
  if (kappa * kappa <= edge) log(LogLevel::Info, "kappa lies inside the existence band; probe expects no collapse");
  json probes = json::array();
  bool pass = true;
  for (double e : eps_or(c, {0.03, 0.06})) {
    ProbeReport pr = nonexistence_probe(fx.model, a.point, a.coeffs, e, kappa, c.mu_tilde, c.modes, c.starts, c.seed,
                                        c.threads);
    pass = pass && pr.pass;
    probes.push_back(to_json(pr));
  }
  o.result = {{"model", fx.model.name}, {"kappa_tilde", kappa}, {"band_edge", edge}, {"probes", probes}, {"pass", pass}};
  return o;
}

Outcome run_simulate(const RunConfig& c, const Fixture& fx) {
  Analysis a = analyse(fx, c);
  auto eps = eps_or(c, {0.05, 0.1});
  Outcome o;
  json runs = json::array();
  for (double e : eps) {
    CompareOptions opt;
    opt.dt = c.dt;
    opt.mu_tilde = c.mu_tilde;
    if (c.periods > 0)
      opt.periods_times_eps = c.periods * e;
    else if (eps.size() == 1)
      opt.periods_times_eps = 64 * e;
    log(LogLevel::Info, "simulating eps=" + tag(e));
    ErrorTrace et = compare_evolution(fx.model, a.point, a.coeffs, e, c.t_cap, opt);
    runs.push_back(to_json(et));
    const std::string base = (fs::path(c.out) / ("simulate_eps" + tag(e))).string();
    write_gap_csv(base + "_gap.csv", et);
    write_snapshot(base + "_final.cglf", et.full.final_state);
  }
  o.result = {{"model", fx.model.name}, {"runs", runs}};
  if (eps.size() >= 2) {
    json ratios = json::array();
    for (std::size_t i = 1; i < eps.size(); ++i)
      ratios.push_back(runs[i - 1]["max_gap"].get<double>() / runs[i]["max_gap"].get<double>());
    o.result["gap_ratios"] = ratios;
  }
  return o;
}

Outcome run_audit(const RunConfig& c, const Fixture& fx) {
  Analysis a = analyse(fx, c);
  auto eps = eps_or(c, {0.025, 0.05, 0.1});
  const double a0 = dispersion_band(a.coeffs, 0.0, c.mu_tilde).amplitude;
  AmplitudeState A = bump_amplitude(a0, 0.4, slow_length_for(a.point.k_star, 0.8), 64);
  AnsatzOptions opt;
  opt.include_psi2 = !c.drop_psi2;
  json reps = json::array();
  std::vector<double> res;
  for (double e : eps) {
    ResidualReport r = ansatz_residual(fx.model, a.point, a.coeffs, e, A, c.mu_tilde, opt);
    res.push_back(r.residual);
    reps.push_back(to_json(r));
  }
  json ratios = json::array();
  for (std::size_t i = 1; i < res.size(); ++i) ratios.push_back(res[i] / res[i - 1]);
  Outcome o;
  o.result = {{"model", fx.model.name}, {"residuals", reps}, {"halving_ratios", ratios}, {"drop_psi2", c.drop_psi2}};
  return o;
}

Outcome run_selftest(const RunConfig& c) {
  auto suite = acceptance_suite(c.seed, c.threads);
  json items = json::array();
  bool all = true;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    CriterionResult r = run_criterion(suite[i], static_cast<int>(i + 1));
    std::cout << format_result(r) << std::endl;
    all = all && r.pass;
    items.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}});
  }
  Outcome o;
  o.result = {{"criteria", items}, {"all_pass", all}};
  o.status = all ? 0 : 1;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cglforge: amplitude equations near Turing bifurcations"};
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--model", cfg.model, "fixture name or path to a model JSON file");
    s->add_option("--set", cfg.sets, "fixture override key=value")->allow_extra_args(false);
    s->add_option("--eps", cfg.eps, "epsilon values (ascending)")->delimiter(',');
    s->add_option("--kappa", cfg.kappa, "scaled wavenumber offset");
    s->add_option("--mu-tilde", cfg.mu_tilde, "scaled parameter offset");
    s->add_option("--modes", cfg.modes, "Fourier truncation N");
    s->add_option("--threads", cfg.threads, "worker threads");
    s->add_option("--seed", cfg.seed, "seed for randomized probes");
    s->add_option("--out", cfg.out, "output directory");
    s->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    s->add_option("--mu-range", cfg.mu_range, "parameter bracket lo,hi")->delimiter(',');
    s->add_option("--tol", cfg.tol, "Newton tolerance");
  };

  struct Cmd {
    const char* name;
    const char* help;
  };
  const std::vector<Cmd> cmds = {{"analyze", "verify hypotheses and locate the critical point"},
                                 {"coefficients", "amplitude-equation coefficients and criticality"},
                                 {"wave", "exact periodic waves and the fitted Landau constant"},
                                 {"probe", "non-existence probe outside the existence band"},
                                 {"simulate", "full system versus amplitude equation"},
                                 {"audit", "ansatz residual order study"},
                                 {"selftest", "run the acceptance suite"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* s = app.add_subcommand(c.name, c.help);
    add_common(s);
    subs[c.name] = s;
  }
  subs["analyze"]->add_option("--k-points", cfg.k_points, "wavenumber grid size");
  subs["analyze"]->add_option("--mu-samples", cfg.mu_samples, "parameter samples");
  subs["analyze"]->add_flag("!--no-invertibility", cfg.invertibility, "skip the invertibility bounds");
  subs["coefficients"]->add_option("--expansion-order", cfg.expansion_order, "also emit the expansion to this order (3 or 4)");
  subs["probe"]->add_option("--starts", cfg.starts, "random starts per epsilon");
  subs["simulate"]->add_option("--t-cap", cfg.t_cap, "slow-time horizon");
  subs["simulate"]->add_option("--dt", cfg.dt, "time step of the full system");
  subs["simulate"]->add_option("--periods", cfg.periods, "carrier periods in the box (default 0.8/eps, or 64 for one eps)");
  subs["audit"]->add_flag("--drop-psi2", cfg.drop_psi2, "omit the second-harmonic correction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  for (const auto& [name, s] : subs)
    if (s->parsed()) cfg.command = name;

  try {
    validate(cfg);
    default_threads() = cfg.threads;
    fs::create_directories(cfg.out);
    Outcome o;
    if (cfg.command == "selftest") {
      o = run_selftest(cfg);
    } else {
      Fixture fx = load(cfg);
      log(LogLevel::Debug, "model " + fx.model.name + " loaded");
      if (cfg.command == "analyze") o = run_analyze(cfg, fx);
      if (cfg.command == "coefficients") o = run_coefficients(cfg, fx);
      if (cfg.command == "wave") o = run_wave(cfg, fx);
      if (cfg.command == "probe") o = run_probe(cfg, fx);
      if (cfg.command == "simulate") o = run_simulate(cfg, fx);
      if (cfg.command == "audit") o = run_audit(cfg, fx);
    }
    const std::string path = (fs::path(cfg.out) / (cfg.command + ".json")).string();
    json report = make_report(cfg.command, cfg.to_json(), o.result, o.status);
    write_json(path, report);
    log(LogLevel::Info, "wrote " + path);
    return o.status;
  } catch (const Error& e) {
    std::cerr << "cglforge: " << e.what() << "\n";
    return e.code() == ErrorCode::HypothesisFailure ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "cglforge: " << e.what() << "\n";
    return 1;
  }
}
