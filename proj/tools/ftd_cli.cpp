// Command-line front end: simulate, check, monitor, example1, example2, sweep.
//
// Exit codes: 0 success, 1 error, 2 a condition requested as a guarantee is infeasible.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ftd/ftd.hpp"

namespace fs = std::filesystem;
using namespace ftd;

namespace {

constexpr int kInfeasible = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_json(const ConditionReport& r) {
  return {{"theorem", to_string(r.theorem)},
          {"feasible", r.feasible},
          {"lhs", number_or_null(r.lhs)},
          {"eps1_used", number_or_null(r.eps1_used)},
          {"eps1_optimal", number_or_null(r.eps1_optimal)},
          {"margin", number_or_null(r.margin)},
          {"epsilon2_max", number_or_null(r.epsilon2_max)},
          {"linear_gain_threshold", number_or_null(r.linear_gain_threshold)},
          {"sign_gain_threshold", number_or_null(r.sign_gain_threshold)}};
}

json phases_json(const PhaseReport& p) {
  return {{"T1", number_or_null(p.t1)},
          {"T_settle", number_or_null(p.t_settle)},
          {"envelope_violations", p.envelope_violations},
          {"eps2", p.eps2}};
}

json contacts_json(const ContactSummary& c) {
  return {{"functional", to_string(c.functional)},
          {"contacts", c.contacts},
          {"failures", c.failures},
          {"worst_derivative", number_or_null(c.worst_derivative)}};
}

std::string scalar_row(const ConditionReport& r) {
  const char* name = r.theorem == TheoremId::ScalarTwoNorm   ? "2-norm"
                     : r.theorem == TheoremId::ScalarOneNorm ? "1-norm"
                                                             : "inf-norm";
  return std::string(name) + ": " + (r.feasible ? "feasible" : "infeasible") +
         ", threshold c4 > " + fmt(r.linear_gain_threshold) + ", c3 > " +
         fmt(r.sign_gain_threshold) + ", lhs = " + fmt(r.lhs);
}

// ---------------------------------------------------------------------------

struct ScalarOutcome {
  ScalarAnalysis analysis;
  bool feasible = false;
};

ScalarOutcome run_scalar(const ScalarExperiment& exp, const OutputConfig& out,
                         bool write = true) {
  const History traj = simulate_scalar(exp);
  ScalarOutcome o{analyze_scalar(exp, traj), false};
  o.feasible = o.analysis.report.feasible;
  const auto& a = o.analysis;
  if (write) {
    const fs::path dir(out.directory);
    auto csv = open_output(dir / (out.prefix + "_trajectory.csv"));
    write_trajectory(csv, traj,
                     traj.gain_dimension() ? ScalarAdaptiveLaw::gain_names()
                                           : std::vector<std::string>{},
                     out.stride);
    json rep{{"condition", report_json(a.report)},
             {"phases", phases_json(a.phases)},
             {"settling_bound", number_or_null(a.settling_bound)},
             {"phase_one", contacts_json(a.phase_one)},
             {"phase_two", contacts_json(a.phase_two)}};
    if (!a.final_gains.empty()) rep["final_gains"] = a.final_gains;
    open_output(dir / (out.prefix + "_report.json")) << rep.dump(2) << '\n';
  }
  std::cout << out.prefix << ": " << scalar_row(a.report) << '\n'
            << "  T1=" << fmt(a.phases.t1) << ", T_settle=" << fmt(a.phases.t_settle)
            << ", T2_bound=" << fmt(a.settling_bound)
            << ", violations=" << a.phases.envelope_violations
            << ", contact_failures=" << a.phase_one.failures + a.phase_two.failures << '\n';
  if (!a.final_gains.empty()) {
    std::cout << "  final gains c3=" << fmt(a.final_gains[0]) << ", c4=" << fmt(a.final_gains[1])
              << '\n';
  }
  return o;
}

void write_network_outputs(const SyncExperiment& exp, const SyncResult& run,
                           const NetworkAnalysis& a, const OutputConfig& out) {
  const fs::path dir(out.directory);
  {
    auto csv = open_output(dir / (out.prefix + "_error.csv"));
    write_trajectory(csv, run.error, run.gain_names, out.stride);
  }
  {
    auto csv = open_output(dir / (out.prefix + "_indices.csv"));
    std::vector<std::string> header{"t", "E1", "E2", "E_norm"};
    header.insert(header.end(), run.gain_names.begin(), run.gain_names.end());
    write_header(csv, header);
    std::vector<double> row;
    for (std::size_t k = 0; k < run.error.size(); k += out.stride) {
      const double t = run.error.time(k);
      if (exp.mode == SyncMode::Outer) {
        const auto ix = error_indices(run.reference, run.response, exp.model.node_dim, t);
        row = {t, ix.e1, ix.e2, ix.e_norm};
      } else {
        row = {t, 0.0, 0.0, std::sqrt(sq_norm2(run.error.state(k)))};
      }
      const auto g = run.error.gains(k);
      row.insert(row.end(), g.begin(), g.end());
      write_row(csv, row);
    }
  }
  json rep{{"phases", phases_json(a.phases)},
           {"final_error_norm", a.final_error},
           {"min_error_norm", a.min_error},
           {"xi", std::vector<double>(a.xi.data(), a.xi.data() + a.xi.size())},
           {"phase_one", contacts_json(a.phase_one)},
           {"phase_two", contacts_json(a.phase_two)}};
  if (exp.control.kind != NetworkControlKind::None) rep["condition"] = report_json(a.report);
  if (!a.final_gains.empty()) rep["final_gains"] = a.final_gains;
  if (run.inner_residual) {
    rep["inner_residual"] = {{"max_column", run.inner_residual->max_column},
                             {"max_row", run.inner_residual->max_row}};
  }
  open_output(dir / (out.prefix + "_report.json")) << rep.dump(2) << '\n';
}

NetworkAnalysis run_network(const SyncExperiment& exp, const OutputConfig& out, double kappa) {
  const SyncResult run = simulate_sync(exp);
  const NetworkAnalysis a = analyze_network(exp, run, 0.0, kappa);
  write_network_outputs(exp, run, a, out);
  std::cout << out.prefix << ": |E| final=" << fmt(a.final_error) << ", min=" << fmt(a.min_error)
            << ", T1=" << fmt(a.phases.t1) << ", T_settle=" << fmt(a.phases.t_settle) << '\n';
  if (exp.control.kind != NetworkControlKind::None) {
    std::cout << "  condition " << to_string(a.report.theorem) << ": "
              << (a.report.feasible ? "feasible" : "infeasible") << ", lhs=" << fmt(a.report.lhs)
              << ", sign condition: theta3 > " << fmt(a.report.sign_gain_threshold)
              << " required\n";
  }
  for (std::size_t j = 0; j < a.final_gains.size(); ++j) {
    std::cout << "  final " << run.gain_names[j] << "=" << fmt(a.final_gains[j]) << '\n';
  }
  return a;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& path) {
  const auto cfg = parse_config(read_file(path));
  bool feasible = true;
  if (cfg.kind == ExperimentKind::Scalar) {
    feasible = run_scalar(build_scalar(cfg), cfg.output).feasible;
  } else {
    const auto exp = build_network(cfg);
    const auto a = run_network(exp, cfg.output, cfg.monitor.kappa);
    feasible = exp.control.kind != NetworkControlKind::None && a.report.feasible;
  }
  return cfg.monitor.guarantee && !feasible ? kInfeasible : 0;
}

std::vector<ConditionReport> network_reports(const SyncExperiment& exp) {
  std::vector<ConditionReport> out;
  for (auto kind : {NetworkControlKind::Pinning, NetworkControlKind::FullNode}) {
    if (exp.control.kind != NetworkControlKind::None && exp.control.kind != kind) continue;
    out.push_back(check_network_theorem(
        network_condition_params(exp, exp.control.theta3, exp.control.theta4, exp.model.theta1),
        kind));
  }
  return out;
}

int cmd_check(const std::string& path) {
  const auto cfg = parse_config(read_file(path));
  bool feasible = false;
  if (cfg.kind == ExperimentKind::Scalar) {
    auto exp = build_scalar(cfg);
    if (exp.adaptive) {
      exp.gains.c3 = cfg.scalar.c3;
      exp.gains.c4 = cfg.scalar.c4;
    }
    for (Norm n : {Norm::Two, Norm::One, Norm::Inf}) {
      exp.norm = n;
      const auto r = scalar_condition(exp);
      std::cout << scalar_row(r) << '\n';
      if (n == cfg.monitor.norm) feasible = r.feasible;
    }
  } else {
    const auto exp = build_network(cfg);
    for (const auto& r : network_reports(exp)) {
      const bool pin = r.theorem == TheoremId::NetworkPinning;
      std::cout << (pin ? "pinning" : "full-node") << ": "
                << (r.feasible ? "feasible" : "infeasible") << ", lhs = " << fmt(r.lhs)
                << ", threshold " << (pin ? "theta1 > " : "theta4 > ")
                << fmt(r.linear_gain_threshold) << '\n'
                << "sign condition: theta3 > " << fmt(r.sign_gain_threshold) << " required\n";
      if (exp.control.kind == NetworkControlKind::None ||
          (pin == (exp.control.kind == NetworkControlKind::Pinning))) {
        feasible = feasible || r.feasible;
      }
    }
  }
  return cfg.monitor.guarantee && !feasible ? kInfeasible : 0;
}

int cmd_monitor(const std::string& config_path, const std::string& csv_path,
                const std::string& functional_name, double eps2, const std::string& out_path) {
  const auto cfg = parse_config(read_file(config_path));
  std::ifstream in(csv_path);
  if (!in) throw Error("cannot open " + csv_path);
  History traj = read_trajectory(in);
  if (cfg.integrator.constant_prehistory) {
    traj.set_prehistory(std::vector<double>(traj.state(0).begin(), traj.state(0).end()));
  }

  FunctionalParams p;
  p.rate = build_rate(cfg);
  p.zero_tol = cfg.integrator.zero_tol;
  p.start_time = cfg.monitor.start_time;
  DelayProfile delay = build_delay(cfg);
  Functional f = Functional::V1;
  Norm norm = cfg.monitor.norm;
  ConditionReport report;
  if (cfg.kind == ExperimentKind::Scalar) {
    const auto exp = build_scalar(cfg);
    f = phase_one_functional(norm);
    report = scalar_condition(exp);
  } else {
    const auto exp = build_network(cfg);
    const Vector xi = left_eigenvector(exp.model.a);
    p.xi.assign(xi.data(), xi.data() + xi.size());
    f = Functional::Vbar1;
    norm = Norm::Two;
    if (exp.control.kind != NetworkControlKind::None) report = network_reports(exp).front();
  }
  if (!functional_name.empty()) f = functional_from_string(functional_name);
  if (eps2 <= 0.0 && report.epsilon2_max > 0.0) eps2 = cfg.monitor.kappa * report.epsilon2_max;
  if (eps2 > 0.0) p.eps2 = eps2;

  const auto phases = detect_phases(traj, delay, norm, eps2, cfg.integrator.zero_tol);
  const auto trace = trace_functional(traj, f, p, delay);
  const auto checks = contact_point_decrease(trace, cfg.monitor.deriv_tol);

  std::ofstream file;
  if (!out_path.empty()) file = open_output(out_path);
  std::ostream& out = out_path.empty() ? std::cout : file;
  write_header(out, {"t", "V", "W", "contact"});
  std::size_t c = 0;
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    const bool contact = c < trace.contact_indices.size() && trace.contact_indices[c] == k;
    if (contact) ++c;
    write_row(out, {trace.times[k], trace.values[k], trace.window_sups[k], contact ? 1.0 : 0.0});
  }
  double bound = std::numeric_limits<double>::quiet_NaN();
  if (report.feasible && std::isfinite(phases.t1)) {
    bound = settling_bound(report, phases.t1, cfg.monitor.kappa);
  }
  // The summary shares stdout only when the trace goes to a file.
  (out_path.empty() ? std::cerr : std::cout) << "T1=" << fmt(phases.t1) << ", T_settle=" << fmt(phases.t_settle)
            << ", T2_bound=" << fmt(bound) << ", violations=" << phases.envelope_violations
            << ", contacts=" << checks.size() << ", contact_failures=" << count_failures(checks)
            << '\n';
  return 0;
}

int cmd_example1(const std::string& variant, double c3, double c4, std::vector<double> values,
                 AdaptiveRates rates, const std::string& norm_name, double horizon,
                 const OutputConfig& out) {
  Norm norm = Norm::Two;
  if (norm_name == "one") norm = Norm::One;
  if (norm_name == "inf") norm = Norm::Inf;
  if (variant == "static") {
    auto e = example1(c3, c4);
    if (horizon > 0.0) e.integrator.horizon = horizon;
    run_scalar(e, out);
    return 0;
  }
  if (variant == "adaptive") {
    auto e = example1_adaptive(rates, norm);
    e.integrator.horizon = horizon > 0.0 ? horizon : 60.0;
    run_scalar(e, out);
    return 0;
  }
  const bool sweep_c3 = variant == "sweep-c3";
  if (!sweep_c3 && variant != "sweep-c4") throw Error("unknown example1 variant '" + variant + "'");
  if (values.empty()) {
    values = sweep_c3 ? std::vector<double>{2.1, 3.0, 5.0} : std::vector<double>{3.5, 4.5, 6.0};
  }
  std::vector<std::future<ScalarAnalysis>> jobs;
  for (double v : values) {
    jobs.push_back(std::async(std::launch::async, [=] {
      auto e = sweep_c3 ? example1(v, c4) : example1(c3, v);
      if (horizon > 0.0) e.integrator.horizon = horizon;
      return analyze_scalar(e, simulate_scalar(e));
    }));
  }
  const fs::path dir(out.directory);
  auto csv = open_output(dir / (out.prefix + "_sweep.csv"));
  write_header(csv, {sweep_c3 ? "c3" : "c4", "T1", "T_settle", "T2_bound", "feasible"});
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto a = jobs[i].get();
    write_row(csv, {values[i], a.phases.t1, a.phases.t_settle, a.settling_bound,
                    a.report.feasible ? 1.0 : 0.0});
    std::cout << (sweep_c3 ? "c3=" : "c4=") << fmt(values[i]) << ": T_settle="
              << fmt(a.phases.t_settle) << ", T1=" << fmt(a.phases.t1) << '\n';
  }
  return 0;
}

int cmd_example2(const std::string& variant, double d_theta3, double d_theta4, double horizon,
                 const OutputConfig& out) {
  SyncExperiment e;
  if (variant == "no-control") {
    e = lorenz_preset();
  } else if (variant == "adaptive-full") {
    e = example2_adaptive(d_theta3, d_theta4);
  } else {
    throw Error("unknown example2 variant '" + variant + "'");
  }
  if (horizon > 0.0) e.integrator.horizon = horizon;
  run_network(e, out, 0.9);
  return 0;
}

/// Sets a dotted JSON path such as "gains.c4" to a number.
void set_path(json& j, const std::string& path, double value) {
  json* node = &j;
  std::stringstream ss(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(ss, key, '.')) keys.push_back(key);
  if (keys.empty()) throw ConfigError(path, "empty parameter path");
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!node->is_object()) throw ConfigError(path, "parameter path does not name an object field");
    node = &(*node)[keys[i]];
  }
  if (!node->is_object()) throw ConfigError(path, "parameter path does not name an object field");
  (*node)[keys.back()] = value;
}

int cmd_sweep(const std::string& path, const std::string& param, const std::vector<double>& values) {
  const auto base = parse_config(read_file(path));
  if (values.empty()) throw Error("sweep needs --values");
  std::vector<ExperimentConfig> configs;
  for (double v : values) {
    json j = to_json(base);
    set_path(j, param, v);
    configs.push_back(parse_config(j));
  }
  struct Row {
    double t1, t_settle, final_norm;
    bool feasible;
  };
  std::vector<std::future<Row>> jobs;
  for (const auto& cfg : configs) {
    jobs.push_back(std::async(std::launch::async, [cfg] {
      if (cfg.kind == ExperimentKind::Scalar) {
        const auto e = build_scalar(cfg);
        const auto traj = simulate_scalar(e);
        const auto a = analyze_scalar(e, traj);
        return Row{a.phases.t1, a.phases.t_settle, norm_value(e.norm, traj.back()),
                   a.report.feasible};
      }
      const auto e = build_network(cfg);
      const auto run = simulate_sync(e);
      const auto a = analyze_network(e, run, 0.0, cfg.monitor.kappa);
      return Row{a.phases.t1, a.phases.t_settle, a.final_error, a.report.feasible};
    }));
  }
  const fs::path dir(base.output.directory);
  auto csv = open_output(dir / (base.output.prefix + "_sweep.csv"));
  write_header(csv, {param, "T1", "T_settle", "final_norm", "feasible"});
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Row r = jobs[i].get();
    write_row(csv, {values[i], r.t1, r.t_settle, r.final_norm, r.feasible ? 1.0 : 0.0});
    std::cout << param << "=" << fmt(values[i]) << ": T1=" << fmt(r.t1)
              << ", T_settle=" << fmt(r.t_settle) << ", final_norm=" << fmt(r.final_norm)
              << (r.feasible ? ", feasible" : ", infeasible") << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-time stabilization and synchronization of delayed systems"};
  app.require_subcommand(1);

  std::string config, csv, functional, out_path, param;
  std::vector<double> values;
  double eps2 = 0.0;

  auto* simulate = app.add_subcommand("simulate", "Simulate a configured experiment");
  simulate->add_option("config", config, "JSON configuration")->required();

  auto* check = app.add_subcommand("check", "Print the sufficient-condition reports");
  check->add_option("config", config, "JSON configuration")->required();

  auto* monitor = app.add_subcommand("monitor", "Lyapunov trace of a stored trajectory");
  monitor->add_option("config", config, "JSON configuration")->required();
  monitor->add_option("trajectory", csv, "trajectory CSV")->required();
  monitor->add_option("--functional", functional, "V1..V8 or Vbar1..Vbar8");
  monitor->add_option("--eps2", eps2, "Phase II slope (default kappa * eps2max)");
  monitor->add_option("--out", out_path, "write the trace CSV here instead of stdout");

  OutputConfig out;
  std::string variant1 = "static", variant2 = "no-control", norm = "two";
  double c3 = 2.1, c4 = 3.5, horizon = 0.0, d_theta3 = 0.02, d_theta4 = 0.05;
  AdaptiveRates rates;
  auto* ex1 = app.add_subcommand("example1", "Scalar system with proportional delay");
  ex1->add_option("--variant", variant1, "static | adaptive | sweep-c3 | sweep-c4")
      ->check(CLI::IsMember({"static", "adaptive", "sweep-c3", "sweep-c4"}));
  ex1->add_option("--c3", c3, "sign gain");
  ex1->add_option("--c4", c4, "linear gain");
  ex1->add_option("--values", values, "sweep values")->delimiter(',');
  ex1->add_option("--d1", rates.d1, "adaptive rate d1");
  ex1->add_option("--d2", rates.d2, "adaptive rate d2");
  ex1->add_option("--d3", rates.d3, "adaptive rate d3");
  ex1->add_option("--norm", norm, "two | one | inf")->check(CLI::IsMember({"two", "one", "inf"}));
  ex1->add_option("--horizon", horizon, "override the horizon");
  ex1->add_option("--out", out.directory, "output directory");
  ex1->add_option("--stride", out.stride, "CSV row stride");

  auto* ex2 = app.add_subcommand("example2", "Three coupled Lorenz oscillators");
  ex2->add_option("--variant", variant2, "no-control | adaptive-full")
      ->check(CLI::IsMember({"no-control", "adaptive-full"}));
  ex2->add_option("--d-theta3", d_theta3, "theta3 adaptation rate");
  ex2->add_option("--d-theta4", d_theta4, "theta4 adaptation rate");
  ex2->add_option("--horizon", horizon, "override the horizon");
  ex2->add_option("--out", out.directory, "output directory");
  ex2->add_option("--stride", out.stride, "CSV row stride");

  auto* sweep = app.add_subcommand("sweep", "Run a configuration over a list of parameter values");
  sweep->add_option("config", config, "JSON configuration")->required();
  sweep->add_option("--param", param, "dotted field path, e.g. gains.c4")->required();
  sweep->add_option("--values", values, "parameter values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return cmd_simulate(config);
    if (*check) return cmd_check(config);
    if (*monitor) return cmd_monitor(config, csv, functional, eps2, out_path);
    if (*ex1) {
      out.prefix = "example1_" + variant1;
      return cmd_example1(variant1, c3, c4, values, rates, norm, horizon, out);
    }
    if (*ex2) {
      out.prefix = "example2_" + variant2;
      return cmd_example2(variant2, d_theta3, d_theta4, horizon, out);
    }
    if (*sweep) return cmd_sweep(config, param, values);
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << e.field() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
