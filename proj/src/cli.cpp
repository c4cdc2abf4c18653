#include "edgegen/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "edgegen/errors.hpp"
#include "edgegen/experiment.hpp"
#include "edgegen/io.hpp"

namespace edgegen {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::vector<std::string> sets;
  std::vector<std::string> policies;
  std::optional<int> workers;
  std::optional<int> devices;
  std::string scenario;
  std::string sweep;
  std::optional<double> target;
  std::optional<int> horizon;
  std::string data;
  std::string gradient_ref;
  std::vector<std::string> gradient_dev;
};

struct Inputs {
  Scenario scenario;
  CEConfig ce;
  Json doc;
  bool scenario_from_file = false;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

Json base_document(const Options& opt) {
  Json doc = {{"scenario", to_json(ScenarioConfig{})}, {"ce", to_json(CEConfig{})}};
  if (!opt.config.empty()) {
    const Json file = read_json_file(opt.config);
    if (!file.is_object()) throw ConfigError("config", "expected a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it) {
      if (it.key() != "scenario" && it.key() != "ce") {
        throw ConfigError(it.key(), "unknown config section (expected scenario, ce)");
      }
      if (!it.value().is_object()) throw ConfigError(it.key(), "expected a JSON object");
      doc[it.key()].update(it.value(), true);
    }
  }
  if (!opt.scenario.empty()) doc["scenario"] = read_json_file(opt.scenario);
  if (opt.devices) {
    if (!opt.scenario.empty()) throw ConfigError("devices", "cannot resize a scenario file");
    doc["scenario"]["devices"] = *opt.devices;
  }
  for (const auto& s : opt.sets) apply_override(doc, s);
  return doc;
}

Inputs materialize(Json doc, const Options& opt) {
  Inputs in;
  in.scenario_from_file = !opt.scenario.empty();
  in.ce = ce_config_from_json(doc.at("ce"));
  in.ce.seed = opt.seed;
  if (opt.workers) in.ce.workers = *opt.workers;
  in.ce.validate();
  if (in.scenario_from_file) {
    in.scenario = scenario_from_json(doc.at("scenario"));
    in.scenario.validate();
  } else {
    const auto cfg = scenario_config_from_json(doc.at("scenario"));
    cfg.validate();
    in.scenario = generate_scenario(cfg, opt.seed);
  }
  in.doc = std::move(doc);
  return in;
}

std::vector<PolicyKind> selected_policies(const Options& opt, std::vector<PolicyKind> fallback) {
  if (opt.policies.empty()) return fallback;
  std::vector<PolicyKind> out;
  for (const auto& name : opt.policies) {
    if (name == "all" || name == "ALL") {
      out.assign(std::begin(kAllPolicies), std::end(kAllPolicies));
      continue;
    }
    const auto k = parse_policy(name);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

fs::path prepare_out(const Options& opt) {
  fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void print_devices(const Scenario& sc, std::ostream& out) {
  out << "  id  dist_km  energy_coeff  fmax_GHz  pmax_W  gain_dB  local\n";
  for (const auto& d : sc.devices) {
    char line[160];
    std::snprintf(line, sizeof line, "%4d  %7.4f  %12.4g  %8.4f  %6.4f  %7.2f  %5lld\n", d.id,
                  d.distance_km, d.energy_coeff, d.max_freq / 1e9, d.max_power,
                  10.0 * std::log10(d.channel_gain), static_cast<long long>(d.local_count));
    out << line;
  }
}

int cmd_generate(const Options& opt, std::ostream& out) {
  if (!opt.scenario.empty()) throw ConfigError("scenario", "generate builds a new scenario");
  const auto in = materialize(base_document(opt), opt);
  const auto dir = prepare_out(opt);
  write_json_file(dir / "scenario.json", to_json(in.scenario));
  write_text_file(dir / "devices.csv", device_table_csv(in.scenario));
  print_devices(in.scenario, out);
  return kExitOk;
}

CheckOptions check_options_for(PolicyKind kind) {
  CheckOptions c;
  c.expect_error_target = kind != PolicyKind::TFL;
  return c;
}

int cmd_solve(const Options& opt, std::ostream& out) {
  const auto in = materialize(base_document(opt), opt);
  const auto kinds = selected_policies(opt, {PolicyKind::FIMI});
  if (kinds.size() != 1) throw ConfigError("policy", "solve takes exactly one policy");
  const auto kind = kinds.front();
  const auto& sc = in.scenario;

  auto plan = plan_policy(kind, sc, in.ce);
  const auto metrics = round_metrics(sc, plan.allocation);
  const auto check = check_constraints(sc, plan.allocation, check_options_for(kind));

  const auto dir = prepare_out(opt);
  write_json_file(dir / "allocation.json", to_json(plan.allocation));
  write_text_file(dir / "ce_trace.csv", ce_trace_csv(plan.trace));
  write_text_file(dir / "augmentation.csv", augmentation_csv(sc, plan.allocation));
  write_text_file(dir / "nu_trace.csv", nu_trace_csv(plan.split.compute.trace));
  write_text_file(dir / "varpi_trace.csv", varpi_trace_csv(plan.split.comm.trace));
  Json report = {{"policy", to_string(kind)},
                 {"seed", opt.seed},
                 {"objective", to_json(plan.report)},
                 {"round", to_json(metrics)},
                 {"average_local_error", average_local_error(sc, plan.allocation)},
                 {"constraints", to_json(check)}};
  write_json_file(dir / "report.json", report);

  out << "policy " << to_string(kind) << "\n"
      << "objective_j " << fmt("%.6g", plan.report.objective_j) << "\n"
      << "round_latency_s " << fmt("%.9g", check.round_latency_s) << " (t_max "
      << fmt("%.9g", sc.t_max) << ")\n"
      << "global_error " << fmt("%.9g", check.global_error) << " (delta_max "
      << fmt("%.9g", sc.delta_max) << ")\n"
      << "ce_iterations " << plan.report.iterations
      << (plan.report.converged ? " converged" : " iteration cap") << "\n"
      << "constraints " << (check.all_ok() ? "ok" : "VIOLATED") << "\n";
  return check.all_ok() ? kExitOk : kExitInternal;
}

LayeredVector read_gradient(const std::string& path) {
  return layered_vector_from_json(read_json_file(path));
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  const auto in = materialize(base_document(opt), opt);
  const auto& sc = in.scenario;
  const auto kinds = selected_policies(
      opt, std::vector<PolicyKind>(std::begin(kAllPolicies), std::end(kAllPolicies)));
  const double target = opt.target.value_or(sc.delta_max);
  if (opt.horizon && *opt.horizon < 0) throw ConfigError("horizon", "must be >= 0");
  const auto dir = prepare_out(opt);

  Json summary = Json::object();
  summary["target_error"] = target;
  Json policies = Json::object();
  for (auto kind : kinds) {
    const std::string name(to_string(kind));
    Json entry;
    try {
      const auto run = run_policy(kind, sc, in.ce, opt.seed, opt.horizon);
      write_text_file(dir / ("trajectory_" + name + ".csv"), trajectory_csv(run.trajectory));
      entry["objective"] = to_json(run.report);
      entry["round"] = to_json(run.per_round);
      entry["average_local_error"] = run.trajectory.avg_local_error;
      const auto at = metrics_at_target(run.trajectory, target);
      if (at) {
        entry["at_target"] = {{"rounds", at->rounds},
                              {"energy_j", at->energy_j},
                              {"latency_s", at->latency_s},
                              {"uplink_bits", at->uplink_bits}};
        out << name << " rounds " << at->rounds << " energy_j " << fmt("%.6g", at->energy_j)
            << " latency_s " << fmt("%.6g", at->latency_s) << "\n";
      } else {
        entry["at_target"] = "NotReached";
        out << name << " NotReached\n";
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PolicyInfeasible) throw;
      entry["error"] = e.what();
      out << name << " infeasible\n";
    }
    policies[name] = entry;
  }
  summary["policies"] = policies;

  if (!opt.gradient_ref.empty()) {
    if (opt.gradient_dev.empty()) throw ConfigError("gradient-dev", "needs at least one file");
    const auto ref = read_gradient(opt.gradient_ref);
    Json sims = Json::array();
    for (const auto& path : opt.gradient_dev) {
      const double s = gradient_similarity(ref, read_gradient(path));
      const std::string label = fs::path(path).filename().string();
      sims.push_back({{"file", label}, {"similarity", s}});
      out << "similarity " << label << " " << fmt("%.6f", s) << "\n";
    }
    summary["gradient_similarity"] = sims;
  } else if (!opt.gradient_dev.empty()) {
    throw ConfigError("gradient-ref", "required with --gradient-dev");
  }
  write_json_file(dir / "summary.json", summary);
  return kExitOk;
}

int cmd_fit(const Options& opt, std::ostream& out) {
  if (opt.data.empty()) throw ConfigError("data", "fit needs --data FILE");
  Json doc = base_document(opt);
  const auto samples = parse_fit_samples_csv(read_text_file(opt.data));
  const auto fit = fit_power_law(samples);
  CurveParams curve = curve_from_json(doc.at("scenario").at("curve"));
  curve.alpha = fit.alpha;
  curve.beta = fit.beta;
  curve.gamma = fit.gamma;
  const auto dir = prepare_out(opt);
  write_json_file(dir / "curve.json", to_json(curve));
  out << "alpha " << fmt("%.9g", fit.alpha) << "\n"
      << "beta " << fmt("%.9g", fit.beta) << "\n"
      << "gamma " << fmt("%.9g", fit.gamma) << "\n"
      << "residual_norm " << fmt("%.3g", fit.residual_norm) << "\n";
  return kExitOk;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
  const auto eq = opt.sweep.find('=');
  if (opt.sweep.empty() || eq == std::string::npos || eq == 0) {
    throw ConfigError("sweep", "expected FIELD=v1,v2,...");
  }
  const std::string field_name = opt.sweep.substr(0, eq);
  std::vector<std::string> values;
  std::stringstream list(opt.sweep.substr(eq + 1));
  for (std::string v; std::getline(list, v, ',');) {
    if (!v.empty()) values.push_back(v);
  }
  if (values.empty()) throw ConfigError("sweep", "empty value list");
  const auto kinds = selected_policies(opt, {PolicyKind::FIMI});

  const Json base = base_document(opt);
  std::vector<Inputs> points;
  for (const auto& v : values) {
    Json doc = base;
    apply_override(doc, field_name, v);
    points.push_back(materialize(std::move(doc), opt));
  }

  std::string csv =
      "field,value,policy,status,objective_j,compute_energy_j,comm_energy_j,round_latency_s,"
      "avg_local_error,error_budget,rounds_to_target,energy_to_target_j,latency_to_target_s,"
      "uplink_to_target_bits\n";
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& sc = points[p].scenario;
    const double budget = error_budget(sc.size(), sc.curve, sc.delta_max);
    const double target = opt.target.value_or(sc.delta_max);
    for (auto kind : kinds) {
      std::string row = field_name + ',' + values[p] + ',' + std::string(to_string(kind)) + ',';
      try {
        const auto run = run_policy(kind, sc, points[p].ce, opt.seed, opt.horizon);
        const auto at = metrics_at_target(run.trajectory, target);
        row += "ok," + fmt_double(run.report.objective_j) + ',' +
               fmt_double(run.report.compute_energy_j) + ',' +
               fmt_double(run.report.comm_energy_j) + ',' + fmt_double(run.per_round.latency_s) +
               ',' + fmt_double(run.trajectory.avg_local_error) + ',' + fmt_double(budget) + ',';
        if (at) {
          row += std::to_string(at->rounds) + ',' + fmt_double(at->energy_j) + ',' +
                 fmt_double(at->latency_s) + ',' + fmt_double(at->uplink_bits);
        } else {
          row += ",,,";
        }
        out << field_name << "=" << values[p] << " " << to_string(kind) << " objective_j "
            << fmt("%.6g", run.report.objective_j) << "\n";
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::PolicyInfeasible) throw;
        row += "infeasible,,,,,," + fmt_double(budget) + ",,,,";
        out << field_name << "=" << values[p] << " " << to_string(kind) << " infeasible\n";
      }
      csv += row + '\n';
    }
  }
  const auto dir = prepare_out(opt);
  write_text_file(dir / "sweep.csv", csv);
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError: return kExitConfig;
    case ErrorKind::InfeasibleBudget: return kExitInfeasibleBudget;
    case ErrorKind::InfeasibleBandwidth: return kExitInfeasibleBandwidth;
    case ErrorKind::NoFeasibleRegion: return kExitNoFeasibleRegion;
    case ErrorKind::PolicyInfeasible: return kExitPolicyInfeasible;
    case ErrorKind::IoError: return kExitIo;
    case ErrorKind::DeviceInfeasible: return kExitDeviceInfeasible;
    default: return kExitModel;
  }
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "JSON config with 'scenario' and 'ce' sections");
  cmd->add_option("--seed", opt.seed, "seed for every random draw");
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--set", opt.sets, "FIELD=VALUE override (repeatable)");
  cmd->add_option("--workers", opt.workers, "concurrent sample evaluations");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"edge-side synthetic data planner", "edgegen"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "write a random scenario");
  add_common(gen, opt);
  gen->add_option("--devices", opt.devices, "number of devices");

  auto* solve = app.add_subcommand("solve", "plan one training round");
  add_common(solve, opt);
  solve->add_option("--scenario", opt.scenario, "scenario JSON (default: generate one)");
  solve->add_option("--devices", opt.devices, "number of devices when generating");
  solve->add_option("--policy", opt.policies, "FIMI, TFL, HDC or UNIFORM_BW");

  auto* sim = app.add_subcommand("simulate", "simulate training under each policy");
  add_common(sim, opt);
  sim->add_option("--scenario", opt.scenario, "scenario JSON (default: generate one)");
  sim->add_option("--devices", opt.devices, "number of devices when generating");
  sim->add_option("--policy", opt.policies, "policies to run (repeatable, or 'all')");
  sim->add_option("--target", opt.target, "global error target (default: delta_max)");
  sim->add_option("--horizon", opt.horizon, "rounds to simulate (default: global_rounds)");
  sim->add_option("--gradient-ref", opt.gradient_ref, "reference gradient JSON");
  sim->add_option("--gradient-dev", opt.gradient_dev, "device gradient JSON (repeatable)");

  auto* fit = app.add_subcommand("fit", "fit the learning curve to measurements");
  add_common(fit, opt);
  fit->add_option("--data", opt.data, "CSV with data_amount,observed_error")->required();

  auto* sweep = app.add_subcommand("sweep", "solve over a list of parameter values");
  add_common(sweep, opt);
  sweep->add_option("--scenario", opt.scenario, "scenario JSON (default: regenerate per value)");
  sweep->add_option("--devices", opt.devices, "number of devices when generating");
  sweep->add_option("--sweep", opt.sweep, "FIELD=v1,v2,...")->required();
  sweep->add_option("--policy", opt.policies, "policies to run (repeatable, or 'all')");
  sweep->add_option("--target", opt.target, "global error target (default: delta_max)");
  sweep->add_option("--horizon", opt.horizon, "rounds to simulate (default: global_rounds)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(opt, out);
    if (*solve) return cmd_solve(opt, out);
    if (*sim) return cmd_simulate(opt, out);
    if (*fit) return cmd_fit(opt, out);
    return cmd_sweep(opt, out);
  } catch (const InfeasibleBudget& e) {
    err << "error: InfeasibleBudget: " << e.what() << "\n"
        << "required error budget " << fmt("%.17g", e.budget()) << "\n"
        << "achievable lower bound " << fmt("%.17g", e.lower()) << "\n"
        << "achievable upper bound " << fmt("%.17g", e.upper()) << "\n";
    return kExitInfeasibleBudget;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace edgegen
