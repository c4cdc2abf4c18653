// Acceptance checks: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "edgegen/augmentation.hpp"
#include "edgegen/ce_optimizer.hpp"
#include "edgegen/cli.hpp"
#include "edgegen/errors.hpp"
#include "edgegen/experiment.hpp"
#include "edgegen/io.hpp"
#include "edgegen/learning_curve.hpp"
#include "edgegen/rng.hpp"
#include "edgegen/solver_comm.hpp"
#include "edgegen/solver_compute.hpp"
#include "edgegen/system_model.hpp"

using namespace edgegen;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

// Allocations gathered from every full solve, checked together by criterion 4.
struct SolvedPlan {
  Scenario sc;
  Allocation alloc;
  bool error_target = true;
};
std::vector<SolvedPlan> g_plans;

// Random instances shared by criteria 1-3.
struct ComputeCase {
  Scenario sc;
  std::vector<double> t_cmp;
  double budget = 0.0;
};

ComputeCase compute_case(int devices, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.devices = devices;
  ComputeCase c;
  c.sc = generate_scenario(cfg, seed);
  Rng rng = Rng::stream(seed, {0xA1});
  double lo = 0.0, hi = 0.0;
  for (const auto& dev : c.sc.devices) {
    const auto b = eta_bounds(dev, c.sc);
    c.t_cmp.push_back(rng.uniform(b.lower + 0.05 * (b.upper - b.lower), b.upper) * c.sc.t_max);
    const auto d = delta_bounds(dev, c.t_cmp.back(), c.sc);
    lo += d.lower;
    hi += d.upper;
  }
  c.budget = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo));
  return c;
}

CommSubproblem comm_case(int devices, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.devices = devices;
  for (std::uint64_t attempt = 0;; ++attempt) {
    const auto sc = generate_scenario(cfg, seed * 1000 + attempt);
    Rng rng = Rng::stream(seed, {0xA2, attempt});
    std::vector<double> t_com;
    for (int i = 0; i < devices; ++i) t_com.push_back(rng.uniform(10.0, 50.0));
    try {
      return make_comm_subproblem(sc, t_com);
    } catch (const Error&) {
    }
  }
}

constexpr int kInstances = 50;

Verdict criterion1() {
  const auto t0 = Clock::now();
  int bad = 0;
  double worst_gap = -1e300, worst_sum = 0.0;
  for (int k = 0; k < kInstances; ++k) {
    const int n = 2 + k % 2;
    const auto c = compute_case(n, static_cast<std::uint64_t>(k));
    const auto sol = solve_p3(c.sc, c.t_cmp, c.budget);
    const double step = 1e-3;
    const auto oracle = oracle_p3(c.sc, c.t_cmp, c.budget, step);
    const double bound = oracle_p3_resolution(c.sc, c.t_cmp, step);
    const double sum = std::accumulate(sol.delta.begin(), sol.delta.end(), 0.0);
    worst_gap = std::max(worst_gap, (sol.objective - oracle.objective) / bound);
    worst_sum = std::max(worst_sum, std::abs(sum - c.budget) / n);
    if (!(sol.objective <= oracle.objective + bound) || std::abs(sum - c.budget) > 1e-9 * n) ++bad;
  }
  const double secs = seconds_since(t0);
  return {1, "compute allocation matches exhaustive oracle", bad == 0 && secs < 10.0,
          std::to_string(kInstances - bad) + "/" + std::to_string(kInstances) +
              " instances; worst (solver-oracle)/bound " + fmt("%.3g", worst_gap) +
              "; worst |sum-budget|/I " + fmt("%.2g", worst_sum) + "; " + fmt("%.2f", secs) + " s"};
}

Verdict criterion2() {
  const auto t0 = Clock::now();
  int bad = 0;
  double worst_gap = -1e300, worst_band = 0.0, worst_power = 0.0;
  for (int k = 0; k < kInstances; ++k) {
    const int n = 2 + k % 2;
    const auto s = comm_case(n, static_cast<std::uint64_t>(k));
    const auto sol = solve_p4(s);
    const double step = 0.002 * s.bandwidth_total;
    const auto oracle = oracle_p4(s, step);
    const double bound = oracle_p4_resolution(s, step);
    const double band = std::accumulate(sol.bandwidth.begin(), sol.bandwidth.end(), 0.0);
    bool ok = sol.objective <= oracle.objective + bound &&
              std::abs(band - s.bandwidth_total) <= 1e-6 * s.bandwidth_total;
    for (int i = 0; i < n; ++i) {
      const auto k2 = static_cast<std::size_t>(i);
      worst_power = std::max(worst_power, sol.power[k2] / s.max_power[k2] - 1.0);
      if (sol.power[k2] > s.max_power[k2] * (1 + 1e-9)) ok = false;
    }
    worst_gap = std::max(worst_gap, (sol.objective - oracle.objective) / bound);
    worst_band = std::max(worst_band, std::abs(band - s.bandwidth_total) / s.bandwidth_total);
    if (!ok) ++bad;
  }
  const double secs = seconds_since(t0);
  return {2, "bandwidth allocation matches exhaustive oracle", bad == 0 && secs < 10.0,
          std::to_string(kInstances - bad) + "/" + std::to_string(kInstances) +
              " instances; worst (solver-oracle)/bound " + fmt("%.3g", worst_gap) +
              "; worst |sum b-B|/B " + fmt("%.2g", worst_band) + "; worst P/Pmax-1 " +
              fmt("%.2g", worst_power) + "; " + fmt("%.2f", secs) + " s"};
}

Verdict criterion3() {
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (int k = 0; k < kInstances; ++k) {
    const int n = 2 + k % 2;
    const auto c = compute_case(n, static_cast<std::uint64_t>(k));
    const auto sub = make_compute_subproblem(c.sc, c.t_cmp, c.budget);
    const auto sol = solve_p3(c.sc, sub);
    for (int i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(i);
      const double span = sub.delta_max[j] - sub.delta_min[j];
      if (sol.delta[j] <= sub.delta_min[j] + 1e-9 * span ||
          sol.delta[j] >= sub.delta_max[j] - 1e-9 * span) {
        continue;
      }
      ++checked;
      const double lhs = 3.0 * sub.rho[j] / c.sc.curve.beta *
                         std::pow(sol.delta[j] + c.sc.curve.gamma,
                                  -(c.sc.curve.beta + 3.0) / c.sc.curve.beta);
      const double err = std::abs(lhs - sol.nu) / sol.nu;
      worst = std::max(worst, err);
      if (err > 1e-6) ++bad;
    }
    const auto s = comm_case(n, static_cast<std::uint64_t>(k));
    const auto cs = solve_p4(s);
    for (int i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(i);
      if (cs.bandwidth[j] <= s.b_min[j] * (1 + 1e-9)) continue;
      ++checked;
      const double err = std::abs(q_function(cs.bandwidth[j], s, i) + cs.varpi) / cs.varpi;
      worst = std::max(worst, err);
      if (err > 1e-6) ++bad;
    }
  }
  return {3, "KKT stationarity at interior devices", bad == 0 && checked > 0,
          std::to_string(checked - bad) + "/" + std::to_string(checked) +
              " interior devices; worst relative residual " + fmt("%.2g", worst)};
}

Verdict criterion4() {
  int bad = 0;
  double worst_err = 0.0, worst_lat = 0.0;
  for (const auto& p : g_plans) {
    CheckOptions opt;
    opt.expect_error_target = p.error_target;
    const auto rep = check_constraints(p.sc, p.alloc, opt);
    worst_lat = std::max(worst_lat, std::abs(rep.round_latency_s - p.sc.t_max) / p.sc.t_max);
    if (p.error_target) {
      worst_err = std::max(worst_err, std::abs(rep.global_error - p.sc.delta_max) / p.sc.delta_max);
    }
    if (!rep.all_ok()) ++bad;
  }
  const int n = static_cast<int>(g_plans.size());
  return {4, "error and latency constraints active at every solution", bad == 0 && n > 0,
          std::to_string(n - bad) + "/" + std::to_string(n) +
              " allocations pass all constraint checks; worst |delta-delta_max|/delta_max " +
              fmt("%.2g", worst_err) + "; worst |T-T_max|/T_max " + fmt("%.2g", worst_lat)};
}

Verdict criterion5() {
  const auto t0 = Clock::now();
  long long instances = 0, bad = 0;
  double worst_level = 0.0;
  for (int cats = 1; cats <= 4; ++cats) {
    std::vector<std::int64_t> local(static_cast<std::size_t>(cats), 0);
    std::function<void(std::size_t)> each_local = [&](std::size_t c) {
      if (c < local.size()) {
        for (std::int64_t v = 0; v <= 6; ++v) {
          local[c] = v;
          each_local(c + 1);
        }
        return;
      }
      const auto local_total = std::accumulate(local.begin(), local.end(), std::int64_t{0});
      for (std::int64_t budget = 0; budget <= 10; ++budget) {
        if (local_total + budget == 0) continue;
        ++instances;
        const auto got = solve_p8(local, budget);
        const double h = data_entropy(local, got.gen_counts);
        double best = -1.0;
        std::vector<std::int64_t> gen(local.size(), 0);
        std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t k, std::int64_t left) {
          if (k + 1 == gen.size()) {
            gen[k] = left;
            best = std::max(best, data_entropy(local, gen));
            return;
          }
          for (std::int64_t g = 0; g <= left; ++g) {
            gen[k] = g;
            rec(k + 1, left - g);
          }
        };
        rec(0, budget);
        bool ok = std::abs(h - best) <= 1e-12;
        const auto w = optimal_augmentation(local, static_cast<double>(budget));
        for (std::size_t k = 0; k < local.size(); ++k) {
          const double d = static_cast<double>(local[k]);
          double viol = 0.0;
          if (w.gen[k] > 0.0) viol = std::abs(d + w.gen[k] - w.level);
          else viol = std::max(0.0, w.level - d);
          worst_level = std::max(worst_level, viol);
          if (viol > 1e-12 * std::max(1.0, w.level)) ok = false;
        }
        if (!ok) ++bad;
      }
    };
    each_local(0);
  }
  const double secs = seconds_since(t0);
  return {5, "category water-filling exact against enumeration", bad == 0 && secs < 5.0,
          std::to_string(instances - bad) + "/" + std::to_string(instances) +
              " instances; worst water-level violation " + fmt("%.2g", worst_level) + "; " +
              fmt("%.2f", secs) + " s"};
}

Verdict criterion6() {
  int bad = 0;
  double worst_gap = -1e300, worst_secs = 0.0;
  int worst_iters = 0;
  ScenarioConfig cfg;
  cfg.devices = 2;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sc = generate_scenario(cfg, 600 + seed);
    const auto t0 = Clock::now();
    CEConfig ce;
    ce.seed = seed;
    const auto plan = solve_p1(sc, ce);
    const double secs = seconds_since(t0);
    g_plans.push_back({sc, plan.allocation, true});

    const auto b0 = eta_bounds(sc.devices[0], sc);
    const auto b1 = eta_bounds(sc.devices[1], sc);
    double grid = std::numeric_limits<double>::infinity();
    std::vector<double> eta(2);
    for (int a = 0; a < 200; ++a) {
      eta[0] = b0.lower + (b0.upper - b0.lower) * a / 199.0;
      for (int b = 0; b < 200; ++b) {
        eta[1] = b1.lower + (b1.upper - b1.lower) * b / 199.0;
        const auto out = evaluate_split(eta, sc);
        if (out.feasible()) grid = std::min(grid, *out.energy);
      }
    }
    const double gap = (plan.report.objective_j - grid) / grid;
    worst_gap = std::max(worst_gap, gap);
    worst_iters = std::max(worst_iters, plan.report.iterations);
    worst_secs = std::max(worst_secs, secs);
    if (!(gap <= 0.02) || !plan.report.converged || plan.report.iterations > 50 || secs >= 60.0) ++bad;
  }
  return {6, "cross-entropy search near the 200x200 grid optimum", bad == 0,
          std::to_string(10 - bad) + "/10 scenarios; worst relative gap " +
              fmt("%.3g", worst_gap) + "; worst iterations " + std::to_string(worst_iters) +
              "; slowest " + fmt("%.2f", worst_secs) + " s"};
}

Verdict criterion7() {
  std::vector<FitSample> clean;
  for (int d = 100; d <= 3200; d += 100) clean.push_back({d, 2.0 * std::pow(d, -0.4) - 0.1});
  const auto f = fit_power_law(clean);
  const double noiseless = std::max(
      {std::abs(f.alpha - 2.0), std::abs(f.beta - 0.4), std::abs(f.gamma - 0.1)});
  double worst_rel = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto noisy = clean;
    for (auto& s : noisy) s.observed_error *= 1.0 + 0.005 * rng.normal();
    const auto g = fit_power_law(noisy);
    worst_rel = std::max({worst_rel, std::abs(g.alpha - 2.0) / 2.0, std::abs(g.beta - 0.4) / 0.4,
                          std::abs(g.gamma - 0.1) / 0.1});
  }
  return {7, "learning-curve fit recovers generating parameters",
          noiseless <= 1e-6 && worst_rel <= 0.10,
          "noiseless max abs error " + fmt("%.2g", noiseless) +
              "; 0.5% noise worst relative error over 20 seeds " + fmt("%.3g", worst_rel)};
}

double spearman(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return y[a] < y[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && y[order[j + 1]] == y[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  double mx = 0.5 * static_cast<double>(n + 1), sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i + 1) - mx, dy = rank[i] - mx;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return syy == 0.0 ? 0.0 : sxy / std::sqrt(sxx * syy);
}

Verdict criterion8() {
  const auto t0 = Clock::now();
  const CEConfig ce;
  std::vector<double> total(4, 0.0);
  std::vector<int> reached(4, 0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sc = generate_scenario(ScenarioConfig{}, seed);
    for (std::size_t p = 0; p < 4; ++p) {
      const auto kind = kAllPolicies[p];
      double energy = std::numeric_limits<double>::infinity();
      try {
        const auto run = run_policy(kind, sc, ce, seed);
        g_plans.push_back({sc, run.allocation, kind != PolicyKind::TFL});
        if (const auto at = metrics_at_target(run.trajectory, sc.delta_max)) {
          energy = at->energy_j;
          ++reached[p];
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::PolicyInfeasible) throw;
      }
      total[p] += energy;
    }
  }
  const double secs = seconds_since(t0);
  bool ordered = true;
  std::ostringstream os;
  for (std::size_t p = 0; p < 4; ++p) {
    const double mean = total[p] / 10.0;
    if (p > 0 && !(total[0] <= total[p] * (1 + 1e-12))) ordered = false;
    os << to_string(kAllPolicies[p]) << " "
       << (std::isinf(mean) ? std::string("inf") : fmt("%.1f", mean)) << " J (reached "
       << reached[p] << "/10); ";
  }
  os << fmt("%.1f", secs) << " s";
  return {8, "FIMI has the lowest mean energy to reach the error target",
          ordered && std::isfinite(total[0]) && secs < 300.0, os.str()};
}

Verdict criterion9() {
  ScenarioConfig cfg;
  cfg.layout = "graded";
  CEConfig ce;
  double sum = 0.0, worst = -1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sc = generate_scenario(cfg, 900 + seed);
    ce.seed = seed;
    const auto plan = solve_p1(sc, ce);
    g_plans.push_back({sc, plan.allocation, true});
    std::vector<double> gen;
    for (const auto& a : plan.allocation.devices) gen.push_back(a.d_gen);
    const double r = spearman(gen);
    sum += r;
    worst = std::max(worst, r);
  }
  const double mean = sum / 10.0;
  return {9, "synthesized data decreases with energy cost and distance", mean <= -0.8,
          "mean Spearman " + fmt("%.3f", mean) + " over 10 seeds (least negative " +
              fmt("%.3f", worst) + ")"};
}

std::vector<std::string> files_in(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

Verdict criterion10() {
  const auto root = fs::temp_directory_path() / "edgegen_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string curve =
      (fs::path(EDGEGEN_SOURCE_DIR) / "data" / "proxy_learning_curve.csv").string();
  write_text_file(root / "ref.json", "[[0.5, -1.0, 2.0], [3.0, 0.25]]");
  write_text_file(root / "dev.json", "[[0.4, -0.8, 2.5], [-1.0, 0.5]]");
  const std::vector<std::string> small = {"--seed", "11", "--set", "devices=6"};
  struct Command {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Command> commands = {
      {"generate", {"generate"}},
      {"solve", {"solve", "--policy", "FIMI"}},
      {"simulate",
       {"simulate", "--policy", "all", "--gradient-ref", (root / "ref.json").string(),
        "--gradient-dev", (root / "dev.json").string()}},
      {"sweep", {"sweep", "--sweep", "t_max=45,60", "--policy", "FIMI", "--policy", "UNIFORM_BW"}},
      {"fit", {"fit", "--data", curve}},
  };
  int identical = 0, total = 0;
  std::string failures;
  for (const auto& cmd : commands) {
    std::vector<fs::path> dirs;
    for (const char* workers : {"1", "1", "3"}) {
      const auto dir = root / (cmd.name + "_" + std::to_string(dirs.size()));
      auto args = cmd.args;
      args.insert(args.end(), small.begin(), small.end());
      if (cmd.name != "generate" && cmd.name != "fit") {
        args.push_back("--workers");
        args.push_back(workers);
      }
      if (cmd.name == "fit") args.resize(args.size() - 2);
      args.push_back("--out");
      args.push_back(dir.string());
      std::ostringstream out, err;
      const int code = run_cli(args, out, err);
      if (code != 0) failures += cmd.name + " exit " + std::to_string(code) + " ";
      dirs.push_back(dir);
    }
    const auto names = files_in(dirs[0]);
    for (std::size_t k = 1; k < dirs.size(); ++k) {
      if (files_in(dirs[k]) != names) {
        failures += cmd.name + " file set differs ";
        continue;
      }
      for (const auto& n : names) {
        ++total;
        if (read_text_file(dirs[0] / n) == read_text_file(dirs[k] / n)) ++identical;
        else failures += cmd.name + "/" + n + " ";
      }
    }
  }
  fs::remove_all(root);
  return {10, "byte-identical outputs across runs and worker counts",
          failures.empty() && total > 0,
          std::to_string(identical) + "/" + std::to_string(total) +
              " file comparisons identical over 5 commands" +
              (failures.empty() ? "" : "; mismatches: " + failures)};
}

}  // namespace

int main() {
  std::vector<Verdict> verdicts;
  auto run = [&](Verdict (*fn)()) {
    try {
      verdicts.push_back(fn());
    } catch (const std::exception& e) {
      verdicts.push_back({0, "criterion raised", false, e.what()});
    }
  };
  run(criterion1);
  run(criterion2);
  run(criterion3);
  run(criterion5);
  run(criterion6);
  run(criterion7);
  run(criterion8);
  run(criterion9);
  run(criterion4);
  run(criterion10);
  std::stable_sort(verdicts.begin(), verdicts.end(),
                   [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  int failed = 0;
  for (const auto& v : verdicts) {
    std::printf("[%s] criterion %d: %s -- %s\n", v.pass ? "PASS" : "FAIL", v.id, v.title.c_str(),
                v.detail.c_str());
    if (!v.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(verdicts.size()) - failed,
              verdicts.size());
  return failed == 0 ? 0 : 1;
}
