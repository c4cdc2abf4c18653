#include "edgegen/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "edgegen/augmentation.hpp"
#include "edgegen/errors.hpp"
#include "edgegen/learning_curve.hpp"

namespace edgegen {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::FIMI: return "FIMI";
    case PolicyKind::TFL: return "TFL";
    case PolicyKind::HDC: return "HDC";
    case PolicyKind::UNIFORM_BW: return "UNIFORM_BW";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view name) {
  std::string upper(name);
  for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (auto kind : kAllPolicies)
    if (to_string(kind) == upper) return kind;
  throw ConfigError("policy", "unknown policy '" + std::string(name) +
                                  "' (expected FIMI, TFL, HDC or UNIFORM_BW)");
}

Trajectory simulate_trajectory(const RoundMetrics& per_round, double avg_local_error,
                               const CurveParams& curve, int horizon) {
  Trajectory t;
  t.avg_local_error = avg_local_error;
  t.points.reserve(static_cast<std::size_t>(horizon) + 1);
  for (int n = 0; n <= horizon; ++n) {
    TrajectoryPoint p;
    p.round = n;
    p.delta = std::exp(n * (avg_local_error - 1.0) / curve.zeta);
    p.cum_energy_j = n * per_round.energy_j;
    p.cum_latency_s = n * per_round.latency_s;
    p.cum_uplink_bits = n * per_round.uplink_bits;
    t.points.push_back(p);
  }
  return t;
}

double average_local_error(const Scenario& sc, const Allocation& alloc) {
  double sum = 0.0;
  for (std::size_t i = 0; i < sc.devices.size(); ++i) {
    sum += local_error(static_cast<double>(sc.devices[i].local_count),
                       alloc.devices[i].d_gen, sc.curve);
  }
  return sum / static_cast<double>(sc.devices.size());
}

PlanResult plan_policy(PolicyKind kind, const Scenario& sc, const CEConfig& ce) {
  SplitPolicy split;
  if (kind == PolicyKind::TFL) split.data = DataMode::NoSynthesis;
  if (kind == PolicyKind::UNIFORM_BW) split.bandwidth = BandwidthMode::Uniform;
  auto plan = solve_p1(sc, ce, split);
  if (kind == PolicyKind::HDC) {
    for (std::size_t i = 0; i < sc.devices.size(); ++i) {
      auto& a = plan.allocation.devices[i];
      a.category_gen = scarcest_category_augmentation(sc.devices[i].category_counts,
                                                      std::llround(a.d_gen))
                           .gen_counts;
    }
  }
  return plan;
}

PolicyRun run_policy(PolicyKind kind, const Scenario& sc, const CEConfig& ce,
                     std::uint64_t seed, std::optional<int> horizon) {
  CEConfig cfg = ce;
  cfg.seed = seed;
  PolicyRun run;
  run.kind = kind;
  try {
    auto plan = plan_policy(kind, sc, cfg);
    run.allocation = std::move(plan.allocation);
    run.report = plan.report;
    run.trace = std::move(plan.trace);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    throw Error(ErrorKind::PolicyInfeasible,
                std::string(to_string(kind)) + " infeasible: " + e.what());
  }
  run.per_round = round_metrics(sc, run.allocation);
  run.trajectory = simulate_trajectory(run.per_round, average_local_error(sc, run.allocation),
                                       sc.curve, horizon.value_or(sc.curve.global_rounds));
  return run;
}

std::optional<TargetMetrics> metrics_at_target(const Trajectory& trajectory,
                                               double target_error) {
  for (const auto& p : trajectory.points) {
    if (p.delta <= target_error * (1.0 + 1e-9)) {
      return TargetMetrics{p.cum_energy_j, p.cum_latency_s, p.cum_uplink_bits, p.round};
    }
  }
  return std::nullopt;
}

double gradient_similarity(const LayeredVector& reference, const LayeredVector& device) {
  if (reference.size() != device.size() || reference.empty()) {
    throw Error(ErrorKind::DegenerateGradient, "gradients must have the same, nonzero layer count");
  }
  double total = 0.0;
  for (std::size_t l = 0; l < reference.size(); ++l) {
    const auto& a = reference[l];
    const auto& b = device[l];
    if (a.size() != b.size()) {
      throw Error(ErrorKind::DegenerateGradient, "layer dimensions differ");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      dot += a[k] * b[k];
      na += a[k] * a[k];
      nb += b[k] * b[k];
    }
    if (na == 0.0 || nb == 0.0) {
      throw Error(ErrorKind::DegenerateGradient, "zero-norm gradient layer");
    }
    const double cosine = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
    total += cosine + 1.0;
  }
  return total / (2.0 * static_cast<double>(reference.size()));
}

namespace {

struct Box {
  double lo;
  double hi;
};

// Local-error box for a device computing for t_cmp seconds, derived straight
// from the data-amount limits.
Box error_box(const Scenario& sc, std::size_t i, double t_cmp) {
  const auto& dev = sc.devices[i];
  const double d_loc = static_cast<double>(dev.local_count);
  const double most = std::min(dev.max_freq * t_cmp / sc.cycles_per_sample(),
                               d_loc + sc.d_gen_max);
  return {local_error(std::max(most, d_loc), 0.0, sc.curve),
          local_error(d_loc, 0.0, sc.curve)};
}

double compute_cost(const Scenario& sc, std::size_t i, double t_cmp, double delta) {
  const double data = std::pow((sc.curve.gamma + delta) / sc.curve.alpha, -1.0 / sc.curve.beta);
  const double freq = sc.cycles_per_sample() * data / t_cmp;
  return sc.local_epochs * sc.devices[i].energy_coeff * sc.workload_per_sample * data * freq *
         freq;
}

// Enumerates grid points x_0..x_{n-2} from lo upward in `step`; the last
// coordinate closes the sum.
template <typename Score>
OracleResult simplex_scan(const std::vector<Box>& boxes, double total, double step,
                          Score&& score) {
  const std::size_t n = boxes.size();
  if (n == 0 || n > 3) {
    throw Error(ErrorKind::InvalidAllocation, "oracle handles one to three devices");
  }
  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<double> x(n);
  auto consider = [&]() {
    double free_sum = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) free_sum += x[k];
    x[n - 1] = total - free_sum;
    const auto& last = boxes[n - 1];
    const double slack = 1e-12 * std::max(1.0, std::abs(total));
    if (x[n - 1] < last.lo - slack || x[n - 1] > last.hi + slack) return;
    x[n - 1] = std::clamp(x[n - 1], last.lo, last.hi);
    ++best.evaluated;
    const double value = score(x);
    if (value < best.objective) {
      best.objective = value;
      best.argmin = x;
    }
  };
  auto count = [&](const Box& b) {
    return static_cast<long long>(std::floor((b.hi - b.lo) / step + 1e-9));
  };
  if (n == 1) {
    consider();
  } else if (n == 2) {
    for (long long a = 0; a <= count(boxes[0]); ++a) {
      x[0] = boxes[0].lo + a * step;
      consider();
    }
  } else {
    for (long long a = 0; a <= count(boxes[0]); ++a) {
      x[0] = boxes[0].lo + a * step;
      for (long long b = 0; b <= count(boxes[1]); ++b) {
        x[1] = boxes[1].lo + b * step;
        consider();
      }
    }
  }
  return best;
}

}  // namespace

OracleResult oracle_p3(const Scenario& sc, std::span<const double> t_cmp, double budget,
                       double step) {
  std::vector<Box> boxes;
  for (std::size_t i = 0; i < sc.devices.size(); ++i) boxes.push_back(error_box(sc, i, t_cmp[i]));
  return simplex_scan(boxes, budget, step, [&](const std::vector<double>& delta) {
    double energy = 0.0;
    for (std::size_t i = 0; i < delta.size(); ++i) energy += compute_cost(sc, i, t_cmp[i], delta[i]);
    return energy;
  });
}

double oracle_p3_resolution(const Scenario& sc, std::span<const double> t_cmp, double step) {
  // |d energy / d delta| is largest at the lower end of each box; use a
  // forward difference there to stay independent of closed-form gradients.
  double slope = 0.0;
  for (std::size_t i = 0; i < sc.devices.size(); ++i) {
    const Box b = error_box(sc, i, t_cmp[i]);
    const double h = 1e-7 * std::max(b.lo, 1e-3);
    const double d = (compute_cost(sc, i, t_cmp[i], b.lo) -
                      compute_cost(sc, i, t_cmp[i], b.lo + h)) / h;
    slope = std::max(slope, d);
  }
  const double n = static_cast<double>(sc.devices.size());
  return 2.0 * std::max(n - 1.0, 1.0) * slope * step * 1.01;
}

namespace {

double uplink_energy(const CommSubproblem& sub, std::size_t i, double b) {
  const double t = sub.t_com[i];
  const double p = sub.noise_psd * b / sub.gain[i] *
                   (std::pow(2.0, sub.update_size / (b * t)) - 1.0);
  return p * t;
}

}  // namespace

OracleResult oracle_p4(const CommSubproblem& sub, double step) {
  std::vector<Box> boxes;
  double others = 0.0;
  for (double b : sub.b_min) others += b;
  for (std::size_t i = 0; i < sub.b_min.size(); ++i) {
    boxes.push_back({sub.b_min[i], sub.bandwidth_total - (others - sub.b_min[i])});
  }
  return simplex_scan(boxes, sub.bandwidth_total, step, [&](const std::vector<double>& b) {
    double energy = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) energy += uplink_energy(sub, i, b[i]);
    return energy;
  });
}

double oracle_p4_resolution(const CommSubproblem& sub, double step) {
  double slope = 0.0;
  for (std::size_t i = 0; i < sub.b_min.size(); ++i) {
    const double b = sub.b_min[i];
    const double h = 1e-7 * b;
    slope = std::max(slope, (uplink_energy(sub, i, b) - uplink_energy(sub, i, b + h)) / h);
  }
  const double n = static_cast<double>(sub.b_min.size());
  return 2.0 * std::max(n - 1.0, 1.0) * slope * step * 1.01;
}

}  // namespace edgegen
