#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgegen/ce_optimizer.hpp"
#include "edgegen/solver_comm.hpp"
#include "edgegen/system_model.hpp"

namespace edgegen {

enum class PolicyKind { FIMI, TFL, HDC, UNIFORM_BW };

std::string_view to_string(PolicyKind kind);
/// Accepts the canonical names (case-insensitive). Throws ConfigError.
PolicyKind parse_policy(std::string_view name);
inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::FIMI, PolicyKind::TFL,
                                              PolicyKind::HDC, PolicyKind::UNIFORM_BW};

struct TrajectoryPoint {
  int round = 0;
  double delta = 1.0;
  double cum_energy_j = 0.0;
  double cum_latency_s = 0.0;
  double cum_uplink_bits = 0.0;
};

struct Trajectory {
  double avg_local_error = 0.0;
  std::vector<TrajectoryPoint> points;  // rounds 0..horizon
};

/// Surrogate training run: global error follows exp(n (avg - 1) / zeta),
/// costs accumulate one round at a time.
Trajectory simulate_trajectory(const RoundMetrics& per_round, double avg_local_error,
                               const CurveParams& curve, int horizon);

struct PolicyRun {
  PolicyKind kind = PolicyKind::FIMI;
  Allocation allocation;
  ObjectiveReport report;
  RoundMetrics per_round;
  Trajectory trajectory;
  std::vector<CETraceRow> trace;
};

/// Plans one round under the policy; solver errors propagate unchanged.
PlanResult plan_policy(PolicyKind kind, const Scenario& sc, const CEConfig& ce);

/// Plans the round under the policy and simulates `horizon` rounds
/// (defaults to the curve's global round count). Solver failures surface as
/// PolicyInfeasible.
PolicyRun run_policy(PolicyKind kind, const Scenario& sc, const CEConfig& ce,
                     std::uint64_t seed, std::optional<int> horizon = std::nullopt);

/// Mean local error implied by an allocation's mixed data amounts.
double average_local_error(const Scenario& sc, const Allocation& alloc);

struct TargetMetrics {
  double energy_j = 0.0;
  double latency_s = 0.0;
  double uplink_bits = 0.0;
  int rounds = 0;
};

/// Cumulative cost at the first round whose global error is <= target
/// (relative slack 1e-9); nullopt when the horizon ends first.
std::optional<TargetMetrics> metrics_at_target(const Trajectory& trajectory,
                                               double target_error);

using LayeredVector = std::vector<std::vector<double>>;

/// Mean over layers of (cos + 1) / 2.
double gradient_similarity(const LayeredVector& reference, const LayeredVector& device);

struct OracleResult {
  double objective = 0.0;
  std::vector<double> argmin;
  long long evaluated = 0;
};

/// Exhaustive scan of the local-error simplex slice sum(delta) = budget with
/// grid step `step`, scoring each point by the compute-energy model. At most
/// three devices.
OracleResult oracle_p3(const Scenario& sc, std::span<const double> t_cmp, double budget,
                       double step);

/// Bound on how far the grid minimum of oracle_p3 can sit above the true
/// minimum: the steepest objective slope over the box times the worst-case
/// coordinate offset.
double oracle_p3_resolution(const Scenario& sc, std::span<const double> t_cmp,
                            double step);

/// Exhaustive scan of the bandwidth simplex sum(b) = B, b_i >= b_min_i, with
/// grid step `step` in Hz. At most three devices.
OracleResult oracle_p4(const CommSubproblem& sub, double step);

double oracle_p4_resolution(const CommSubproblem& sub, double step);

}  // namespace edgegen
