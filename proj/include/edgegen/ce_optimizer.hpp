#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgegen/errors.hpp"
#include "edgegen/solver_comm.hpp"
#include "edgegen/solver_compute.hpp"
#include "edgegen/system_model.hpp"

namespace edgegen {

enum class SamplingMode { Clip, Reject };

struct CEConfig {
  int samples_per_iter = 100;
  int elite_count = 10;
  int max_iters = 50;
  double smoothing = 0.7;
  double sigma_floor = 1e-3;
  std::uint64_t seed = 0;
  SamplingMode sampling = SamplingMode::Reject;
  int workers = 1;

  void validate() const;
};

/// How a split is turned into resources. The full planner optimizes both;
/// baselines pin one side.
enum class DataMode { Optimized, NoSynthesis };
enum class BandwidthMode { Optimized, Uniform };

struct SplitPolicy {
  DataMode data = DataMode::Optimized;
  BandwidthMode bandwidth = BandwidthMode::Optimized;
};

struct EtaBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Throws DeviceInfeasible when lower >= upper.
EtaBounds eta_bounds(const DeviceProfile& dev, const Scenario& sc);

struct SplitSolution {
  std::vector<double> t_cmp;
  std::vector<double> t_com;
  ComputeSolution compute;
  CommSolution comm;
  double compute_energy = 0.0;
  double comm_energy = 0.0;
  double energy() const { return compute_energy + comm_energy; }
};

struct Infeasible {
  ErrorKind kind = ErrorKind::NoFeasibleRegion;
  std::string reason;
};

/// Either the round energy of a split or the reason it is infeasible.
struct SplitOutcome {
  std::optional<double> energy;
  Infeasible failure;

  bool feasible() const { return energy.has_value(); }
};

/// Solves both subproblems for a fixed split; throws on infeasibility.
SplitSolution solve_split(std::span<const double> eta, const Scenario& sc,
                          const SplitPolicy& policy = {}, bool record_trace = false);

/// Non-throwing wrapper used inside the search loop.
SplitOutcome evaluate_split(std::span<const double> eta, const Scenario& sc,
                            const SplitPolicy& policy = {});

struct CETraceRow {
  int iter = 0;
  double best_objective = 0.0;
  double mean_sigma = 0.0;
  double max_sigma = 0.0;
};

struct CEState {
  std::vector<double> mean;
  std::vector<double> stddev;
  int iter = 0;
  std::vector<double> best_eta;
  double best_objective = 0.0;
};

struct ObjectiveReport {
  double objective_j = 0.0;
  double compute_energy_j = 0.0;
  double comm_energy_j = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;  // max sigma reached the floor
  double final_max_sigma = 0.0;
};

struct PlanResult {
  Allocation allocation;
  ObjectiveReport report;
  SplitSolution split;
  CEState state;
  std::vector<CETraceRow> trace;
};

/// Cross-entropy search over the per-device time splits followed by
/// allocation assembly (including category-wise augmentation).
PlanResult solve_p1(const Scenario& sc, const CEConfig& ce,
                    const SplitPolicy& policy = {});

/// Builds the full Allocation for a fixed split.
Allocation assemble_allocation(const Scenario& sc, std::span<const double> eta,
                               const SplitSolution& split);

struct ComplexityReport {
  long long evaluation_bound = 0;  // J * M
  double nu_range = 0.0;
  double varpi_range = 0.0;
  double bandwidth_range = 0.0;
  double chi = 0.0;
  double log2_chi = 0.0;
  double predicted_cost = 0.0;  // J M (log2 chi + log2^2 chi)
  int p3_steps = 0;
  int p3_step_bound = 0;
  int p4_outer_steps = 0;
  int p4_outer_bound = 0;
  int p4_inner_steps = 0;
  int p4_inner_bound = 0;
};

/// Evaluates the search ranges and measured bisection counts at split eta.
ComplexityReport complexity_report(const CEConfig& ce, const Scenario& sc,
                                   std::span<const double> eta);

}  // namespace edgegen
