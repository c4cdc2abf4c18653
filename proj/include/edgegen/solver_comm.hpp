#pragma once

#include <span>
#include <vector>

#include "edgegen/system_model.hpp"

namespace edgegen {

/// Bandwidth/power allocation minimizing uplink energy for fixed per-device
/// transmission times over an FDMA band.
struct CommSubproblem {
  std::vector<double> t_com;
  std::vector<double> gain;
  std::vector<double> max_power;
  std::vector<double> b_min;
  double bandwidth_total = 0.0;
  double update_size = 0.0;
  double noise_psd = 0.0;

  int size() const { return static_cast<int>(t_com.size()); }
};

struct VarpiIterate {
  double varpi = 0.0;
  double sum_bandwidth = 0.0;
};

struct CommSolution {
  std::vector<double> bandwidth;
  std::vector<double> power;
  double varpi = 0.0;
  double objective = 0.0;  // sum_i P_i T_i^com
  int outer_iterations = 0;
  int max_inner_iterations = 0;
  double varpi_range_lo = 0.0;
  double varpi_range_hi = 0.0;
  std::vector<VarpiIterate> trace;
};

/// Power that delivers the update in exactly t_com over bandwidth b.
double power_from_bandwidth(double b, const CommSubproblem& sub, int device);

/// Smallest bandwidth that keeps the required power within max_power, found
/// by bisection on the decreasing power curve. Throws InfeasibleBandwidth when
/// even unlimited bandwidth needs more than max_power.
double min_bandwidth(const CommSubproblem& sub, int device);

/// Same quantity through the Lambert-W closed form (lower real branch).
double min_bandwidth_lambert(const CommSubproblem& sub, int device);

/// Derivative of the per-device energy with respect to its bandwidth.
double q_function(double b, const CommSubproblem& sub, int device);

/// Per-device roots of Q(b) + varpi = 0 on [b_min, B].
std::vector<double> bandwidth_from_multiplier(double varpi, const CommSubproblem& sub,
                                              int* max_inner_steps = nullptr);

/// Fills b_min for every device; throws InfeasibleBandwidth when the minimum
/// bandwidths do not fit into the band.
CommSubproblem make_comm_subproblem(const Scenario& sc, std::span<const double> t_com);

CommSolution solve_p4(const CommSubproblem& sub, bool record_trace = false);

}  // namespace edgegen
