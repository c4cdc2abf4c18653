#pragma once

#include <span>
#include <vector>

#include "edgegen/system_model.hpp"

namespace edgegen {

/// Energy-minimal synthesized amounts and CPU frequencies for fixed per-device
/// computation times, subject to the shared local-error budget.
struct ComputeSubproblem {
  std::vector<double> rho;
  std::vector<double> delta_min;
  std::vector<double> delta_max;
  std::vector<double> t_cmp;
  double budget = 0.0;
  CurveParams curve;

  int size() const { return static_cast<int>(rho.size()); }
};

struct DeltaBounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct NuIterate {
  double nu = 0.0;
  double sum_delta = 0.0;
};

struct ComputeSolution {
  std::vector<double> delta;
  std::vector<double> d_gen;
  std::vector<double> freq;
  double nu = 0.0;           // 0 when the budget sits on a box corner
  double objective = 0.0;    // sum_i rho_i (gamma + delta_i)^(-3/beta)
  int iterations = 0;
  double nu_range_lo = 0.0;
  double nu_range_hi = 0.0;
  std::vector<NuIterate> trace;
};

DeltaBounds delta_bounds(const DeviceProfile& dev, double t_cmp, const Scenario& sc);
double rho(const DeviceProfile& dev, double t_cmp, const Scenario& sc);

/// Stationary multiplier value for a local error delta.
double nu_of_delta(double rho_i, double delta, const CurveParams& curve);
/// KKT solution for one device at multiplier nu, clamped to its box.
double delta_from_nu(double nu, const ComputeSubproblem& sub, int device);

ComputeSubproblem make_compute_subproblem(const Scenario& sc,
                                          std::span<const double> t_cmp,
                                          double budget);

/// Bisection on nu. Throws InfeasibleBudget or BisectionStalled.
ComputeSolution solve_p3(const Scenario& sc, std::span<const double> t_cmp,
                         double budget, bool record_trace = false);
ComputeSolution solve_p3(const Scenario& sc, const ComputeSubproblem& sub,
                         bool record_trace = false);

}  // namespace edgegen
