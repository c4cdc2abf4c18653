#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace edgegen {

/// Power-law local error model plus the exponential global-convergence
/// constants. Errors are fractions, not percentages.
struct CurveParams {
  double alpha = 2.69;
  double beta = 0.3;
  double gamma = 0.1;
  double zeta = 100.0;
  int global_rounds = 200;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const CurveParams&, const CurveParams&) = default;
};

struct FitSample {
  std::int64_t data_amount = 0;
  double observed_error = 0.0;
};

struct PowerLawFit {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double residual_norm = 0.0;
};

/// alpha * (d_loc + d_gen)^-beta - gamma. Throws InvalidCurveRange when the
/// result is not positive.
double local_error(double d_loc, double d_gen, const CurveParams& params);

/// Mixed dataset size whose local error equals target_error.
double required_mixed_size(double target_error, const CurveParams& params);

/// Least-squares fit of alpha * d^-beta - gamma to the samples.
PowerLawFit fit_power_law(std::span<const FitSample> samples);

/// exp(N * (avg_local_error - 1) / zeta).
double global_error(double avg_local_error, const CurveParams& params);

/// Required sum of local errors over scenario_size devices so that the
/// global error after N rounds equals delta_max.
double error_budget(int scenario_size, const CurveParams& params,
                    double delta_max);

/// Rounds needed to push the global error down to target_delta.
double rounds_to_error(double target_delta, double avg_local_error,
                       const CurveParams& params);

}  // namespace edgegen
