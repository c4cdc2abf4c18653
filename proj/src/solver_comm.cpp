#include "edgegen/solver_comm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "edgegen/errors.hpp"
#include "edgegen/lambert_w.hpp"

namespace edgegen {

namespace {

constexpr int kInnerCap = 200;
constexpr int kOuterCap = 200;
constexpr double kRelativeWidth = 1e-10;
constexpr double kLn2 = std::numbers::ln2;

// expm1(y) - y e^y, with the series sum_{k>=2} (1-k) y^k / k! for small y to
// avoid cancellation.
double q_core(double y) {
  if (y < 0.05) {
    double term = y;  // y^k / k! at k = 1
    double sum = 0.0;
    for (int k = 2; k < 12; ++k) {
      term *= y / k;
      sum += (1.0 - k) * term;
    }
    return sum;
  }
  return std::expm1(y) - y * std::exp(y);
}

double shannon_limit_power(const CommSubproblem& sub, std::size_t i) {
  return sub.noise_psd * sub.update_size * kLn2 / (sub.gain[i] * sub.t_com[i]);
}

}  // namespace

double power_from_bandwidth(double b, const CommSubproblem& sub, int device) {
  const auto i = static_cast<std::size_t>(device);
  const double y = sub.update_size * kLn2 / (b * sub.t_com[i]);
  return sub.noise_psd * b / sub.gain[i] * std::expm1(y);
}

double min_bandwidth(const CommSubproblem& sub, int device) {
  const auto i = static_cast<std::size_t>(device);
  const double p_max = sub.max_power[i];
  if (shannon_limit_power(sub, i) >= p_max) {
    std::ostringstream os;
    os << "device " << device << " cannot deliver the update in "
       << sub.t_com[i] << " s at any bandwidth";
    throw InfeasibleBandwidth(std::numeric_limits<double>::infinity(), os.str());
  }
  double hi = sub.update_size / sub.t_com[i];
  while (power_from_bandwidth(hi, sub, device) > p_max) hi *= 2.0;
  double lo = hi;
  while (power_from_bandwidth(lo, sub, device) <= p_max) lo *= 0.5;
  for (int k = 0; k < kInnerCap && hi - lo > 1e-14 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (power_from_bandwidth(mid, sub, device) > p_max) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double min_bandwidth_lambert(const CommSubproblem& sub, int device) {
  const auto i = static_cast<std::size_t>(device);
  const double kappa = sub.noise_psd * sub.update_size * kLn2 /
                       (sub.gain[i] * sub.max_power[i]);
  const double t = sub.t_com[i];
  const double x = kappa / t;
  if (x >= 1.0) {
    // Only the trivial root W = -x exists; no finite bandwidth suffices.
    std::ostringstream os;
    os << "device " << device << " cannot deliver the update in " << t
       << " s at any bandwidth";
    throw InfeasibleBandwidth(std::numeric_limits<double>::infinity(), os.str());
  }
  const double w = lambert_wm1(-x * std::exp(-x));
  return -sub.update_size * kLn2 / (t * w + kappa);
}

double q_function(double b, const CommSubproblem& sub, int device) {
  const auto i = static_cast<std::size_t>(device);
  const double t = sub.t_com[i];
  const double y = sub.update_size * kLn2 / (t * b);
  return sub.noise_psd * t / sub.gain[i] * q_core(y);
}

namespace {

// Root of Q(b) + varpi on [lo, hi], clamped to the ends.
double inner_root(double varpi, const CommSubproblem& sub, int device, double lo, double hi,
                  int& steps) {
  steps = 0;
  if (q_function(lo, sub, device) + varpi >= 0.0) return lo;
  if (q_function(hi, sub, device) + varpi <= 0.0) return hi;
  while (hi - lo > kRelativeWidth * hi) {
    if (++steps > kInnerCap) {
      throw Error(ErrorKind::BisectionStalled, "inner bandwidth bisection stalled");
    }
    const double mid = 0.5 * (lo + hi);
    if (q_function(mid, sub, device) + varpi > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> bandwidth_from_multiplier(double varpi, const CommSubproblem& sub,
                                              int* max_inner_steps) {
  std::vector<double> b(static_cast<std::size_t>(sub.size()));
  int worst = 0;
  for (int i = 0; i < sub.size(); ++i) {
    int steps = 0;
    const auto k = static_cast<std::size_t>(i);
    b[k] = inner_root(varpi, sub, i, sub.b_min[k], sub.bandwidth_total, steps);
    worst = std::max(worst, steps);
  }
  if (max_inner_steps != nullptr) *max_inner_steps = std::max(*max_inner_steps, worst);
  return b;
}

CommSubproblem make_comm_subproblem(const Scenario& sc, std::span<const double> t_com) {
  CommSubproblem sub;
  sub.bandwidth_total = sc.bandwidth_total;
  sub.update_size = sc.update_size;
  sub.noise_psd = sc.noise_psd;
  for (std::size_t i = 0; i < sc.devices.size(); ++i) {
    sub.t_com.push_back(t_com[i]);
    sub.gain.push_back(sc.devices[i].channel_gain);
    sub.max_power.push_back(sc.devices[i].max_power);
  }
  double total = 0.0;
  for (int i = 0; i < sub.size(); ++i) {
    sub.b_min.push_back(min_bandwidth(sub, i));
    total += sub.b_min.back();
  }
  if (total > sub.bandwidth_total) {
    std::ostringstream os;
    os << "minimum bandwidths need " << total << " Hz, band has "
       << sub.bandwidth_total << " Hz";
    throw InfeasibleBandwidth(total - sub.bandwidth_total, os.str());
  }
  return sub;
}

CommSolution solve_p4(const CommSubproblem& sub, bool record_trace) {
  const int n = sub.size();
  const double band = sub.bandwidth_total;
  double sum_min = 0.0;
  for (double b : sub.b_min) sum_min += b;
  if (sum_min > band) {
    std::ostringstream os;
    os << "minimum bandwidths exceed the band by " << sum_min - band << " Hz";
    throw InfeasibleBandwidth(sum_min - band, os.str());
  }

  CommSolution sol;
  // Q < 0 everywhere, so the multiplier lives on the positive axis.
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < n; ++i) {
    lo = std::min(lo, -q_function(band, sub, i));
    hi = std::max(hi, -q_function(sub.b_min[static_cast<std::size_t>(i)], sub, i));
  }
  sol.varpi_range_lo = lo;
  sol.varpi_range_hi = hi;

  auto total = [](const std::vector<double>& b) {
    double s = 0.0;
    for (double v : b) s += v;
    return s;
  };

  std::vector<double> b;
  double varpi = hi;
  if (band - sum_min <= 1e-12 * band) {
    b = sub.b_min;
  } else {
    int iter = 0;
    double sum = 0.0;
    std::vector<double> b_floor = sub.b_min;
    std::vector<double> b_ceil(static_cast<std::size_t>(n), band);
    for (;;) {
      if (++iter > kOuterCap) {
        throw Error(ErrorKind::BisectionStalled, "bandwidth multiplier bisection stalled");
      }
      varpi = std::sqrt(lo * hi);
      // b_i(varpi) is decreasing, so the iterates at the current multiplier
      // ends bracket every inner root.
      b.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        int steps = 0;
        b[k] = inner_root(varpi, sub, i, b_floor[k], b_ceil[k], steps);
        sol.max_inner_iterations = std::max(sol.max_inner_iterations, steps);
      }
      sum = total(b);
      if (record_trace) sol.trace.push_back({varpi, sum});
      if (std::abs(sum - band) <= 1e-12 * band) break;
      if (sum > band) {
        lo = varpi;
        b_ceil = b;
      } else {
        hi = varpi;
        b_floor = b;
      }
      if (hi - lo <= kRelativeWidth * hi) break;
    }
    sol.outer_iterations = iter;
    if (std::abs(sum - band) > 1e-6 * band) {
      std::ostringstream os;
      os << "bandwidth sum " << sum << " misses the band " << band;
      throw Error(ErrorKind::BisectionStalled, os.str());
    }
    // Spread the residual bisection slack over unclamped devices.
    double free_total = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (b[k] > sub.b_min[k]) free_total += b[k];
    }
    const double residual = band - sum;
    if (free_total > 0.0) {
      for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (b[k] > sub.b_min[k]) b[k] += residual * b[k] / free_total;
      }
    }
  }
  sol.varpi = varpi;
  sol.bandwidth = b;
  sol.power.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    sol.power[k] = std::min(power_from_bandwidth(b[k], sub, i), sub.max_power[k]);
    sol.objective += sol.power[k] * sub.t_com[k];
  }
  return sol;
}

}  // namespace edgegen
