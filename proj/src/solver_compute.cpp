#include "edgegen/solver_compute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "edgegen/errors.hpp"

namespace edgegen {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kRelativeWidth = 1e-10;
constexpr double kTargetResidual = 1e-12;   // per device, stops early
constexpr double kAcceptResidual = 1e-9;    // per device, hard limit

}  // namespace

DeltaBounds delta_bounds(const DeviceProfile& dev, double t_cmp, const Scenario& sc) {
  const double d_loc = static_cast<double>(dev.local_count);
  const double reachable = dev.max_freq * t_cmp / sc.cycles_per_sample();
  if (reachable < d_loc * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "device " << dev.id << " cannot process its local data within "
       << t_cmp << " s";
    throw Error(ErrorKind::DeviceInfeasible, os.str());
  }
  const double largest = std::min(std::max(reachable, d_loc), d_loc + sc.d_gen_max);
  return {local_error(largest, 0.0, sc.curve), local_error(d_loc, 0.0, sc.curve)};
}

double rho(const DeviceProfile& dev, double t_cmp, const Scenario& sc) {
  const double tw = sc.cycles_per_sample();
  return dev.energy_coeff * tw * tw * tw /
         (t_cmp * t_cmp * std::pow(sc.curve.alpha, -3.0 / sc.curve.beta));
}

double nu_of_delta(double rho_i, double delta, const CurveParams& curve) {
  return 3.0 * rho_i / curve.beta *
         std::pow(delta + curve.gamma, -(curve.beta + 3.0) / curve.beta);
}

double delta_from_nu(double nu, const ComputeSubproblem& sub, int device) {
  const auto i = static_cast<std::size_t>(device);
  const double beta = sub.curve.beta;
  const double raw =
      std::pow(3.0 * sub.rho[i] / (beta * nu), beta / (beta + 3.0)) - sub.curve.gamma;
  return std::clamp(raw, sub.delta_min[i], sub.delta_max[i]);
}

ComputeSubproblem make_compute_subproblem(const Scenario& sc,
                                          std::span<const double> t_cmp,
                                          double budget) {
  ComputeSubproblem sub;
  sub.budget = budget;
  sub.curve = sc.curve;
  const auto n = sc.devices.size();
  sub.rho.reserve(n);
  sub.delta_min.reserve(n);
  sub.delta_max.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto bounds = delta_bounds(sc.devices[i], t_cmp[i], sc);
    sub.rho.push_back(rho(sc.devices[i], t_cmp[i], sc));
    sub.delta_min.push_back(bounds.lower);
    sub.delta_max.push_back(bounds.upper);
    sub.t_cmp.push_back(t_cmp[i]);
  }
  return sub;
}

ComputeSolution solve_p3(const Scenario& sc, std::span<const double> t_cmp,
                         double budget, bool record_trace) {
  return solve_p3(sc, make_compute_subproblem(sc, t_cmp, budget), record_trace);
}

ComputeSolution solve_p3(const Scenario& sc, const ComputeSubproblem& sub,
                         bool record_trace) {
  const int n = sub.size();
  double sum_min = 0.0;
  double sum_max = 0.0;
  for (int i = 0; i < n; ++i) {
    sum_min += sub.delta_min[static_cast<std::size_t>(i)];
    sum_max += sub.delta_max[static_cast<std::size_t>(i)];
  }
  const double accept = kAcceptResidual * n;
  const double target = kTargetResidual * n;
  if (sub.budget < sum_min - accept || sub.budget > sum_max + accept) {
    throw InfeasibleBudget(sub.budget, sum_min, sum_max);
  }

  ComputeSolution sol;
  auto sum_at = [&](double nu) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += delta_from_nu(nu, sub, i);
    return s;
  };

  if (sub.budget >= sum_max - target) {
    sol.delta = sub.delta_max;
  } else if (sub.budget <= sum_min + target) {
    sol.delta = sub.delta_min;
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      lo = std::min(lo, nu_of_delta(sub.rho[k], sub.delta_max[k], sub.curve));
      hi = std::max(hi, nu_of_delta(sub.rho[k], sub.delta_min[k], sub.curve));
    }
    sol.nu_range_lo = lo;
    sol.nu_range_hi = hi;
    // nu spans decades; bisect on the geometric midpoint.
    double nu = std::sqrt(lo * hi);
    double sum = sum_at(nu);
    int iter = 0;
    for (; iter < kMaxIterations; ++iter) {
      nu = std::sqrt(lo * hi);
      sum = sum_at(nu);
      if (record_trace) sol.trace.push_back({nu, sum});
      if (std::abs(sum - sub.budget) <= target) {
        ++iter;
        break;
      }
      if (sum > sub.budget) {
        lo = nu;
      } else {
        hi = nu;
      }
      if (hi - lo <= kRelativeWidth * hi) {
        ++iter;
        nu = std::sqrt(lo * hi);
        sum = sum_at(nu);
        break;
      }
    }
    if (std::abs(sum - sub.budget) > accept) {
      std::ostringstream os;
      os << "nu bisection stalled after " << iter << " steps, residual "
         << sum - sub.budget;
      throw Error(ErrorKind::BisectionStalled, os.str());
    }
    sol.nu = nu;
    sol.iterations = iter;
    sol.delta.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sol.delta[static_cast<std::size_t>(i)] = delta_from_nu(nu, sub, i);
  }

  const double tw = sc.cycles_per_sample();
  sol.d_gen.resize(static_cast<std::size_t>(n));
  sol.freq.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto& dev = sc.devices[k];
    const double d_loc = static_cast<double>(dev.local_count);
    const double mixed = required_mixed_size(sol.delta[k], sub.curve);
    sol.d_gen[k] = std::clamp(mixed - d_loc, 0.0, sc.d_gen_max);
    sol.freq[k] = std::min(tw * (d_loc + sol.d_gen[k]) / sub.t_cmp[k], dev.max_freq);
    sol.objective += sub.rho[k] * std::pow(sub.curve.gamma + sol.delta[k],
                                           -3.0 / sub.curve.beta);
  }
  return sol;
}

}  // namespace edgegen
