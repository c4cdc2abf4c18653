#include "edgegen/ce_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "edgegen/augmentation.hpp"
#include "edgegen/learning_curve.hpp"
#include "edgegen/rng.hpp"

namespace edgegen {

void CEConfig::validate() const {
  if (samples_per_iter < 1) throw ConfigError("samples_per_iter", "must be >= 1");
  if (elite_count < 1 || elite_count > samples_per_iter)
    throw ConfigError("elite_count", "must lie in [1, samples_per_iter]");
  if (max_iters < 1) throw ConfigError("max_iters", "must be >= 1");
  if (!(smoothing > 0.0 && smoothing < 1.0))
    throw ConfigError("smoothing", "must lie in (0, 1)");
  if (!(sigma_floor > 0.0)) throw ConfigError("sigma_floor", "must be positive");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
}

EtaBounds eta_bounds(const DeviceProfile& dev, const Scenario& sc) {
  EtaBounds b;
  b.lower = sc.cycles_per_sample() * static_cast<double>(dev.local_count) /
            (sc.t_max * dev.max_freq);
  const double full_rate = uplink_rate(sc.bandwidth_total, dev.max_power,
                                       dev.channel_gain, sc.noise_psd);
  b.upper = 1.0 - sc.update_size / (sc.t_max * full_rate);
  if (!(b.lower < b.upper)) {
    std::ostringstream os;
    os << "device " << dev.id << " cannot finish a round in " << sc.t_max
       << " s (eta range [" << b.lower << ", " << b.upper << "])";
    throw Error(ErrorKind::DeviceInfeasible, os.str());
  }
  return b;
}

SplitSolution solve_split(std::span<const double> eta, const Scenario& sc,
                          const SplitPolicy& policy, bool record_trace) {
  const auto n = sc.devices.size();
  if (eta.size() != n) {
    throw Error(ErrorKind::InvalidAllocation, "split vector length mismatch");
  }
  SplitSolution out;
  out.t_cmp.resize(n);
  out.t_com.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eta[i] > 0.0 && eta[i] < 1.0))
      throw Error(ErrorKind::InvalidAllocation, "split factor outside (0, 1)");
    out.t_cmp[i] = eta[i] * sc.t_max;
    out.t_com[i] = (1.0 - eta[i]) * sc.t_max;
  }

  if (policy.data == DataMode::Optimized) {
    const double budget = error_budget(sc.size(), sc.curve, sc.delta_max);
    out.compute = solve_p3(sc, out.t_cmp, budget, record_trace);
  } else {
    auto& c = out.compute;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& dev = sc.devices[i];
      const auto bounds = delta_bounds(dev, out.t_cmp[i], sc);
      const double d_loc = static_cast<double>(dev.local_count);
      c.delta.push_back(bounds.upper);
      c.d_gen.push_back(0.0);
      c.freq.push_back(std::min(sc.cycles_per_sample() * d_loc / out.t_cmp[i], dev.max_freq));
      c.objective += rho(dev, out.t_cmp[i], sc) *
                     std::pow(sc.curve.gamma + bounds.upper, -3.0 / sc.curve.beta);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double data = static_cast<double>(sc.devices[i].local_count) + out.compute.d_gen[i];
    out.compute_energy += compute_energy(sc.devices[i], data, out.compute.freq[i], sc);
  }

  auto comm = make_comm_subproblem(sc, out.t_com);
  if (policy.bandwidth == BandwidthMode::Optimized) {
    out.comm = solve_p4(comm, record_trace);
  } else {
    const double share = sc.bandwidth_total / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (share < comm.b_min[i]) {
        std::ostringstream os;
        os << "device " << sc.devices[i].id << " needs " << comm.b_min[i]
           << " Hz but the uniform share is " << share << " Hz";
        throw InfeasibleBandwidth(comm.b_min[i] - share, os.str());
      }
      const double p = std::min(power_from_bandwidth(share, comm, static_cast<int>(i)),
                                comm.max_power[i]);
      out.comm.bandwidth.push_back(share);
      out.comm.power.push_back(p);
      out.comm.objective += p * comm.t_com[i];
    }
  }
  out.comm_energy = out.comm.objective;
  return out;
}

SplitOutcome evaluate_split(std::span<const double> eta, const Scenario& sc,
                            const SplitPolicy& policy) {
  SplitOutcome out;
  try {
    out.energy = solve_split(eta, sc, policy).energy();
  } catch (const Error& e) {
    out.failure = {e.kind(), e.what()};
  }
  return out;
}

Allocation assemble_allocation(const Scenario& sc, std::span<const double> eta,
                               const SplitSolution& split) {
  Allocation alloc;
  for (std::size_t i = 0; i < sc.devices.size(); ++i) {
    const auto& dev = sc.devices[i];
    DeviceAllocation a;
    a.id = dev.id;
    a.eta = eta[i];
    a.d_gen = split.compute.d_gen[i];
    a.freq = split.compute.freq[i];
    a.bandwidth = split.comm.bandwidth[i];
    a.power = split.comm.power[i];
    const auto budget = static_cast<std::int64_t>(std::llround(a.d_gen));
    a.category_gen = solve_p8(dev.category_counts, budget).gen_counts;
    alloc.devices.push_back(std::move(a));
  }
  return alloc;
}

namespace {

std::vector<double> draw_sample(const CEState& state, const std::vector<EtaBounds>& bounds,
                                const CEConfig& ce, int iter, int index) {
  Rng rng = Rng::stream(ce.seed, {static_cast<std::uint64_t>(iter),
                                  static_cast<std::uint64_t>(index)});
  std::vector<double> eta(state.mean.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const auto [lo, hi] = bounds[i];
    double v = state.mean[i] + state.stddev[i] * rng.normal();
    if (ce.sampling == SamplingMode::Reject) {
      for (int tries = 0; tries < 64 && (v < lo || v > hi); ++tries)
        v = state.mean[i] + state.stddev[i] * rng.normal();
    }
    eta[i] = std::clamp(v, lo, hi);
  }
  return eta;
}

// Results land in slot m regardless of which worker produced them.
std::vector<double> evaluate_batch(const std::vector<std::vector<double>>& samples,
                                   const Scenario& sc, const SplitPolicy& policy,
                                   int workers) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> energy(samples.size(), inf);
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t m = first; m < samples.size(); m += stride) {
      const auto outcome = evaluate_split(samples[m], sc, policy);
      energy[m] = outcome.energy.value_or(inf);
    }
  };
  const auto n_workers = static_cast<std::size_t>(std::max(1, workers));
  if (n_workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(run, w, n_workers);
  }
  return energy;
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

}  // namespace

PlanResult solve_p1(const Scenario& sc, const CEConfig& ce, const SplitPolicy& policy) {
  sc.validate();
  ce.validate();
  const auto n = sc.devices.size();
  std::vector<EtaBounds> bounds;
  bounds.reserve(n);
  for (const auto& dev : sc.devices) bounds.push_back(eta_bounds(dev, sc));

  if (policy.data == DataMode::Optimized) {
    const double budget = error_budget(sc.size(), sc.curve, sc.delta_max);
    double sum_min = 0.0;
    double sum_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto db = delta_bounds(sc.devices[i], bounds[i].upper * sc.t_max, sc);
      sum_min += db.lower;
      sum_max += db.upper;
    }
    if (budget < sum_min || budget > sum_max) throw InfeasibleBudget(budget, sum_min, sum_max);
  }

  PlanResult result;
  CEState& state = result.state;
  state.mean.assign(n, 0.5);
  state.stddev.assign(n, 1.0);
  state.best_objective = std::numeric_limits<double>::infinity();
  int infeasible_streak = 0;
  int evaluations = 0;
  const int k_elite = ce.elite_count;

  while (state.iter < ce.max_iters && max_of(state.stddev) > ce.sigma_floor) {
    std::vector<std::vector<double>> samples;
    samples.reserve(static_cast<std::size_t>(ce.samples_per_iter));
    for (int m = 0; m < ce.samples_per_iter; ++m)
      samples.push_back(draw_sample(state, bounds, ce, state.iter, m));
    const auto energy = evaluate_batch(samples, sc, policy, ce.workers);
    evaluations += ce.samples_per_iter;

    std::vector<std::size_t> order;
    for (std::size_t m = 0; m < energy.size(); ++m)
      if (std::isfinite(energy[m])) order.push_back(m);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return energy[a] < energy[b]; });

    if (order.empty()) {
      if (++infeasible_streak >= 3) {
        throw Error(ErrorKind::NoFeasibleRegion,
                    "every sampled split was infeasible for 3 consecutive iterations");
      }
    } else {
      infeasible_streak = 0;
      if (energy[order.front()] < state.best_objective) {
        state.best_objective = energy[order.front()];
        state.best_eta = samples[order.front()];
      }
      const std::size_t k = std::min(order.size(), static_cast<std::size_t>(k_elite));
      for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (std::size_t e = 0; e < k; ++e) mean += samples[order[e]][i];
        mean /= static_cast<double>(k);
        double var = 0.0;
        for (std::size_t e = 0; e < k; ++e) {
          const double d = samples[order[e]][i] - mean;
          var += d * d;
        }
        const double sd = std::sqrt(var / static_cast<double>(k));
        state.mean[i] = ce.smoothing * state.mean[i] + (1.0 - ce.smoothing) * mean;
        state.stddev[i] = ce.smoothing * state.stddev[i] + (1.0 - ce.smoothing) * sd;
      }
    }
    ++state.iter;
    const double mean_sigma =
        std::accumulate(state.stddev.begin(), state.stddev.end(), 0.0) / static_cast<double>(n);
    result.trace.push_back({state.iter, state.best_objective, mean_sigma, max_of(state.stddev)});
  }

  if (state.best_eta.empty()) {
    throw Error(ErrorKind::NoFeasibleRegion, "no feasible split found");
  }
  result.split = solve_split(state.best_eta, sc, policy, true);
  result.allocation = assemble_allocation(sc, state.best_eta, result.split);
  auto& rep = result.report;
  rep.objective_j = result.split.energy();
  rep.compute_energy_j = result.split.compute_energy;
  rep.comm_energy_j = result.split.comm_energy;
  rep.iterations = state.iter;
  rep.evaluations = evaluations;
  rep.final_max_sigma = max_of(state.stddev);
  rep.converged = rep.final_max_sigma <= ce.sigma_floor;
  return result;
}

ComplexityReport complexity_report(const CEConfig& ce, const Scenario& sc,
                                   std::span<const double> eta) {
  ComplexityReport r;
  r.evaluation_bound = static_cast<long long>(ce.max_iters) * ce.samples_per_iter;
  const auto split = solve_split(eta, sc, {}, false);
  const auto comm = make_comm_subproblem(sc, split.t_com);
  r.nu_range = split.compute.nu_range_hi - split.compute.nu_range_lo;
  r.varpi_range = split.comm.varpi_range_hi - split.comm.varpi_range_lo;
  for (double b : comm.b_min)
    r.bandwidth_range = std::max(r.bandwidth_range, sc.bandwidth_total - b);
  r.chi = std::max({r.nu_range, r.varpi_range, r.bandwidth_range});
  r.log2_chi = std::log2(r.chi);
  r.predicted_cost = static_cast<double>(r.evaluation_bound) *
                     (r.log2_chi + r.log2_chi * r.log2_chi);
  r.p3_steps = split.compute.iterations;
  r.p4_outer_steps = split.comm.outer_iterations;
  r.p4_inner_steps = split.comm.max_inner_iterations;

  // Geometric bisection stops once hi - lo <= 1e-10 hi.
  auto geometric_bound = [](double lo, double hi) {
    if (!(lo > 0.0 && hi > lo)) return 1;
    return static_cast<int>(std::ceil(std::log2(std::log(hi / lo) / std::log1p(1e-10)))) + 1;
  };
  r.p3_step_bound = geometric_bound(split.compute.nu_range_lo, split.compute.nu_range_hi);
  r.p4_outer_bound = geometric_bound(split.comm.varpi_range_lo, split.comm.varpi_range_hi);
  double smallest_b_min = std::numeric_limits<double>::infinity();
  for (double b : comm.b_min) smallest_b_min = std::min(smallest_b_min, b);
  r.p4_inner_bound =
      static_cast<int>(std::ceil(std::log2(r.bandwidth_range / (1e-10 * smallest_b_min)))) + 1;
  return r;
}

}  // namespace edgegen
