#include <doctest.h>

#include <cmath>

#include "edgegen/ce_optimizer.hpp"
#include "edgegen/errors.hpp"
#include "edgegen/solver_comm.hpp"
#include "edgegen/solver_compute.hpp"
#include "test_support.hpp"

using namespace edgegen;

namespace {

CEConfig quick(std::uint64_t seed) {
  CEConfig ce;
  ce.samples_per_iter = 40;
  ce.elite_count = 6;
  ce.max_iters = 30;
  ce.seed = seed;
  return ce;
}

std::vector<double> mid_eta(const Scenario& sc) {
  std::vector<double> eta;
  for (const auto& d : sc.devices) {
    const auto b = eta_bounds(d, sc);
    eta.push_back(0.5 * (b.lower + b.upper));
  }
  return eta;
}

}  // namespace

TEST_CASE("eta bounds") {
  Scenario sc;
  DeviceProfile d;
  d.max_freq = 2e9;
  d.local_count = 1250;
  d.channel_gain = 4.85e-12;
  d.max_power = 0.15;
  d.energy_coeff = 5e-27;
  const auto b = eta_bounds(d, sc);
  CHECK(b.lower == doctest::Approx(6.25e9 / 1.2e11));
  const double rate = sc.bandwidth_total *
                      std::log2(1 + d.channel_gain * d.max_power / (sc.noise_psd * sc.bandwidth_total));
  CHECK(b.upper == doctest::Approx(1 - sc.update_size / (sc.t_max * rate)));
  sc.update_size = 1e-3;
  CHECK(eta_bounds(d, sc).upper == doctest::Approx(1.0));
  auto bigger = d;
  bigger.local_count = 2500;
  CHECK(eta_bounds(bigger, sc).lower > eta_bounds(d, sc).lower);
  d.max_freq = 1e7;
  CHECK_THROWS_AS(eta_bounds(d, sc), Error);
}

TEST_CASE("config validation") {
  CEConfig ce;
  ce.elite_count = 0;
  CHECK_THROWS_AS(ce.validate(), ConfigError);
  ce = CEConfig{};
  ce.elite_count = ce.samples_per_iter + 1;
  CHECK_THROWS_AS(ce.validate(), ConfigError);
  ce = CEConfig{};
  ce.smoothing = 1.0;
  CHECK_THROWS_AS(ce.validate(), ConfigError);
  ce = CEConfig{};
  ce.sigma_floor = 0.0;
  CHECK_THROWS_AS(ce.validate(), ConfigError);
}

TEST_CASE("split evaluation") {
  const auto sc = testing::small_scenario(2, 21);
  auto eta = mid_eta(sc);
  const auto split = solve_split(eta, sc);
  const auto out = evaluate_split(eta, sc);
  REQUIRE(out.feasible());
  CHECK(*out.energy == doctest::Approx(split.energy()));
  CHECK(split.compute_energy == doctest::Approx(split.compute.objective));
  CHECK(split.comm_energy == doctest::Approx(split.comm.objective));
  // Recomposition: the two subproblems solved independently give the same total.
  std::vector<double> t_cmp, t_com;
  for (double e : eta) {
    t_cmp.push_back(e * sc.t_max);
    t_com.push_back((1 - e) * sc.t_max);
  }
  const double budget = error_budget(sc.size(), sc.curve, sc.delta_max);
  const double direct = solve_p3(sc, t_cmp, budget).objective +
                        solve_p4(make_comm_subproblem(sc, t_com)).objective;
  CHECK(testing::rel_close(direct, *out.energy, 1e-9));

  for (auto& e : eta) e = eta_bounds(sc.devices[0], sc).upper;
  eta[1] = eta_bounds(sc.devices[1], sc).upper;
  const auto bad = evaluate_split(eta, sc);
  CHECK_FALSE(bad.feasible());
  CHECK(bad.failure.kind == ErrorKind::InfeasibleBandwidth);
}

TEST_CASE("identical devices with the same split cost the same") {
  auto sc = testing::small_scenario(1, 5);
  sc.devices.push_back(sc.devices[0]);
  sc.devices[1].id = 1;
  const auto eta = mid_eta(sc);
  const auto split = solve_split(eta, sc);
  CHECK(split.compute.delta[0] == doctest::Approx(split.compute.delta[1]));
  CHECK(split.comm.bandwidth[0] == doctest::Approx(split.comm.bandwidth[1]));
}

TEST_CASE("solve_p1 contract") {
  const auto sc = testing::small_scenario(3, 33);
  const auto r = solve_p1(sc, quick(4));
  CHECK(r.report.iterations <= 30);
  CHECK((r.report.converged || r.report.iterations == 30));
  CHECK(r.report.evaluations <= 30 * 40);
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    CHECK(r.trace[k].best_objective <= r.trace[k - 1].best_objective);
  }
  for (double s : r.state.stddev) CHECK(s >= 0.0);
  CHECK(r.report.objective_j == doctest::Approx(r.trace.back().best_objective));
  const auto check = check_constraints(sc, r.allocation);
  for (const auto& c : check.checks) {
    INFO(c.name << " worst " << c.worst);
    CHECK(c.ok);
  }
}

TEST_CASE("solve_p1 is deterministic across runs and workers") {
  const auto sc = testing::small_scenario(4, 9);
  auto ce = quick(77);
  const auto a = solve_p1(sc, ce);
  const auto b = solve_p1(sc, ce);
  ce.workers = 3;
  const auto c = solve_p1(sc, ce);
  CHECK(a.allocation == b.allocation);
  CHECK(a.allocation == c.allocation);
  CHECK(a.report.objective_j == c.report.objective_j);
}

TEST_CASE("clip sampling remains available") {
  const auto sc = testing::small_scenario(2, 3);
  auto ce = quick(1);
  ce.sampling = SamplingMode::Clip;
  const auto r = solve_p1(sc, ce);
  CHECK(check_constraints(sc, r.allocation).all_ok());
}

TEST_CASE("unreachable error target is rejected up front") {
  auto sc = testing::small_scenario(3, 1);
  sc.delta_max = 1e-9;
  CHECK_THROWS_AS(solve_p1(sc, quick(1)), InfeasibleBudget);
}

TEST_CASE("empty feasible region") {
  auto sc = testing::small_scenario(5, 1);
  sc.bandwidth_total = 2e5;
  try {
    solve_p1(sc, quick(1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::NoFeasibleRegion || e.kind() == ErrorKind::DeviceInfeasible));
  }
}

TEST_CASE("uniform bandwidth policy") {
  const auto sc = testing::small_scenario(3, 14);
  SplitPolicy pol;
  pol.bandwidth = BandwidthMode::Uniform;
  const auto r = solve_p1(sc, quick(2), pol);
  for (const auto& a : r.allocation.devices) CHECK(a.bandwidth == sc.bandwidth_total / 3);
}

TEST_CASE("no-synthesis policy") {
  const auto sc = testing::small_scenario(3, 14);
  SplitPolicy pol;
  pol.data = DataMode::NoSynthesis;
  const auto r = solve_p1(sc, quick(2), pol);
  for (const auto& a : r.allocation.devices) {
    CHECK(a.d_gen == 0.0);
    for (auto c : a.category_gen) CHECK(c == 0);
  }
}

TEST_CASE("complexity report") {
  const auto sc = generate_scenario(ScenarioConfig{}, 0);
  const CEConfig ce;
  const auto eta = mid_eta(sc);
  const auto rep = complexity_report(ce, sc, eta);
  CHECK(rep.evaluation_bound == 5000);
  CHECK(rep.chi > 0.0);
  CHECK(rep.nu_range > 0.0);
  CHECK(rep.varpi_range > 0.0);
  CHECK(rep.p3_steps <= rep.p3_step_bound);
  CHECK(rep.p4_outer_steps <= rep.p4_outer_bound);
  CHECK(rep.p4_inner_steps <= rep.p4_inner_bound);
  CHECK(rep.predicted_cost > 0.0);
}
