#include <doctest.h>

#include <cmath>
#include <numeric>

#include "edgegen/errors.hpp"
#include "edgegen/experiment.hpp"
#include "edgegen/solver_compute.hpp"
#include "test_support.hpp"

using namespace edgegen;

namespace {

Scenario identical_devices(int n) {
  auto sc = testing::small_scenario(1, 11);
  const auto proto = sc.devices[0];
  sc.devices.clear();
  for (int i = 0; i < n; ++i) {
    auto d = proto;
    d.id = i;
    sc.devices.push_back(d);
  }
  return sc;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("delta bounds") {
  Scenario sc;
  sc.curve = {1.0, 0.5, 0.0, 100.0, 200};
  sc.d_gen_max = 400;
  DeviceProfile d;
  d.max_freq = 2e9;
  d.energy_coeff = 5e-27;
  d.local_count = 100;
  d.category_counts = {100};
  d.channel_gain = 1e-11;
  d.max_power = 0.1;
  d.distance_km = 0.1;
  const auto b = delta_bounds(d, 60.0, sc);
  CHECK(b.upper == doctest::Approx(0.1));
  CHECK(b.lower == doctest::Approx(std::pow(500.0, -0.5)));

  sc.d_gen_max = 0;
  const auto flat = delta_bounds(d, 60.0, sc);
  CHECK(flat.lower == doctest::Approx(flat.upper));

  sc.d_gen_max = 400;
  const auto tight = delta_bounds(d, 60.0, sc);
  sc.d_gen_max = 200;
  CHECK(delta_bounds(d, 60.0, sc).lower > tight.lower);
  CHECK_THROWS_AS(delta_bounds(d, 0.2, sc), Error);
}

TEST_CASE("rho evaluation and scaling") {
  Scenario sc;
  sc.curve.alpha = 1.0;
  DeviceProfile d;
  d.energy_coeff = 5e-27;
  CHECK(rho(d, 10.0, sc) == doctest::Approx(6.25e-9));
  CHECK(rho(d, 20.0, sc) == doctest::Approx(6.25e-9 / 4));
  d.energy_coeff = 1e-26;
  CHECK(rho(d, 10.0, sc) == doctest::Approx(1.25e-8));
}

TEST_CASE("delta_from_nu closed form and clamp") {
  ComputeSubproblem sub;
  sub.rho = {1.0};
  sub.delta_min = {0.5};
  sub.delta_max = {2.0};
  sub.t_cmp = {1.0};
  sub.curve = {1.0, 1.0, 0.0, 100.0, 200};
  CHECK(delta_from_nu(3.0, sub, 0) == doctest::Approx(1.0));
  CHECK(delta_from_nu(1e9, sub, 0) == doctest::Approx(0.5));
  CHECK(delta_from_nu(1e-9, sub, 0) == doctest::Approx(2.0));
  CHECK(nu_of_delta(1.0, 1.0, sub.curve) == doctest::Approx(3.0));
}

TEST_CASE("dual sum is non-increasing in nu") {
  const auto c = testing::random_compute_case(3, 5);
  const auto sub = make_compute_subproblem(c.sc, c.t_cmp, c.budget);
  const auto sol = solve_p3(c.sc, sub);
  const double lo = std::log(sol.nu_range_lo), hi = std::log(sol.nu_range_hi);
  double prev = 1e300;
  for (int k = 0; k <= 1000; ++k) {
    const double nu = std::exp(lo + (hi - lo) * k / 1000.0);
    double s = 0.0;
    for (int i = 0; i < sub.size(); ++i) s += delta_from_nu(nu, sub, i);
    CHECK(s <= prev * (1 + 1e-15));
    prev = s;
  }
}

TEST_CASE("identical devices split the budget evenly") {
  const auto sc = identical_devices(4);
  std::vector<double> t(4, 0.5 * sc.t_max);
  const auto d = delta_bounds(sc.devices[0], t[0], sc);
  const double budget = 4 * (0.3 * d.lower + 0.7 * d.upper);
  const auto sol = solve_p3(sc, t, budget);
  for (double v : sol.delta) CHECK(v == doctest::Approx(budget / 4).epsilon(1e-9));
}

TEST_CASE("budget at the upper corner needs no synthesis") {
  const auto c = testing::random_compute_case(3, 2);
  double upper = 0.0;
  for (std::size_t i = 0; i < 3; ++i) upper += delta_bounds(c.sc.devices[i], c.t_cmp[i], c.sc).upper;
  const auto sol = solve_p3(c.sc, c.t_cmp, upper);
  for (double g : sol.d_gen) CHECK(g == doctest::Approx(0.0));
}

TEST_CASE("infeasible budgets report both bounds") {
  const auto c = testing::random_compute_case(2, 3);
  try {
    solve_p3(c.sc, c.t_cmp, 1e-6);
    FAIL("expected InfeasibleBudget");
  } catch (const InfeasibleBudget& e) {
    CHECK(e.lower() < e.upper());
    CHECK(e.budget() == 1e-6);
  }
  CHECK_THROWS_AS(solve_p3(c.sc, c.t_cmp, 10.0), InfeasibleBudget);
}

TEST_CASE("solution invariants on random instances") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 2 + static_cast<int>(seed % 4);
    const auto c = testing::random_compute_case(n, seed);
    const auto sub = make_compute_subproblem(c.sc, c.t_cmp, c.budget);
    const auto sol = solve_p3(c.sc, sub);
    CHECK(std::abs(sum(sol.delta) - c.budget) <= 1e-9 * n);
    double obj = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      CHECK(sol.freq[k] <= c.sc.devices[k].max_freq * (1 + 1e-12));
      CHECK(sol.d_gen[k] >= 0.0);
      CHECK(sol.d_gen[k] <= c.sc.d_gen_max);
      CHECK(sol.delta[k] >= sub.delta_min[k] - 1e-12);
      CHECK(sol.delta[k] <= sub.delta_max[k] + 1e-12);
      obj += sub.rho[k] * std::pow(c.sc.curve.gamma + sol.delta[k], -3.0 / c.sc.curve.beta);
      const bool interior = sol.delta[k] > sub.delta_min[k] + 1e-9 && sol.delta[k] < sub.delta_max[k] - 1e-9;
      if (interior) {
        CHECK(testing::rel_close(nu_of_delta(sub.rho[k], sol.delta[k], c.sc.curve), sol.nu, 1e-6));
      }
      // Objective term equals the compute energy of the recovered plan.
      const double data = c.sc.devices[k].local_count + sol.d_gen[k];
      CHECK(testing::rel_close(
          sub.rho[k] * std::pow(c.sc.curve.gamma + sol.delta[k], -3.0 / c.sc.curve.beta),
          compute_energy(c.sc.devices[k], data, sol.freq[k], c.sc), 1e-9));
    }
    CHECK(testing::rel_close(obj, sol.objective, 1e-9));
  }
}

TEST_CASE("three heterogeneous devices match the grid oracle") {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const auto c = testing::random_compute_case(3, seed);
    const auto sol = solve_p3(c.sc, c.t_cmp, c.budget);
    const auto oracle = oracle_p3(c.sc, c.t_cmp, c.budget, 1e-3);
    CHECK(sol.objective <= oracle.objective * (1 + 1e-4));
    CHECK(sol.objective >= oracle.objective - oracle_p3_resolution(c.sc, c.t_cmp, 1e-3));
  }
}

TEST_CASE("trace records the bisection") {
  const auto c = testing::random_compute_case(3, 7);
  const auto sol = solve_p3(c.sc, c.t_cmp, c.budget, true);
  CHECK(!sol.trace.empty());
  CHECK(static_cast<int>(sol.trace.size()) == sol.iterations);
  CHECK(sol.iterations <= 200);
}
