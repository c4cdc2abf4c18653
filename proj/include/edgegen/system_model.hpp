#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgegen/learning_curve.hpp"

namespace edgegen {

struct DeviceProfile {
  int id = 0;
  double energy_coeff = 0.0;   // J*s^2/cycle^3
  double max_freq = 0.0;       // cycles/s
  double channel_gain = 0.0;   // linear power gain
  double max_power = 0.0;      // W
  std::int64_t local_count = 0;
  std::vector<std::int64_t> category_counts;
  double distance_km = 0.0;

  friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;
};

struct Scenario {
  std::vector<DeviceProfile> devices;
  double bandwidth_total = 20e6;       // Hz
  double noise_psd = 3.981071705534973e-21;  // W/Hz
  double update_size = 111.7e6;        // bits
  double workload_per_sample = 5e6;    // cycles
  int local_epochs = 1;
  double t_max = 60.0;                 // s
  double delta_max = 0.2;
  double d_gen_max = 5000.0;
  int categories = 10;
  CurveParams curve;

  int size() const { return static_cast<int>(devices.size()); }
  /// tau * omega: cycles spent per training sample per round.
  double cycles_per_sample() const { return local_epochs * workload_per_sample; }
  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct DeviceAllocation {
  int id = 0;
  double d_gen = 0.0;  // continuous synthesized amount
  double freq = 0.0;
  double bandwidth = 0.0;
  double power = 0.0;
  double eta = 0.0;
  std::vector<std::int64_t> category_gen;

  friend bool operator==(const DeviceAllocation&, const DeviceAllocation&) = default;
};

struct Allocation {
  std::vector<DeviceAllocation> devices;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

struct DeviceCost {
  double e_cmp = 0.0;
  double e_com = 0.0;
  double t_cmp = 0.0;
  double t_com = 0.0;
};

struct RoundMetrics {
  double energy_j = 0.0;
  double latency_s = 0.0;
  double uplink_bits = 0.0;
  std::vector<DeviceCost> per_device;
};

struct UplinkCost {
  double latency_s = 0.0;
  double energy_j = 0.0;
};

/// tau * eps * omega * D * f^2.
double compute_energy(const DeviceProfile& dev, double total_data, double freq,
                      const Scenario& sc);
/// tau * omega * D / f.
double compute_latency(const DeviceProfile& dev, double total_data, double freq,
                       const Scenario& sc);
/// Shannon rate b * log2(1 + g P / (N0 b)) in bit/s.
double uplink_rate(double bandwidth, double power, double gain, double noise_psd);
UplinkCost uplink_cost(double update_size, double bandwidth, double power,
                       double gain, double noise_psd);
/// Linear gain of the 128.1 + 37.6 log10(R) dB path-loss model (R in km).
double path_loss_gain(double distance_km);

RoundMetrics round_metrics(const Scenario& sc, const Allocation& alloc);

/// Per-device category counts: proportions drawn from Dir(z * 1_C), then
/// rounded by largest remainder so each row sums to per_device_total.
std::vector<std::vector<std::int64_t>> dirichlet_partition(
    double concentration, int categories, std::int64_t per_device_total,
    int device_count, std::uint64_t seed);

struct ScenarioConfig {
  int devices = 20;
  double radius_km = 0.4;
  double min_distance_km = 0.01;
  double bandwidth_total = 20e6;
  double noise_psd_dbm = -174.0;
  /// "Hz" reads noise_psd_dbm as dBm/Hz; "MHz" as dBm/MHz.
  std::string noise_psd_unit = "Hz";
  double update_size = 111.7e6;
  double workload_per_sample = 5e6;
  int local_epochs = 1;
  double t_max = 60.0;
  double delta_max = 0.2;
  double d_gen_max = 5000.0;
  int categories = 10;
  std::int64_t local_count = 1250;
  double dirichlet_z = 0.4;
  double max_power_dbm_min = 20.0;
  double max_power_dbm_max = 23.0;
  double max_freq_min = 1e9;
  double max_freq_max = 2e9;
  double energy_coeff_min = 4e-27;
  double energy_coeff_max = 6e-27;
  /// "random": uniform draws; "graded": energy coefficient and distance grow
  /// linearly with the device index, everything else is still drawn.
  std::string layout = "random";
  CurveParams curve;

  void validate() const;
  double noise_psd_watts_per_hz() const;
};

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

struct ConstraintCheck {
  std::string name;
  bool ok = false;
  double worst = 0.0;  // largest violation found (0 when satisfied)
};

struct ConstraintReport {
  std::vector<ConstraintCheck> checks;
  double round_latency_s = 0.0;
  double global_error = 0.0;
  bool all_ok() const;
};

struct CheckOptions {
  bool expect_error_target = true;  // global error must equal delta_max
  bool expect_full_latency = true;  // round latency must equal t_max
  double latency_rel_tol = 1e-6;
  double error_rel_tol = 1e-6;
};

/// Re-derives every problem constraint from the decision variables alone.
ConstraintReport check_constraints(const Scenario& sc, const Allocation& alloc,
                                   const CheckOptions& options = {});

}  // namespace edgegen
