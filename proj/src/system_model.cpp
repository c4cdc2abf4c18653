#include "edgegen/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "edgegen/errors.hpp"
#include "edgegen/rng.hpp"

namespace edgegen {

namespace {

constexpr double kFreqSlack = 1e-12;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive");
}

}  // namespace

void Scenario::validate() const {
  if (devices.empty()) throw ConfigError("devices", "scenario has no devices");
  require_positive(bandwidth_total, "bandwidth_total");
  require_positive(noise_psd, "noise_psd");
  require_positive(update_size, "update_size");
  require_positive(workload_per_sample, "workload_per_sample");
  if (local_epochs < 1) throw ConfigError("local_epochs", "must be >= 1");
  require_positive(t_max, "t_max");
  if (!(delta_max > 0.0 && delta_max < 1.0))
    throw ConfigError("delta_max", "must lie in (0, 1)");
  if (!(d_gen_max >= 0.0)) throw ConfigError("d_gen_max", "must be >= 0");
  if (categories < 1) throw ConfigError("categories", "must be >= 1");
  curve.validate();
  for (const auto& d : devices) {
    require_positive(d.energy_coeff, "energy_coeff");
    require_positive(d.max_freq, "max_freq");
    require_positive(d.max_power, "max_power");
    require_positive(d.distance_km, "distance_km");
    if (!(d.channel_gain > 0.0 && d.channel_gain < 1.0))
      throw ConfigError("channel_gain", "must lie in (0, 1)");
    if (d.local_count < 1) throw ConfigError("local_count", "must be >= 1");
    if (static_cast<int>(d.category_counts.size()) != categories)
      throw ConfigError("category_counts", "length must equal categories");
    const auto sum = std::accumulate(d.category_counts.begin(),
                                     d.category_counts.end(), std::int64_t{0});
    if (sum != d.local_count)
      throw ConfigError("category_counts", "must sum to local_count");
    if (std::any_of(d.category_counts.begin(), d.category_counts.end(),
                    [](std::int64_t c) { return c < 0; }))
      throw ConfigError("category_counts", "must be non-negative");
  }
}

double compute_energy(const DeviceProfile& dev, double total_data, double freq,
                      const Scenario& sc) {
  if (!(freq > 0.0)) throw Error(ErrorKind::InvalidFrequency, "frequency must be positive");
  if (freq > dev.max_freq * (1.0 + kFreqSlack)) {
    std::ostringstream os;
    os << "device " << dev.id << " frequency " << freq << " exceeds max "
       << dev.max_freq;
    throw Error(ErrorKind::FrequencyExceeded, os.str());
  }
  return sc.cycles_per_sample() * dev.energy_coeff * total_data * freq * freq;
}

double compute_latency(const DeviceProfile& dev, double total_data, double freq,
                       const Scenario& sc) {
  (void)dev;
  if (!(freq > 0.0)) throw Error(ErrorKind::InvalidFrequency, "frequency must be positive");
  return sc.cycles_per_sample() * total_data / freq;
}

double uplink_rate(double bandwidth, double power, double gain,
                   double noise_psd) {
  return bandwidth * std::log2(1.0 + gain * power / (noise_psd * bandwidth));
}

UplinkCost uplink_cost(double update_size, double bandwidth, double power,
                       double gain, double noise_psd) {
  const double rate = uplink_rate(bandwidth, power, gain, noise_psd);
  if (!(rate > 0.0)) {
    throw Error(ErrorKind::UnreachableServer,
                "uplink rate is zero; model update cannot be delivered");
  }
  return {update_size / rate, update_size * power / rate};
}

double path_loss_gain(double distance_km) {
  const double loss_db = 128.1 + 37.6 * std::log10(distance_km);
  return std::pow(10.0, -loss_db / 10.0);
}

RoundMetrics round_metrics(const Scenario& sc, const Allocation& alloc) {
  if (alloc.devices.size() != sc.devices.size()) {
    throw Error(ErrorKind::InvalidAllocation,
                "allocation and scenario disagree on device count");
  }
  RoundMetrics m;
  m.per_device.reserve(sc.devices.size());
  for (std::size_t i = 0; i < sc.devices.size(); ++i) {
    const auto& dev = sc.devices[i];
    const auto& a = alloc.devices[i];
    const double data = static_cast<double>(dev.local_count) + a.d_gen;
    DeviceCost c;
    c.e_cmp = compute_energy(dev, data, a.freq, sc);
    c.t_cmp = compute_latency(dev, data, a.freq, sc);
    const auto up = uplink_cost(sc.update_size, a.bandwidth, a.power,
                                dev.channel_gain, sc.noise_psd);
    c.e_com = up.energy_j;
    c.t_com = up.latency_s;
    m.energy_j += c.e_cmp + c.e_com;
    m.latency_s = std::max(m.latency_s, c.t_cmp + c.t_com);
    m.uplink_bits += sc.update_size;
    m.per_device.push_back(c);
  }
  return m;
}

namespace {

// Floors every share and hands the leftover units to the largest fractional
// parts; ties go to the lowest index.
std::vector<std::int64_t> largest_remainder(const std::vector<double>& shares,
                                            std::int64_t total) {
  std::vector<std::int64_t> out(shares.size());
  std::vector<double> frac(shares.size());
  std::int64_t assigned = 0;
  for (std::size_t c = 0; c < shares.size(); ++c) {
    const double fl = std::floor(shares[c]);
    out[c] = static_cast<std::int64_t>(fl);
    frac[c] = shares[c] - fl;
    assigned += out[c];
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::int64_t k = 0; k < total - assigned; ++k)
    ++out[order[static_cast<std::size_t>(k) % order.size()]];
  return out;
}

}  // namespace

std::vector<std::vector<std::int64_t>> dirichlet_partition(
    double concentration, int categories, std::int64_t per_device_total,
    int device_count, std::uint64_t seed) {
  if (!(concentration > 0.0))
    throw ConfigError("dirichlet_z", "concentration must be positive");
  if (categories < 1) throw ConfigError("categories", "must be >= 1");
  std::vector<std::vector<std::int64_t>> out;
  out.reserve(static_cast<std::size_t>(device_count));
  for (int i = 0; i < device_count; ++i) {
    Rng rng = Rng::stream(seed, {0xd1c1u, static_cast<std::uint64_t>(i)});
    std::vector<double> draws(static_cast<std::size_t>(categories));
    double sum = 0.0;
    // A draw of all zeros is possible for tiny concentrations; retry.
    while (!(sum > 0.0)) {
      sum = 0.0;
      for (auto& g : draws) {
        g = rng.gamma(concentration);
        sum += g;
      }
    }
    for (auto& g : draws) g = g / sum * static_cast<double>(per_device_total);
    out.push_back(largest_remainder(draws, per_device_total));
  }
  return out;
}

void ScenarioConfig::validate() const {
  if (devices < 1) throw ConfigError("devices", "must be >= 1");
  require_positive(radius_km, "radius_km");
  require_positive(min_distance_km, "min_distance_km");
  if (!(min_distance_km < radius_km))
    throw ConfigError("min_distance_km", "must be smaller than radius_km");
  require_positive(bandwidth_total, "bandwidth_total");
  if (!std::isfinite(noise_psd_dbm)) throw ConfigError("noise_psd_dbm", "must be finite");
  if (noise_psd_unit != "Hz" && noise_psd_unit != "MHz")
    throw ConfigError("noise_psd_unit", "must be \"Hz\" or \"MHz\"");
  require_positive(update_size, "update_size");
  require_positive(workload_per_sample, "workload_per_sample");
  if (local_epochs < 1) throw ConfigError("local_epochs", "must be >= 1");
  require_positive(t_max, "t_max");
  if (!(delta_max > 0.0 && delta_max < 1.0))
    throw ConfigError("delta_max", "must lie in (0, 1)");
  if (!(d_gen_max >= 0.0)) throw ConfigError("d_gen_max", "must be >= 0");
  if (categories < 1) throw ConfigError("categories", "must be >= 1");
  if (local_count < 1) throw ConfigError("local_count", "must be >= 1");
  require_positive(dirichlet_z, "dirichlet_z");
  if (!(max_power_dbm_min <= max_power_dbm_max))
    throw ConfigError("max_power_dbm_min", "must not exceed max_power_dbm_max");
  require_positive(max_freq_min, "max_freq_min");
  if (!(max_freq_min <= max_freq_max))
    throw ConfigError("max_freq_min", "must not exceed max_freq_max");
  require_positive(energy_coeff_min, "energy_coeff_min");
  if (!(energy_coeff_min <= energy_coeff_max))
    throw ConfigError("energy_coeff_min", "must not exceed energy_coeff_max");
  if (layout != "random" && layout != "graded")
    throw ConfigError("layout", "must be \"random\" or \"graded\"");
  curve.validate();
}

double ScenarioConfig::noise_psd_watts_per_hz() const {
  const double watts = dbm_to_watts(noise_psd_dbm);
  return noise_psd_unit == "MHz" ? watts / 1e6 : watts;
}

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  Scenario sc;
  sc.bandwidth_total = config.bandwidth_total;
  sc.noise_psd = config.noise_psd_watts_per_hz();
  sc.update_size = config.update_size;
  sc.workload_per_sample = config.workload_per_sample;
  sc.local_epochs = config.local_epochs;
  sc.t_max = config.t_max;
  sc.delta_max = config.delta_max;
  sc.d_gen_max = config.d_gen_max;
  sc.categories = config.categories;
  sc.curve = config.curve;

  const auto counts = dirichlet_partition(config.dirichlet_z, config.categories,
                                          config.local_count, config.devices, seed);
  const bool graded = config.layout == "graded";
  const double r_min = config.min_distance_km;
  const double r_max = config.radius_km;
  for (int i = 0; i < config.devices; ++i) {
    Rng rng = Rng::stream(seed, {0xde5u, static_cast<std::uint64_t>(i)});
    DeviceProfile d;
    d.id = i;
    d.max_power = dbm_to_watts(
        rng.uniform(config.max_power_dbm_min, config.max_power_dbm_max));
    d.max_freq = rng.uniform(config.max_freq_min, config.max_freq_max);
    d.energy_coeff = rng.uniform(config.energy_coeff_min, config.energy_coeff_max);
    // Uniform over the annulus area.
    d.distance_km = std::sqrt(r_min * r_min +
                              rng.uniform() * (r_max * r_max - r_min * r_min));
    if (graded) {
      const double t = config.devices > 1
                           ? static_cast<double>(i) / (config.devices - 1)
                           : 0.0;
      d.energy_coeff = config.energy_coeff_min +
                       t * (config.energy_coeff_max - config.energy_coeff_min);
      d.distance_km = r_min + t * (r_max - r_min);
    }
    d.channel_gain = path_loss_gain(d.distance_km);
    d.local_count = config.local_count;
    d.category_counts = counts[static_cast<std::size_t>(i)];
    sc.devices.push_back(std::move(d));
  }
  sc.validate();
  return sc;
}

bool ConstraintReport::all_ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConstraintCheck& c) { return c.ok; });
}

ConstraintReport check_constraints(const Scenario& sc, const Allocation& alloc,
                                   const CheckOptions& options) {
  ConstraintReport report;
  auto add = [&](std::string name, double worst) {
    report.checks.push_back({std::move(name), worst <= 0.0, std::max(worst, 0.0)});
  };
  if (alloc.devices.size() != sc.devices.size()) {
    add("device_count", 1.0);
    return report;
  }
  double d_gen_viol = 0, freq_viol = 0, power_viol = 0, eta_viol = 0, cat_viol = 0;
  double band_sum = 0, error_sum = 0, latency = 0;
  for (std::size_t i = 0; i < sc.devices.size(); ++i) {
    const auto& dev = sc.devices[i];
    const auto& a = alloc.devices[i];
    d_gen_viol = std::max({d_gen_viol, -a.d_gen, a.d_gen - sc.d_gen_max * (1 + 1e-12)});
    freq_viol = std::max({freq_viol, a.freq > 0.0 ? 0.0 : 1.0,
                          (a.freq - dev.max_freq * (1 + kFreqSlack)) / dev.max_freq});
    power_viol = std::max({power_viol, -a.power,
                           (a.power - dev.max_power * (1 + 1e-9)) / dev.max_power});
    eta_viol = std::max({eta_viol, a.eta > 0.0 ? 0.0 : 1.0, a.eta < 1.0 ? 0.0 : 1.0});
    const auto cat_sum = std::accumulate(a.category_gen.begin(), a.category_gen.end(),
                                         std::int64_t{0});
    const bool cat_ok =
        static_cast<int>(a.category_gen.size()) == sc.categories &&
        static_cast<double>(cat_sum) == std::round(a.d_gen) &&
        std::all_of(a.category_gen.begin(), a.category_gen.end(),
                    [](std::int64_t c) { return c >= 0; });
    cat_viol = std::max(cat_viol, cat_ok ? 0.0 : 1.0);
    band_sum += a.bandwidth;

    const double data = static_cast<double>(dev.local_count) + a.d_gen;
    const double t_cmp = sc.cycles_per_sample() * data / a.freq;
    const double rate = a.bandwidth * std::log2(1.0 + dev.channel_gain * a.power /
                                                          (sc.noise_psd * a.bandwidth));
    const double t_com = sc.update_size / rate;
    latency = std::max(latency, t_cmp + t_com);
    error_sum += sc.curve.alpha * std::pow(data, -sc.curve.beta) - sc.curve.gamma;
  }
  add("d_gen_bounds", d_gen_viol);
  add("freq_bounds", freq_viol);
  add("power_bounds", power_viol);
  add("eta_range", eta_viol);
  add("category_sum", cat_viol);
  add("bandwidth_sum", (band_sum - sc.bandwidth_total * (1 + 1e-9)) / sc.bandwidth_total);

  report.round_latency_s = latency;
  const double avg = error_sum / static_cast<double>(sc.devices.size());
  report.global_error = std::exp(sc.curve.global_rounds * (avg - 1.0) / sc.curve.zeta);

  const double lat_dev = (latency - sc.t_max) / sc.t_max;
  if (options.expect_full_latency) {
    add("latency_equals_t_max", std::abs(lat_dev) - options.latency_rel_tol);
  } else {
    add("latency_within_t_max", lat_dev - options.latency_rel_tol);
  }
  const double err_dev = (report.global_error - sc.delta_max) / sc.delta_max;
  if (options.expect_error_target) {
    add("global_error_equals_delta_max", std::abs(err_dev) - options.error_rel_tol);
  }
  return report;
}

}  // namespace edgegen
