#include "edgegen/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "edgegen/errors.hpp"

namespace edgegen {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(key, "missing");
  try {
    return it->get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(key, std::string("wrong type: ") + e.what());
  }
}

template <typename T>
void maybe(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = field<T>(j, key);
}

void require_object(const Json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what, "expected a JSON object");
}

void reject_unknown(const Json& j, const Json& known, const std::string& what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) throw ConfigError(it.key(), "unknown field in " + what);
  }
}

std::string_view sampling_name(SamplingMode m) {
  return m == SamplingMode::Clip ? "clip" : "reject";
}

}  // namespace

Json to_json(const CurveParams& p) {
  return {{"alpha", p.alpha},
          {"beta", p.beta},
          {"gamma", p.gamma},
          {"zeta", p.zeta},
          {"global_rounds", p.global_rounds}};
}

Json to_json(const DeviceProfile& d) {
  return {{"id", d.id},
          {"energy_coeff", d.energy_coeff},
          {"max_freq", d.max_freq},
          {"channel_gain", d.channel_gain},
          {"max_power", d.max_power},
          {"local_count", d.local_count},
          {"category_counts", d.category_counts},
          {"distance_km", d.distance_km}};
}

Json to_json(const Scenario& sc) {
  Json devices = Json::array();
  for (const auto& d : sc.devices) devices.push_back(to_json(d));
  return {{"devices", devices},
          {"bandwidth_total", sc.bandwidth_total},
          {"noise_psd", sc.noise_psd},
          {"update_size", sc.update_size},
          {"workload_per_sample", sc.workload_per_sample},
          {"local_epochs", sc.local_epochs},
          {"t_max", sc.t_max},
          {"delta_max", sc.delta_max},
          {"d_gen_max", sc.d_gen_max},
          {"categories", sc.categories},
          {"curve", to_json(sc.curve)}};
}

Json to_json(const DeviceAllocation& a) {
  return {{"id", a.id},
          {"d_gen", a.d_gen},
          {"freq", a.freq},
          {"bandwidth", a.bandwidth},
          {"power", a.power},
          {"eta", a.eta},
          {"category_gen", a.category_gen}};
}

Json to_json(const Allocation& a) {
  Json devices = Json::array();
  for (const auto& d : a.devices) devices.push_back(to_json(d));
  return {{"devices", devices}};
}

Json to_json(const ScenarioConfig& c) {
  return {{"devices", c.devices},
          {"radius_km", c.radius_km},
          {"min_distance_km", c.min_distance_km},
          {"bandwidth_total", c.bandwidth_total},
          {"noise_psd_dbm", c.noise_psd_dbm},
          {"noise_psd_unit", c.noise_psd_unit},
          {"update_size", c.update_size},
          {"workload_per_sample", c.workload_per_sample},
          {"local_epochs", c.local_epochs},
          {"t_max", c.t_max},
          {"delta_max", c.delta_max},
          {"d_gen_max", c.d_gen_max},
          {"categories", c.categories},
          {"local_count", c.local_count},
          {"dirichlet_z", c.dirichlet_z},
          {"max_power_dbm_min", c.max_power_dbm_min},
          {"max_power_dbm_max", c.max_power_dbm_max},
          {"max_freq_min", c.max_freq_min},
          {"max_freq_max", c.max_freq_max},
          {"energy_coeff_min", c.energy_coeff_min},
          {"energy_coeff_max", c.energy_coeff_max},
          {"layout", c.layout},
          {"curve", to_json(c.curve)}};
}

Json to_json(const CEConfig& c) {
  return {{"samples_per_iter", c.samples_per_iter},
          {"elite_count", c.elite_count},
          {"max_iters", c.max_iters},
          {"smoothing", c.smoothing},
          {"sigma_floor", c.sigma_floor},
          {"sampling", sampling_name(c.sampling)},
          {"workers", c.workers}};
}

Json to_json(const ObjectiveReport& r) {
  return {{"objective_j", r.objective_j},
          {"compute_energy_j", r.compute_energy_j},
          {"comm_energy_j", r.comm_energy_j},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"converged", r.converged},
          {"final_max_sigma", r.final_max_sigma}};
}

Json to_json(const ConstraintReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"ok", c.ok}, {"worst", c.worst}});
  }
  return {{"checks", checks},
          {"all_ok", r.all_ok()},
          {"round_latency_s", r.round_latency_s},
          {"global_error", r.global_error}};
}

Json to_json(const RoundMetrics& m) {
  return {{"energy_j", m.energy_j}, {"latency_s", m.latency_s}, {"uplink_bits", m.uplink_bits}};
}

CurveParams curve_from_json(const Json& j) {
  require_object(j, "curve");
  CurveParams p;
  p.alpha = field<double>(j, "alpha");
  p.beta = field<double>(j, "beta");
  p.gamma = field<double>(j, "gamma");
  p.zeta = field<double>(j, "zeta");
  p.global_rounds = field<int>(j, "global_rounds");
  return p;
}

Scenario scenario_from_json(const Json& j) {
  require_object(j, "scenario");
  Scenario sc;
  for (const auto& dj : field<Json>(j, "devices")) {
    require_object(dj, "devices[]");
    DeviceProfile d;
    d.id = field<int>(dj, "id");
    d.energy_coeff = field<double>(dj, "energy_coeff");
    d.max_freq = field<double>(dj, "max_freq");
    d.channel_gain = field<double>(dj, "channel_gain");
    d.max_power = field<double>(dj, "max_power");
    d.local_count = field<std::int64_t>(dj, "local_count");
    d.category_counts = field<std::vector<std::int64_t>>(dj, "category_counts");
    d.distance_km = field<double>(dj, "distance_km");
    sc.devices.push_back(std::move(d));
  }
  sc.bandwidth_total = field<double>(j, "bandwidth_total");
  sc.noise_psd = field<double>(j, "noise_psd");
  sc.update_size = field<double>(j, "update_size");
  sc.workload_per_sample = field<double>(j, "workload_per_sample");
  sc.local_epochs = field<int>(j, "local_epochs");
  sc.t_max = field<double>(j, "t_max");
  sc.delta_max = field<double>(j, "delta_max");
  sc.d_gen_max = field<double>(j, "d_gen_max");
  sc.categories = field<int>(j, "categories");
  sc.curve = curve_from_json(field<Json>(j, "curve"));
  return sc;
}

Allocation allocation_from_json(const Json& j) {
  require_object(j, "allocation");
  Allocation a;
  for (const auto& dj : field<Json>(j, "devices")) {
    require_object(dj, "devices[]");
    DeviceAllocation d;
    d.id = field<int>(dj, "id");
    d.d_gen = field<double>(dj, "d_gen");
    d.freq = field<double>(dj, "freq");
    d.bandwidth = field<double>(dj, "bandwidth");
    d.power = field<double>(dj, "power");
    d.eta = field<double>(dj, "eta");
    d.category_gen = field<std::vector<std::int64_t>>(dj, "category_gen");
    a.devices.push_back(std::move(d));
  }
  return a;
}

ScenarioConfig scenario_config_from_json(const Json& j) {
  require_object(j, "scenario config");
  ScenarioConfig c;
  reject_unknown(j, to_json(c), "scenario config");
  maybe(j, "devices", c.devices);
  maybe(j, "radius_km", c.radius_km);
  maybe(j, "min_distance_km", c.min_distance_km);
  maybe(j, "bandwidth_total", c.bandwidth_total);
  maybe(j, "noise_psd_dbm", c.noise_psd_dbm);
  maybe(j, "noise_psd_unit", c.noise_psd_unit);
  maybe(j, "update_size", c.update_size);
  maybe(j, "workload_per_sample", c.workload_per_sample);
  maybe(j, "local_epochs", c.local_epochs);
  maybe(j, "t_max", c.t_max);
  maybe(j, "delta_max", c.delta_max);
  maybe(j, "d_gen_max", c.d_gen_max);
  maybe(j, "categories", c.categories);
  maybe(j, "local_count", c.local_count);
  maybe(j, "dirichlet_z", c.dirichlet_z);
  maybe(j, "max_power_dbm_min", c.max_power_dbm_min);
  maybe(j, "max_power_dbm_max", c.max_power_dbm_max);
  maybe(j, "max_freq_min", c.max_freq_min);
  maybe(j, "max_freq_max", c.max_freq_max);
  maybe(j, "energy_coeff_min", c.energy_coeff_min);
  maybe(j, "energy_coeff_max", c.energy_coeff_max);
  maybe(j, "layout", c.layout);
  if (j.contains("curve")) {
    Json merged = to_json(c.curve);
    const auto& cj = j.at("curve");
    require_object(cj, "curve");
    reject_unknown(cj, merged, "curve");
    merged.update(cj);
    c.curve = curve_from_json(merged);
  }
  return c;
}

CEConfig ce_config_from_json(const Json& j) {
  require_object(j, "ce config");
  CEConfig c;
  reject_unknown(j, to_json(c), "ce config");
  maybe(j, "samples_per_iter", c.samples_per_iter);
  maybe(j, "elite_count", c.elite_count);
  maybe(j, "max_iters", c.max_iters);
  maybe(j, "smoothing", c.smoothing);
  maybe(j, "sigma_floor", c.sigma_floor);
  maybe(j, "workers", c.workers);
  if (j.contains("sampling")) {
    const auto name = field<std::string>(j, "sampling");
    if (name == "clip") c.sampling = SamplingMode::Clip;
    else if (name == "reject") c.sampling = SamplingMode::Reject;
    else throw ConfigError("sampling", "expected 'clip' or 'reject'");
  }
  return c;
}

LayeredVector layered_vector_from_json(const Json& j) {
  try {
    return j.get<LayeredVector>();
  } catch (const Json::exception&) {
    throw ConfigError("gradient", "expected a list of per-layer number arrays");
  }
}

void apply_override(Json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError(std::string(assignment), "override must look like FIELD=VALUE");
  }
  apply_override(doc, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void apply_override(Json& doc, std::string_view field_name, std::string_view value) {
  const std::string name(field_name);
  Json* target = nullptr;
  if (name.find('.') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream path(name);
    for (std::string part; std::getline(path, part, '.');) parts.push_back(part);
    auto walk = [&](Json* cur) -> Json* {
      for (const auto& part : parts) {
        if (!cur->is_object() || !cur->contains(part)) return nullptr;
        cur = &(*cur)[part];
      }
      return cur;
    };
    target = walk(&doc);
    if (target == nullptr) {
      for (auto& [key, sub] : doc.items()) {
        if (!sub.is_object()) continue;
        if (Json* hit = walk(&sub)) {
          if (target != nullptr) throw ConfigError(name, "ambiguous; use a full dotted path");
          target = hit;
        }
      }
    }
  } else if (doc.contains(name)) {
    target = &doc[name];
  } else {
    for (auto& [key, sub] : doc.items()) {
      if (sub.is_object() && sub.contains(name)) {
        if (target != nullptr) throw ConfigError(name, "ambiguous; use a dotted path");
        target = &sub[name];
      }
    }
  }
  if (target == nullptr || target->is_object() || target->is_array()) {
    throw ConfigError(name, "unknown or non-scalar field");
  }
  const std::string text(value);
  try {
    if (target->is_string()) {
      *target = text;
      return;
    }
    std::size_t used = 0;
    if (target->is_boolean()) {
      if (text == "true") *target = true;
      else if (text == "false") *target = false;
      else throw ConfigError(name, "expected true or false, got '" + text + "'");
      return;
    }
    if (target->is_number_integer()) {
      const long long v = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      *target = v;
      return;
    }
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    *target = v;
  } catch (const std::logic_error&) {
    throw ConfigError(name, "cannot parse '" + text + "' as " + target->type_name());
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string device_table_csv(const Scenario& sc) {
  std::string out = "id,energy_coeff,max_freq,gain,max_power,local_count,distance_km\n";
  for (const auto& d : sc.devices) {
    out += std::to_string(d.id) + ',' + fmt_double(d.energy_coeff) + ',' +
           fmt_double(d.max_freq) + ',' + fmt_double(d.channel_gain) + ',' +
           fmt_double(d.max_power) + ',' + std::to_string(d.local_count) + ',' +
           fmt_double(d.distance_km) + '\n';
  }
  return out;
}

std::string augmentation_csv(const Scenario& sc, const Allocation& alloc) {
  std::string out = "device_id,category,d_loc,d_gen\n";
  for (std::size_t i = 0; i < sc.devices.size(); ++i) {
    const auto& dev = sc.devices[i];
    const auto& gen = alloc.devices.at(i).category_gen;
    for (std::size_t c = 0; c < dev.category_counts.size(); ++c) {
      const std::int64_t g = c < gen.size() ? gen[c] : 0;
      out += std::to_string(dev.id) + ',' + std::to_string(c) + ',' +
             std::to_string(dev.category_counts[c]) + ',' + std::to_string(g) + '\n';
    }
  }
  return out;
}

std::string trajectory_csv(const Trajectory& t) {
  std::string out = "round,delta,cum_energy_j,cum_latency_s,cum_uplink_bits\n";
  for (const auto& p : t.points) {
    out += std::to_string(p.round) + ',' + fmt_double(p.delta) + ',' +
           fmt_double(p.cum_energy_j) + ',' + fmt_double(p.cum_latency_s) + ',' +
           fmt_double(p.cum_uplink_bits) + '\n';
  }
  return out;
}

std::string ce_trace_csv(const std::vector<CETraceRow>& rows) {
  std::string out = "iter,best_objective,mean_sigma\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iter) + ',' + fmt_double(r.best_objective) + ',' +
           fmt_double(r.mean_sigma) + '\n';
  }
  return out;
}

std::string nu_trace_csv(const std::vector<NuIterate>& rows) {
  std::string out = "iter,nu,sum_delta\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out += std::to_string(k) + ',' + fmt_double(rows[k].nu) + ',' +
           fmt_double(rows[k].sum_delta) + '\n';
  }
  return out;
}

std::string varpi_trace_csv(const std::vector<VarpiIterate>& rows) {
  std::string out = "iter,varpi,sum_bandwidth\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out += std::to_string(k) + ',' + fmt_double(rows[k].varpi) + ',' +
           fmt_double(rows[k].sum_bandwidth) + '\n';
  }
  return out;
}

std::vector<FitSample> parse_fit_samples_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto trim = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  if (!std::getline(in, line) || trim(line) != "data_amount,observed_error") {
    throw ConfigError("fit_csv", "header must be data_amount,observed_error");
  }
  std::vector<FitSample> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(line);
      std::size_t used = 0;
      FitSample s;
      const std::string a = line.substr(0, comma);
      const std::string b = line.substr(comma + 1);
      s.data_amount = std::stoll(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      s.observed_error = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
      out.push_back(s);
    } catch (const std::logic_error&) {
      throw ConfigError("fit_csv", "malformed row " + std::to_string(row) + ": '" + line + "'");
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot move into " + path.string() + ": " + ec.message());
}

Json read_json_file(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::IoError, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace edgegen
