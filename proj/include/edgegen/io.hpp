#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edgegen/ce_optimizer.hpp"
#include "edgegen/experiment.hpp"
#include "edgegen/learning_curve.hpp"
#include "edgegen/system_model.hpp"

namespace edgegen {

using Json = nlohmann::json;

Json to_json(const CurveParams& p);
Json to_json(const DeviceProfile& d);
Json to_json(const Scenario& sc);
Json to_json(const DeviceAllocation& a);
Json to_json(const Allocation& a);
Json to_json(const ScenarioConfig& c);
Json to_json(const CEConfig& c);
Json to_json(const ObjectiveReport& r);
Json to_json(const ConstraintReport& r);
Json to_json(const RoundMetrics& m);

// Readers reject missing or mistyped fields with ConfigError naming the field.
CurveParams curve_from_json(const Json& j);
Scenario scenario_from_json(const Json& j);
Allocation allocation_from_json(const Json& j);
// Config readers start from defaults; only listed keys are overridden, and
// unknown keys are errors.
ScenarioConfig scenario_config_from_json(const Json& j);
CEConfig ce_config_from_json(const Json& j);
LayeredVector layered_vector_from_json(const Json& j);

/// Applies FIELD=VALUE to a JSON document. FIELD is a dotted path
/// ("curve.alpha") or a bare key found at the top level or inside one nested
/// object. VALUE is parsed to the type of the value it replaces.
void apply_override(Json& doc, std::string_view assignment);
void apply_override(Json& doc, std::string_view field, std::string_view value);

/// Formats a double with 17 significant digits.
std::string fmt_double(double v);

std::string device_table_csv(const Scenario& sc);
std::string augmentation_csv(const Scenario& sc, const Allocation& alloc);
std::string trajectory_csv(const Trajectory& t);
std::string ce_trace_csv(const std::vector<CETraceRow>& rows);
std::string nu_trace_csv(const std::vector<NuIterate>& rows);
std::string varpi_trace_csv(const std::vector<VarpiIterate>& rows);

std::vector<FitSample> parse_fit_samples_csv(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace edgegen
