#include "edgegen/errors.hpp"

#include <sstream>

namespace edgegen {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidCurveRange: return "InvalidCurveRange";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::DivergentTraining: return "DivergentTraining";
    case ErrorKind::FrequencyExceeded: return "FrequencyExceeded";
    case ErrorKind::InvalidFrequency: return "InvalidFrequency";
    case ErrorKind::UnreachableServer: return "UnreachableServer";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InfeasibleBudget: return "InfeasibleBudget";
    case ErrorKind::BisectionStalled: return "BisectionStalled";
    case ErrorKind::InfeasibleBandwidth: return "InfeasibleBandwidth";
    case ErrorKind::DeviceInfeasible: return "DeviceInfeasible";
    case ErrorKind::NoFeasibleRegion: return "NoFeasibleRegion";
    case ErrorKind::InvalidAllocation: return "InvalidAllocation";
    case ErrorKind::PolicyInfeasible: return "PolicyInfeasible";
    case ErrorKind::DegenerateGradient: return "DegenerateGradient";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string budget_message(double budget, double lower, double upper) {
  std::ostringstream os;
  os.precision(10);
  os << "error budget " << budget << " outside feasible range [" << lower
     << ", " << upper << "]";
  return os.str();
}

}  // namespace

InfeasibleBudget::InfeasibleBudget(double budget, double lower, double upper)
    : Error(ErrorKind::InfeasibleBudget, budget_message(budget, lower, upper)),
      budget_(budget),
      lower_(lower),
      upper_(upper) {}

InfeasibleBandwidth::InfeasibleBandwidth(double shortfall,
                                         const std::string& detail)
    : Error(ErrorKind::InfeasibleBandwidth, detail), shortfall_(shortfall) {}

}  // namespace edgegen
