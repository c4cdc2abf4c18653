#include "edgegen/lambert_w.hpp"

#include <cmath>
#include <limits>

#include "edgegen/errors.hpp"

namespace edgegen {

namespace {

constexpr double kInvE = 0.36787944117144233;
constexpr int kHalleySteps = 50;
constexpr double kResidual = 1e-12;

// Series in p = sqrt(2(1 + e z)) around the branch point; sign selects branch.
double branch_point_guess(double z, double sign) {
  const double p = sign * std::sqrt(std::max(0.0, 2.0 * (1.0 + std::exp(1.0) * z)));
  return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
}

double halley(double z, double w) {
  for (int k = 0; k < kHalleySteps; ++k) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= kResidual * (1.0 + std::abs(w))) break;
  }
  return w;
}

void check_domain(double z, bool lower) {
  if (z < -kInvE - 1e-15 || (lower && z >= 0.0) || std::isnan(z)) {
    throw Error(ErrorKind::InvalidCurveRange, "Lambert W argument outside real domain");
  }
}

}  // namespace

double lambert_w0(double z) {
  check_domain(z, false);
  if (z == 0.0) return 0.0;
  if (z <= -kInvE) return -1.0;
  double w;
  if (z < -0.3) {
    w = branch_point_guess(z, 1.0);
  } else if (z < 3.0) {
    w = std::log1p(z);
    w = w > 0.0 ? w * (1.0 - std::log1p(w) / (2.0 + w)) : w;
  } else {
    const double l1 = std::log(z);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }
  return halley(z, w);
}

double lambert_wm1(double z) {
  check_domain(z, true);
  if (z <= -kInvE) return -1.0;
  double w;
  if (z < -0.25) {
    w = branch_point_guess(z, -1.0);
  } else {
    const double l1 = std::log(-z);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }
  return halley(z, w);
}

}  // namespace edgegen
