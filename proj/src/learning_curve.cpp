#include "edgegen/learning_curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "edgegen/errors.hpp"

namespace edgegen {

void CurveParams::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("alpha", "must be positive");
  if (!(beta > 0.0)) throw ConfigError("beta", "must be positive");
  if (!(gamma > 0.0)) throw ConfigError("gamma", "must be positive");
  if (!(zeta > 0.0)) throw ConfigError("zeta", "must be positive");
  if (global_rounds < 1) throw ConfigError("global_rounds", "must be >= 1");
}

double local_error(double d_loc, double d_gen, const CurveParams& params) {
  const double total = d_loc + d_gen;
  if (!(total >= 1.0)) {
    throw Error(ErrorKind::InvalidCurveRange,
                "local error needs at least one training sample");
  }
  const double err = params.alpha * std::pow(total, -params.beta) - params.gamma;
  if (!(err > 0.0)) {
    std::ostringstream os;
    os << "local error " << err << " at data amount " << total
       << " is not positive; curve parameters do not fit this data scale";
    throw Error(ErrorKind::InvalidCurveRange, os.str());
  }
  return err;
}

double required_mixed_size(double target_error, const CurveParams& params) {
  if (!(target_error + params.gamma > 0.0)) {
    throw Error(ErrorKind::InvalidCurveRange,
                "target error must exceed -gamma");
  }
  return std::pow((params.gamma + target_error) / params.alpha,
                  -1.0 / params.beta);
}

double global_error(double avg_local_error, const CurveParams& params) {
  return std::exp(params.global_rounds * (avg_local_error - 1.0) / params.zeta);
}

double error_budget(int scenario_size, const CurveParams& params,
                    double delta_max) {
  const double devices = scenario_size;
  return devices +
         params.zeta * devices / params.global_rounds * std::log(delta_max);
}

double rounds_to_error(double target_delta, double avg_local_error,
                       const CurveParams& params) {
  if (avg_local_error >= 1.0) {
    throw Error(ErrorKind::DivergentTraining,
                "average local error >= 1 never converges");
  }
  return params.zeta * std::log(1.0 / target_delta) / (1.0 - avg_local_error);
}

namespace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

// Gaussian elimination with partial pivoting; false when singular.
bool solve3(Mat3 a, Vec3 b, Vec3& x) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0 || !std::isfinite(a[pivot][col])) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return std::all_of(x.begin(), x.end(),
                     [](double v) { return std::isfinite(v); });
}

double sse(std::span<const FitSample> samples, const Vec3& p) {
  double total = 0.0;
  for (const auto& s : samples) {
    const double r = p[0] * std::pow(static_cast<double>(s.data_amount), -p[1]) -
                     p[2] - s.observed_error;
    total += r * r;
  }
  return total;
}

// For fixed beta the model is linear in (alpha, gamma).
bool linear_start(std::span<const FitSample> samples, double beta, Vec3& p) {
  double sxx = 0, sx = 0, sy = 0, sxy = 0;
  const double n = static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const double x = std::pow(static_cast<double>(s.data_amount), -beta);
    sxx += x * x;
    sx += x;
    sy += s.observed_error;
    sxy += x * s.observed_error;
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) return false;
  const double slope = (n * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / n;
  p = {slope, beta, -intercept};
  return slope > 0.0;
}

// Levenberg-Marquardt with Marquardt diagonal scaling.
Vec3 refine(std::span<const FitSample> samples, Vec3 p) {
  double lambda = 1e-3;
  double cost = sse(samples, p);
  for (int iter = 0; iter < 500; ++iter) {
    Mat3 jtj{};
    Vec3 jtr{};
    for (const auto& s : samples) {
      const double d = static_cast<double>(s.data_amount);
      const double x = std::pow(d, -p[1]);
      const Vec3 j = {x, -p[0] * std::log(d) * x, -1.0};
      const double r = p[0] * x - p[2] - s.observed_error;
      for (int a = 0; a < 3; ++a) {
        jtr[a] += j[a] * r;
        for (int b = 0; b < 3; ++b) jtj[a][b] += j[a] * j[b];
      }
    }
    bool improved = false;
    Vec3 step{};
    while (lambda < 1e16) {
      Mat3 lhs = jtj;
      for (int a = 0; a < 3; ++a) lhs[a][a] += lambda * jtj[a][a];
      Vec3 rhs = {-jtr[0], -jtr[1], -jtr[2]};
      if (solve3(lhs, rhs, step)) {
        const Vec3 trial = {p[0] + step[0], p[1] + step[1], p[2] + step[2]};
        if (trial[0] > 0.0 && trial[1] > 0.0) {
          const double trial_cost = sse(samples, trial);
          if (trial_cost <= cost) {
            p = trial;
            cost = trial_cost;
            lambda = std::max(lambda * 0.3, 1e-15);
            improved = true;
            break;
          }
        }
      }
      lambda *= 10.0;
    }
    if (!improved) break;
    const double rel = std::max({std::abs(step[0]) / std::abs(p[0]),
                                 std::abs(step[1]) / std::abs(p[1]),
                                 std::abs(step[2]) / (std::abs(p[2]) + 1e-12)});
    if (rel < 1e-15 || cost == 0.0) break;
  }
  return p;
}

}  // namespace

PowerLawFit fit_power_law(std::span<const FitSample> samples) {
  std::set<std::int64_t> distinct;
  for (const auto& s : samples) {
    if (s.data_amount < 1 || !std::isfinite(s.observed_error))
      throw Error(ErrorKind::InsufficientData,
                  "fit samples need data_amount >= 1 and a finite error");
    distinct.insert(s.data_amount);
  }
  if (samples.size() < 4 || distinct.size() < 3) {
    throw Error(ErrorKind::InsufficientData,
                "power-law fit needs >= 4 samples at >= 3 distinct data amounts");
  }
  const auto [lo, hi] = std::minmax_element(
      samples.begin(), samples.end(), [](const FitSample& a, const FitSample& b) {
        return a.observed_error < b.observed_error;
      });
  if (hi->observed_error - lo->observed_error <=
      4.0 * std::numeric_limits<double>::epsilon() *
          std::max(std::abs(hi->observed_error), std::abs(lo->observed_error))) {
    throw Error(ErrorKind::DegenerateFit,
                "all observed errors are equal; decay exponent is not identifiable");
  }

  Vec3 best{};
  double best_cost = std::numeric_limits<double>::infinity();
  for (double beta0 : {0.1, 0.3, 0.5, 0.8}) {
    Vec3 start{};
    if (!linear_start(samples, beta0, start)) continue;
    const Vec3 p = refine(samples, start);
    const double cost = sse(samples, p);
    if (cost < best_cost) {
      best_cost = cost;
      best = p;
    }
  }
  if (!std::isfinite(best_cost)) {
    throw Error(ErrorKind::DegenerateFit,
                "errors do not decrease with data amount");
  }
  return PowerLawFit{best[0], best[1], best[2], std::sqrt(best_cost)};
}

}  // namespace edgegen
