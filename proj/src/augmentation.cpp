#include "edgegen/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgegen/errors.hpp"

namespace edgegen {

namespace {

template <typename Gen>
double entropy_impl(std::span<const std::int64_t> local, std::span<const Gen> gen) {
  double total = 0.0;
  for (std::size_t c = 0; c < local.size(); ++c)
    total += static_cast<double>(local[c]) + static_cast<double>(gen[c]);
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (std::size_t c = 0; c < local.size(); ++c) {
    const double p = (static_cast<double>(local[c]) + static_cast<double>(gen[c])) / total;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

double data_entropy(std::span<const std::int64_t> local_counts,
                    std::span<const double> gen_counts) {
  return entropy_impl(local_counts, gen_counts);
}

double data_entropy(std::span<const std::int64_t> local_counts,
                    std::span<const std::int64_t> gen_counts) {
  return entropy_impl(local_counts, gen_counts);
}

WaterFill optimal_augmentation(std::span<const std::int64_t> local_counts,
                               double budget) {
  if (budget < 0.0) throw Error(ErrorKind::InvalidAllocation, "negative budget");
  const std::size_t n = local_counts.size();
  std::vector<double> sorted(local_counts.begin(), local_counts.end());
  std::sort(sorted.begin(), sorted.end());
  double prefix = 0.0;
  double level = n > 0 ? sorted[0] : 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    prefix += sorted[k];
    level = (budget + prefix) / static_cast<double>(k + 1);
    if (k + 1 == n || level <= sorted[k + 1]) break;
  }
  WaterFill out;
  out.level = level;
  out.gen.resize(n);
  for (std::size_t c = 0; c < n; ++c)
    out.gen[c] = std::clamp(level - static_cast<double>(local_counts[c]), 0.0, budget);
  return out;
}

double water_level_by_bisection(std::span<const std::int64_t> local_counts,
                                double budget) {
  auto volume = [&](double level) {
    double v = 0.0;
    for (auto d : local_counts) v += std::max(level - static_cast<double>(d), 0.0);
    return v;
  };
  double lo = static_cast<double>(*std::min_element(local_counts.begin(), local_counts.end()));
  double hi = static_cast<double>(*std::max_element(local_counts.begin(), local_counts.end())) + budget;
  for (int k = 0; k < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++k) {
    const double mid = 0.5 * (lo + hi);
    if (volume(mid) < budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<std::int64_t> integerize(std::span<const double> gen, std::int64_t budget) {
  double sum = 0.0;
  for (double g : gen) {
    if (g < -1e-9) throw Error(ErrorKind::InvalidAllocation, "negative category amount");
    sum += g;
  }
  if (std::abs(sum - static_cast<double>(budget)) > 1e-6 * std::max(1.0, sum)) {
    throw Error(ErrorKind::InvalidAllocation, "category amounts do not sum to the budget");
  }
  std::vector<std::int64_t> out(gen.size());
  std::vector<double> frac(gen.size());
  std::int64_t assigned = 0;
  for (std::size_t c = 0; c < gen.size(); ++c) {
    double v = std::max(gen[c], 0.0);
    const double nearest = std::round(v);
    if (std::abs(v - nearest) <= 1e-9 * std::max(1.0, v)) v = nearest;
    const double fl = std::floor(v);
    out[c] = static_cast<std::int64_t>(fl);
    frac[c] = v - fl;
    assigned += out[c];
  }
  std::vector<std::size_t> order(gen.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::int64_t k = 0; k < budget - assigned; ++k)
    ++out[order[static_cast<std::size_t>(k) % order.size()]];
  return out;
}

CategoryAllocation solve_p8(std::span<const std::int64_t> local_counts,
                            std::int64_t budget) {
  const auto fill = optimal_augmentation(local_counts, static_cast<double>(budget));
  CategoryAllocation out;
  out.local_counts.assign(local_counts.begin(), local_counts.end());
  out.gen_counts = integerize(fill.gen, budget);
  out.budget = budget;
  return out;
}

CategoryAllocation scarcest_category_augmentation(
    std::span<const std::int64_t> local_counts, std::int64_t budget) {
  CategoryAllocation out;
  out.local_counts.assign(local_counts.begin(), local_counts.end());
  out.gen_counts.assign(local_counts.size(), 0);
  out.budget = budget;
  if (!local_counts.empty()) {
    const auto it = std::min_element(local_counts.begin(), local_counts.end());
    out.gen_counts[static_cast<std::size_t>(it - local_counts.begin())] = budget;
  }
  return out;
}

}  // namespace edgegen
