#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace edgegen {

struct CategoryAllocation {
  std::vector<std::int64_t> local_counts;
  std::vector<std::int64_t> gen_counts;
  std::int64_t budget = 0;
};

struct WaterFill {
  std::vector<double> gen;
  double level = 0.0;  // common total reached by every topped-up category
};

/// Shannon entropy (bits) of the mixed category histogram.
double data_entropy(std::span<const std::int64_t> local_counts,
                    std::span<const double> gen_counts);
double data_entropy(std::span<const std::int64_t> local_counts,
                    std::span<const std::int64_t> gen_counts);

/// Entropy-maximizing continuous split of budget: gen_c = max(level - d_c, 0)
/// with the level fixed by sum(gen) = budget. Exact, via sorting.
WaterFill optimal_augmentation(std::span<const std::int64_t> local_counts,
                               double budget);

/// Water level found by bisection on the piecewise-linear fill volume.
double water_level_by_bisection(std::span<const std::int64_t> local_counts,
                                double budget);

/// Largest-remainder rounding to an integer vector summing to budget; ties
/// go to the lowest category index. Throws InvalidAllocation on negative
/// entries or a sum mismatch.
std::vector<std::int64_t> integerize(std::span<const double> gen, std::int64_t budget);

CategoryAllocation solve_p8(std::span<const std::int64_t> local_counts,
                            std::int64_t budget);

/// Whole budget to the category with the fewest local samples.
CategoryAllocation scarcest_category_augmentation(
    std::span<const std::int64_t> local_counts, std::int64_t budget);

}  // namespace edgegen
