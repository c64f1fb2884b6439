#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sgld {

// Point estimate with a two-sided interval [lo, hi].
struct Estimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
  bool operator==(const Estimate&) const = default;
};

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

// Normal-approximation 95% interval for the mean.
Estimate mean_ci(std::span<const double> xs, double z = 1.959963984540054);

// Percentile bootstrap interval for the mean; deterministic given seed.
Estimate bootstrap_mean_ci(std::span<const double> xs, std::size_t resamples,
                           std::uint64_t seed, double level = 0.95);

// Wilson score interval for a binomial proportion.
Estimate wilson_interval(std::size_t successes, std::size_t trials,
                         double z = 1.959963984540054);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// True when every consecutive pair satisfies next <= prev + tolerance[i], where
// tolerance[i] is the CI allowance for the (i, i+1) comparison.
bool non_increasing_within(std::span<const double> values,
                           std::span<const double> tolerance);

}  // namespace sgld
