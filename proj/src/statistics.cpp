#include "sgld/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sgld/errors.hpp"

namespace sgld {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw UsageError("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size() - 1);
}

Estimate mean_ci(std::span<const double> xs, double z) {
  const double mu = mean(xs);
  const double se = std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
  return {mu, mu - z * se, mu + z * se};
}

Estimate bootstrap_mean_ci(std::span<const double> xs, std::size_t resamples,
                           std::uint64_t seed, double level) {
  const double mu = mean(xs);
  if (resamples == 0 || xs.size() < 2) return {mu, mu, mu};
  std::mt19937_64 engine(seed);
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  std::vector<double> means(resamples);
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += xs[pick(engine)];
    m = s / static_cast<double>(xs.size());
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t j = std::min(i + 1, resamples - 1);
    return means[i] + (pos - static_cast<double>(i)) * (means[j] - means[i]);
  };
  return {mu, std::min(mu, quantile(tail)), std::max(mu, quantile(1.0 - tail))};
}

Estimate wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw UsageError("wilson interval with zero trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("least_squares needs >= 2 paired points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw UsageError("least_squares with constant abscissa");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

bool non_increasing_within(std::span<const double> values,
                           std::span<const double> tolerance) {
  if (values.size() < 2) return true;
  if (tolerance.size() + 1 != values.size()) throw UsageError("tolerance size must be values.size() - 1");
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i + 1] > values[i] + tolerance[i]) return false;
  }
  return true;
}

}  // namespace sgld
