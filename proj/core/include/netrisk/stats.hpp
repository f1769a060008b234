#pragma once

#include <cstdint>
#include <vector>

namespace netrisk {

struct QuantileInterval {
  double q = 0.0;
  double point = 0.0;  // order statistic ceil(q*N)
  double lower = 0.0;
  double upper = 0.0;
  int lower_rank = 0;  // 1-based order-statistic ranks backing the interval
  int upper_rank = 0;
};

// Distribution-free two-sided quantile interval: the tightest pair of order
// statistics (l, u) such that the Binomial(N, q) mass on [l, u-1] is at
// least `confidence`. Ranks are clamped to [1, N] at the extremes.
// `sorted` must be ascending. Throws InvalidArgument for empty samples or
// q outside (0,1).
QuantileInterval quantile_interval(const std::vector<double>& sorted, double q,
                                   double confidence);

double binomial_pmf(std::int64_t n, std::int64_t k, double p);

double mean(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);
double median(std::vector<double> xs);

}  // namespace netrisk
