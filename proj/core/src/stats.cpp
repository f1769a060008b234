#include "netrisk/stats.hpp"

#include <algorithm>
#include <cmath>

#include "netrisk/errors.hpp"

namespace netrisk {

double binomial_pmf(std::int64_t n, std::int64_t k, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  double lg = std::lgamma(static_cast<double>(n + 1)) -
              std::lgamma(static_cast<double>(k + 1)) -
              std::lgamma(static_cast<double>(n - k + 1)) +
              static_cast<double>(k) * std::log(p) +
              static_cast<double>(n - k) * std::log1p(-p);
  return std::exp(lg);
}

QuantileInterval quantile_interval(const std::vector<double>& sorted, double q,
                                   double confidence) {
  const auto n = static_cast<std::int64_t>(sorted.size());
  if (n == 0)
    throw_error(ErrorCode::InvalidArgument, "quantile of empty sample");
  if (!(q > 0.0 && q < 1.0))
    throw_error(ErrorCode::InvalidArgument, "quantile level must lie in (0,1)");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw_error(ErrorCode::InvalidArgument, "confidence must lie in (0,1)");

  QuantileInterval out;
  out.q = q;
  auto point_rank = static_cast<std::int64_t>(
      std::ceil(q * static_cast<double>(n) - 1e-12));
  point_rank = std::clamp<std::int64_t>(point_rank, 1, n);
  out.point = sorted[static_cast<size_t>(point_rank - 1)];

  // Count window [a, b] of Binomial(n, q) outcomes with mass >= confidence;
  // the covering order statistics are then (a+1 .. b+1) -> clamped ranks.
  double mu = q * static_cast<double>(n);
  double sigma = std::sqrt(static_cast<double>(n) * q * (1.0 - q));
  std::int64_t lo = 0, hi = n;
  if (n > 2000) {
    lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(mu - 14.0 * sigma - 4));
    hi = std::min<std::int64_t>(n, static_cast<std::int64_t>(mu + 14.0 * sigma + 4));
  }
  std::vector<double> pmf(static_cast<size_t>(hi - lo + 1));
  double window_mass = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    pmf[static_cast<size_t>(k - lo)] = binomial_pmf(n, k, q);
    window_mass += pmf[static_cast<size_t>(k - lo)];
  }
  if (window_mass < confidence) {  // extreme q with tiny n: use everything
    lo = 0;
    hi = n;
    pmf.resize(static_cast<size_t>(n + 1));
    for (std::int64_t k = 0; k <= n; ++k)
      pmf[static_cast<size_t>(k)] = binomial_pmf(n, k, q);
  }

  // minimal-width sliding window with mass >= confidence
  std::int64_t best_a = lo, best_b = hi;
  {
    std::int64_t a = 0;
    double mass = 0.0;
    std::int64_t b = -1;
    std::int64_t count = static_cast<std::int64_t>(pmf.size());
    std::int64_t best_w = count + 1;
    for (a = 0; a < count; ++a) {
      if (b < a - 1) {
        b = a - 1;
        mass = 0.0;
      }
      while (mass < confidence && b + 1 < count) {
        ++b;
        mass += pmf[static_cast<size_t>(b)];
      }
      if (mass >= confidence && b - a < best_w) {
        best_w = b - a;
        best_a = lo + a;
        best_b = lo + b;
      }
      mass -= pmf[static_cast<size_t>(a)];
    }
  }

  // Y_(l) <= xi_q <= Y_(u) holds when the count of samples <= xi_q falls in
  // [l, u-1]; translate the count window and clamp into valid ranks.
  out.lower_rank = static_cast<int>(std::clamp<std::int64_t>(best_a, 1, n));
  out.upper_rank = static_cast<int>(std::clamp<std::int64_t>(best_b + 1, 1, n));
  if (out.upper_rank < out.lower_rank) out.upper_rank = out.lower_rank;
  out.lower = sorted[static_cast<size_t>(out.lower_rank - 1)];
  out.upper = sorted[static_cast<size_t>(out.upper_rank - 1)];
  return out;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double acc = 0.0, comp = 0.0;
  for (double x : xs) {  // Neumaier
    double t = acc + x;
    if (std::abs(acc) >= std::abs(x))
      comp += (acc - t) + x;
    else
      comp += (x - t) + acc;
    acc = t;
  }
  return (acc + comp) / static_cast<double>(xs.size());
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw_error(ErrorCode::InvalidArgument, "median of empty set");
  std::sort(xs.begin(), xs.end());
  size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace netrisk
