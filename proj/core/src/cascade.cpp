#include "netrisk/cascade.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "netrisk/meanfield.hpp"
#include "netrisk/rng.hpp"

namespace netrisk {

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Per-worker scratch so replications never allocate.
struct Engine {
  const ContractorNetwork& net;
  std::vector<double> base;  // (1 - alpha_i) r_i

  explicit Engine(const ContractorNetwork& n) : net(n) {
    base.resize(static_cast<size_t>(n.n()));
    for (int i = 0; i < n.n(); ++i)
      base[static_cast<size_t>(i)] = (1.0 - n.alpha(i)) * n.r(i);
  }

  void initial(UniformStream& stream, StateVector& x) const {
    const int n = net.n();
    x.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      x[static_cast<size_t>(i)] = stream.next() <= net.r(i) ? 1 : 0;
  }

  void advance(UniformStream& stream, const StateVector& x, StateVector& out) const {
    const int n = net.n();
    out.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      double u = stream.next();
      double acc = 0.0;
      for (const auto& e : net.in_edges(i))
        acc += e.weight * x[static_cast<size_t>(e.principal)];
      out[static_cast<size_t>(i)] =
          u <= base[static_cast<size_t>(i)] + net.alpha(i) * acc ? 1 : 0;
    }
  }

  double loss(const StateVector& x) const {
    double acc = 0.0;
    for (int i = 0; i < net.n(); ++i)
      if (x[static_cast<size_t>(i)]) acc += net.beta(i);
    return acc;
  }
};

// Static partition of [0, R) over workers; replication r always lands in
// slot r of the output vectors, so the result is identical for any thread
// count.
template <typename Worker>
void run_chunked(int count, int threads, Worker&& worker) {
  threads = std::min(std::max(threads, 1), std::max(count, 1));
  if (threads <= 1) {
    worker(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  int chunk = (count + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    int lo = w * chunk;
    int hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &worker] { worker(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

LossDistribution summarize_losses(std::vector<double> samples,
                                  const std::vector<double>& qs,
                                  double confidence) {
  LossDistribution out;
  std::sort(samples.begin(), samples.end());
  out.mean = mean(samples);
  out.confidence = confidence;
  for (double q : qs)
    out.quantiles.push_back(quantile_interval(samples, q, confidence));
  out.samples = std::move(samples);
  return out;
}

}  // namespace

StateVector step(const ContractorNetwork& net, const StateVector& x,
                 std::span<const double> uniforms) {
  if (static_cast<int>(x.size()) != net.n() ||
      static_cast<int>(uniforms.size()) != net.n())
    throw_error(ErrorCode::DimensionMismatch,
                "state/uniform vectors must have one entry per node");
  Engine eng(net);
  StateVector out(x.size());
  const int n = net.n();
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& e : net.in_edges(i))
      acc += e.weight * x[static_cast<size_t>(e.principal)];
    out[static_cast<size_t>(i)] =
        uniforms[static_cast<size_t>(i)] <=
                eng.base[static_cast<size_t>(i)] + net.alpha(i) * acc
            ? 1
            : 0;
  }
  return out;
}

std::vector<StateVector> simulate_trajectory(const ContractorNetwork& net,
                                             const SimulationConfig& config,
                                             std::uint64_t replication) {
  int horizon = config.horizon.has_value()
                    ? *config.horizon
                    : mixing_horizon(net, config.epsilon).horizon;
  if (horizon < 0) throw_error(ErrorCode::InvalidArgument, "horizon must be >= 0");
  Engine eng(net);
  UniformStream stream(config.seed, replication);
  std::vector<StateVector> traj;
  traj.reserve(static_cast<size_t>(horizon) + 1);
  StateVector x;
  eng.initial(stream, x);
  traj.push_back(x);
  StateVector next;
  for (int t = 0; t < horizon; ++t) {
    eng.advance(stream, traj.back(), next);
    traj.push_back(next);
  }
  return traj;
}

MixingCertificate mixing_horizon(const ContractorNetwork& net, double epsilon) {
  if (!(epsilon > 0.0))
    throw_error(ErrorCode::InvalidArgument, "epsilon must be > 0");
  MixingCertificate cert;
  cert.epsilon = epsilon;
  cert.norm_aw_squared = operator_norm_aw_squared(net);
  auto ld = layer_decomposition(net);
  if (ld.is_dag) {
    cert.branch = MixingBranch::DagDepth;
    cert.horizon = ld.depth.value_or(0);
    return cert;
  }
  double g = cert.norm_aw_squared;
  if (!(g < 1.0))
    throw_error(ErrorCode::SolverDidNotConverge,
                "||(AW)^2|| >= 1: no mixing certificate");
  double n = std::max(1.0, static_cast<double>(net.n()));
  double bound = 2.0 + 2.0 / (1.0 - g) * std::log(n / epsilon);
  cert.branch = MixingBranch::NormBound;
  cert.horizon = std::max(0, static_cast<int>(std::ceil(bound - 1e-12)));
  return cert;
}

StationaryLossReport sample_stationary_losses(const ContractorNetwork& net,
                                              const SimulationConfig& config) {
  if (config.replications <= 0)
    throw_error(ErrorCode::InvalidArgument, "replications must be > 0");
  StationaryLossReport rep;
  rep.certificate = mixing_horizon(net, config.epsilon);
  int horizon = config.horizon.value_or(rep.certificate.horizon);
  if (config.horizon.has_value()) rep.certificate.horizon = horizon;
  if (horizon < 0) throw_error(ErrorCode::InvalidArgument, "horizon must be >= 0");

  const int R = config.replications;
  rep.t0_by_replication.resize(static_cast<size_t>(R));
  rep.stationary_by_replication.resize(static_cast<size_t>(R));

  Engine eng(net);
  run_chunked(R, resolve_threads(config.threads), [&](int lo, int hi) {
    StateVector x, next;
    for (int r = lo; r < hi; ++r) {
      UniformStream stream(config.seed, static_cast<std::uint64_t>(r));
      eng.initial(stream, x);
      rep.t0_by_replication[static_cast<size_t>(r)] = eng.loss(x);
      for (int t = 0; t < horizon; ++t) {
        eng.advance(stream, x, next);
        x.swap(next);
      }
      rep.stationary_by_replication[static_cast<size_t>(r)] = eng.loss(x);
    }
  });

  rep.t0 = summarize_losses(rep.t0_by_replication, config.quantiles,
                            config.confidence);
  rep.stationary = summarize_losses(rep.stationary_by_replication,
                                    config.quantiles, config.confidence);
  return rep;
}

DominanceReport coupled_dominance_test(const ContractorNetwork& net,
                                       const SimulationConfig& config) {
  if (config.replications <= 0)
    throw_error(ErrorCode::InvalidArgument, "replications must be > 0");
  DominanceReport out;
  out.horizon = config.horizon.has_value()
                    ? *config.horizon
                    : mixing_horizon(net, config.epsilon).horizon;
  if (out.horizon < 0)
    throw_error(ErrorCode::InvalidArgument, "horizon must be >= 0");
  out.exploratory = !check_assumption_monotone(net).satisfied;

  const int n = net.n();
  const int R = config.replications;
  const int T = out.horizon + 1;

  // mean-field marginals m^0..m^horizon
  std::vector<Eigen::VectorXd> m(static_cast<size_t>(T));
  m[0] = Eigen::Map<const Eigen::VectorXd>(net.r_vec().data(), n);
  for (int t = 1; t < T; ++t) m[static_cast<size_t>(t)] = iterate_mean_field(net, t);
  std::vector<char> monotone_step(static_cast<size_t>(std::max(0, T - 1)), 1);
  for (int t = 0; t + 1 < T; ++t) {
    for (int i = 0; i < n; ++i)
      if (m[static_cast<size_t>(t + 1)][i] < m[static_cast<size_t>(t)][i]) {
        monotone_step[static_cast<size_t>(t)] = 0;
        break;
      }
  }

  std::vector<std::vector<double>> losses(
      static_cast<size_t>(T), std::vector<double>(static_cast<size_t>(R)));
  std::atomic<int> violations{0};
  run_chunked(R, resolve_threads(config.threads), [&](int lo, int hi) {
    std::vector<double> u(static_cast<size_t>(n));
    int local_viol = 0;
    for (int r = lo; r < hi; ++r) {
      UniformStream stream(config.seed, static_cast<std::uint64_t>(r));
      for (int i = 0; i < n; ++i) u[static_cast<size_t>(i)] = stream.next();
      double prev = 0.0;
      for (int t = 0; t < T; ++t) {
        double acc = 0.0;
        const auto& mt = m[static_cast<size_t>(t)];
        for (int i = 0; i < n; ++i)
          if (u[static_cast<size_t>(i)] <= mt[i]) acc += net.beta(i);
        losses[static_cast<size_t>(t)][static_cast<size_t>(r)] = acc;
        if (t > 0 && monotone_step[static_cast<size_t>(t - 1)] && acc < prev)
          ++local_viol;
        prev = acc;
      }
    }
    violations += local_viol;
  });
  out.violations = violations.load();
  out.pathwise_monotone = out.violations == 0;

  // threshold grid: pooled distinct sampled losses, thinned to at most 64
  {
    std::vector<double> pool;
    pool.reserve(static_cast<size_t>(T) * static_cast<size_t>(R));
    for (const auto& row : losses) pool.insert(pool.end(), row.begin(), row.end());
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    if (pool.size() <= 64) {
      out.thresholds = std::move(pool);
    } else {
      out.thresholds.reserve(64);
      for (int k = 0; k < 64; ++k) {
        size_t idx = (pool.size() - 1) * static_cast<size_t>(k) / 63;
        out.thresholds.push_back(pool[idx]);
      }
      out.thresholds.erase(
          std::unique(out.thresholds.begin(), out.thresholds.end()),
          out.thresholds.end());
    }
  }
  out.survival.assign(static_cast<size_t>(T), {});
  for (int t = 0; t < T; ++t) {
    auto sorted = losses[static_cast<size_t>(t)];
    std::sort(sorted.begin(), sorted.end());
    auto& row = out.survival[static_cast<size_t>(t)];
    row.reserve(out.thresholds.size());
    for (double eps : out.thresholds) {
      auto it = std::upper_bound(sorted.begin(), sorted.end(), eps);
      row.push_back(static_cast<double>(sorted.end() - it) /
                    static_cast<double>(R));
    }
  }
  return out;
}

}  // namespace netrisk
