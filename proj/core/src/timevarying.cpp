#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>
#include <unordered_map>

#include "netrisk/cascade.hpp"
#include "netrisk/io.hpp"
#include "netrisk/rng.hpp"

namespace netrisk {

namespace {

constexpr double kAlphaSlack = 1e-12;

}  // namespace

TimeVaryingNetwork make_time_varying(std::vector<ContractorNetwork> snapshots,
                                     double alpha_bar) {
  if (snapshots.empty())
    throw_error(ErrorCode::InvalidArgument, "at least one snapshot required");
  if (!(alpha_bar > 0.0 && alpha_bar < 1.0))
    throw_error(ErrorCode::AlphaBoundViolated, "alpha_bar must lie in (0, 1)");

  const auto& first = snapshots.front();
  for (size_t s = 1; s < snapshots.size(); ++s) {
    const auto& snap = snapshots[s];
    if (snap.n() != first.n())
      throw_error(ErrorCode::DimensionMismatch, "snapshots differ in node count");
    for (int i = 0; i < first.n(); ++i) {
      if (snap.id(i) != first.id(i))
        throw_error(ErrorCode::DimensionMismatch,
                    "snapshot node sets/order differ at index " + std::to_string(i));
      // Role persistence: the principal set may not change between
      // consecutive snapshots.
      bool was_principal = snapshots[s - 1].out_degree(i) > 0;
      bool is_principal = snap.out_degree(i) > 0;
      if (was_principal != is_principal)
        throw_error(ErrorCode::RolePersistenceViolated,
                    first.id(i) + " switches between principal and pure obligee");
      if (snap.r(i) != first.r(i))
        throw_error(ErrorCode::DimensionMismatch,
                    "idiosyncratic risk must be constant over time (" +
                        first.id(i) + ")");
    }
  }
  for (const auto& snap : snapshots)
    for (int i = 0; i < snap.n(); ++i)
      if (snap.role(i) != Role::PureObligee &&
          snap.alpha(i) > alpha_bar + kAlphaSlack)
        throw_error(ErrorCode::AlphaBoundViolated,
                    snap.id(i) + " has alpha " + std::to_string(snap.alpha(i)) +
                        " above the bound " + std::to_string(alpha_bar));

  TimeVaryingNetwork tv;
  tv.snapshots = std::move(snapshots);
  tv.alpha_bar = alpha_bar;
  return tv;
}

TimeVaryingReport simulate_time_varying(const TimeVaryingNetwork& tv,
                                        const StateVector& x0,
                                        const StateVector& y0,
                                        const SimulationConfig& config) {
  const auto& snaps = tv.snapshots;
  const int n = snaps.front().n();
  if (static_cast<int>(x0.size()) != n || static_cast<int>(y0.size()) != n)
    throw_error(ErrorCode::DimensionMismatch, "initial states must match node count");
  if (config.replications <= 0)
    throw_error(ErrorCode::InvalidArgument, "replications must be > 0");
  int horizon = config.horizon.value_or(2 * static_cast<int>(snaps.size()));
  if (horizon < 0) throw_error(ErrorCode::InvalidArgument, "horizon must be >= 0");

  const int R = config.replications;
  const int T = horizon + 1;
  std::vector<std::atomic<int>> mismatch(static_cast<size_t>(T));
  for (auto& c : mismatch) c.store(0);

  std::vector<std::vector<double>> base(snaps.size());
  for (size_t s = 0; s < snaps.size(); ++s) {
    base[s].resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      base[s][static_cast<size_t>(i)] = (1.0 - snaps[s].alpha(i)) * snaps[s].r(i);
  }

  int threads = config.threads > 0
                    ? config.threads
                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, R);
  auto worker = [&](int lo, int hi) {
    StateVector x, y, xn, yn;
    std::vector<double> u(static_cast<size_t>(n));
    std::vector<int> local(static_cast<size_t>(T), 0);
    for (int r = lo; r < hi; ++r) {
      UniformStream stream(config.seed, static_cast<std::uint64_t>(r));
      x = x0;
      y = y0;
      if (x != y) local[0]++;
      for (int t = 0; t < horizon; ++t) {
        const auto& net = snaps[std::min<size_t>(static_cast<size_t>(t),
                                                 snaps.size() - 1)];
        const auto& b = base[std::min<size_t>(static_cast<size_t>(t),
                                              snaps.size() - 1)];
        for (int i = 0; i < n; ++i) u[static_cast<size_t>(i)] = stream.next();
        xn.resize(static_cast<size_t>(n));
        yn.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
          double ax = 0.0, ay = 0.0;
          for (const auto& e : net.in_edges(i)) {
            ax += e.weight * x[static_cast<size_t>(e.principal)];
            ay += e.weight * y[static_cast<size_t>(e.principal)];
          }
          double a = net.alpha(i);
          double ui = u[static_cast<size_t>(i)];
          xn[static_cast<size_t>(i)] = ui <= b[static_cast<size_t>(i)] + a * ax;
          yn[static_cast<size_t>(i)] = ui <= b[static_cast<size_t>(i)] + a * ay;
        }
        x.swap(xn);
        y.swap(yn);
        if (x != y) local[static_cast<size_t>(t) + 1]++;
      }
    }
    for (int t = 0; t < T; ++t) mismatch[static_cast<size_t>(t)] += local[static_cast<size_t>(t)];
  };
  if (threads <= 1) {
    worker(0, R);
  } else {
    std::vector<std::thread> pool;
    int chunk = (R + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      int lo = w * chunk, hi = std::min(R, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& t : pool) t.join();
  }

  TimeVaryingReport out;
  out.horizon = horizon;
  out.mismatch_fraction.resize(static_cast<size_t>(T));
  out.tv_bound.resize(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    out.mismatch_fraction[static_cast<size_t>(t)] =
        static_cast<double>(mismatch[static_cast<size_t>(t)].load()) /
        static_cast<double>(R);
    out.tv_bound[static_cast<size_t>(t)] =
        static_cast<double>(n) * std::pow(tv.alpha_bar, t / 2);
  }
  return out;
}

TimeVaryingNetwork load_time_varying(const std::string& dir, double alpha_bar) {
  namespace fs = std::filesystem;
  fs::path root(dir);
  fs::path nodes = root / "nodes.csv";
  if (!fs::exists(nodes))
    throw_error(ErrorCode::IoFailure, (root / "nodes.csv").string() + " not found");

  std::vector<ContractorNetwork> snaps;
  for (int k = 0;; ++k) {
    fs::path edges = root / ("edges_t" + std::to_string(k) + ".csv");
    if (!fs::exists(edges)) break;
    NetworkData data = read_csv_records(nodes.string(), edges.string());
    // Re-derive per-snapshot role-bound alphas: the shared alpha column only
    // applies to nodes that are intermediaries in this snapshot.
    std::unordered_map<std::string, std::pair<int, int>> degree;  // in, out
    for (const auto& e : data.edges) {
      degree[e.obligee_id].first++;
      degree[e.principal_id].second++;
    }
    for (auto& nd : data.nodes) {
      auto it = degree.find(nd.node_id);
      int in_deg = it == degree.end() ? 0 : it->second.first;
      int out_deg = it == degree.end() ? 0 : it->second.second;
      if (in_deg == 0 || out_deg == 0) nd.alpha.reset();
      if (in_deg > 0 && out_deg == 0) {
        nd.r = 0.0;
        nd.beta = 0.0;
      }
    }
    snaps.push_back(build_network(data));
  }
  if (snaps.empty())
    throw_error(ErrorCode::IoFailure, "no edges_t<k>.csv snapshots in " + dir);
  return make_time_varying(std::move(snaps), alpha_bar);
}

}  // namespace netrisk
