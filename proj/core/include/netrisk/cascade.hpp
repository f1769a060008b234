#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "netrisk/network.hpp"
#include "netrisk/stats.hpp"

namespace netrisk {

using StateVector = std::vector<std::uint8_t>;

struct SimulationConfig {
  int replications = 10000;
  std::optional<int> horizon;  // absent: mixing_horizon(epsilon)
  double epsilon = 0.01;       // TV target used when horizon is derived
  std::uint64_t seed = 0;
  std::vector<double> quantiles = {0.5, 0.9, 0.95, 0.99, 0.995};
  double confidence = 0.95;
  int threads = 0;  // 0 = hardware concurrency
};

enum class MixingBranch { DagDepth, NormBound };

struct MixingCertificate {
  int horizon = 0;
  MixingBranch branch = MixingBranch::NormBound;
  double epsilon = 0.0;
  double norm_aw_squared = 0.0;
};

struct LossDistribution {
  std::vector<double> samples;  // ascending
  double mean = 0.0;
  std::vector<QuantileInterval> quantiles;
  double confidence = 0.0;
};

struct StationaryLossReport {
  LossDistribution t0;
  LossDistribution stationary;
  MixingCertificate certificate;
  // losses in replication order (pairing preserved for losses.csv)
  std::vector<double> t0_by_replication;
  std::vector<double> stationary_by_replication;
};

struct DominanceReport {
  std::vector<double> thresholds;                 // epsilon grid
  std::vector<std::vector<double>> survival;      // [t][threshold] P(L > eps)
  bool pathwise_monotone = true;                  // zero coupling violations
  bool exploratory = false;                       // assumption check failed
  int horizon = 0;
  int violations = 0;
};

// One synchronous update from state x using one uniform per node (node
// order = index order): X_i' = 1 iff u_i <= (1-a_i) r_i + a_i sum_j w_ij x_j.
StateVector step(const ContractorNetwork& net, const StateVector& x,
                 std::span<const double> uniforms);

// Full trajectory X^0..X^horizon for one replication stream; X^0 draws one
// uniform per node against r.
std::vector<StateVector> simulate_trajectory(const ContractorNetwork& net,
                                             const SimulationConfig& config,
                                             std::uint64_t replication);

// Horizon with a certified TV gap: DAG depth when acyclic, else
// ceil(2 + 2/(1-g) log(n/epsilon)) with g = ||(AW)^2||_inf.
MixingCertificate mixing_horizon(const ContractorNetwork& net, double epsilon);

// Replicated losses beta^T X at t=0 and at the certified horizon, with
// order-statistic quantile intervals. Deterministic for a fixed seed
// independent of thread count.
StationaryLossReport sample_stationary_losses(const ContractorNetwork& net,
                                              const SimulationConfig& config);

// Monotone-coupling check: X~_i^t = 1{U_i <= m_i^t} with one uniform per
// node per replication; survival curves of L(X~^t) per step. Violations are
// counted whenever a path decreases while the mean-field marginals are
// nondecreasing at that step.
DominanceReport coupled_dominance_test(const ContractorNetwork& net,
                                       const SimulationConfig& config);

// --- time-varying extension -------------------------------------------

struct TimeVaryingNetwork {
  std::vector<ContractorNetwork> snapshots;  // shared node set and r
  double alpha_bar = 0.0;                    // uniform bound over non-obligee alphas
};

// Validates shared node ids and r, role persistence (the principal set is
// the same at every snapshot) and the alpha_bar bound. Throws
// RolePersistenceViolated / AlphaBoundViolated.
TimeVaryingNetwork make_time_varying(std::vector<ContractorNetwork> snapshots,
                                     double alpha_bar);

struct TimeVaryingReport {
  std::vector<double> mismatch_fraction;  // [t] fraction of pairs with X^t != Y^t
  std::vector<double> tv_bound;           // [t] n * alpha_bar^floor(t/2)
  int horizon = 0;
};

// Two chains from x0 / y0 sharing per-step uniforms; snapshot min(t, last)
// drives step t -> t+1.
TimeVaryingReport simulate_time_varying(const TimeVaryingNetwork& tv,
                                        const StateVector& x0,
                                        const StateVector& y0,
                                        const SimulationConfig& config);

// Directory layout: shared nodes.csv plus edges_t0.csv, edges_t1.csv, ...
// Per-snapshot roles are re-derived, so the shared alpha column only binds
// where a node is an intermediary in that snapshot.
TimeVaryingNetwork load_time_varying(const std::string& dir, double alpha_bar);

}  // namespace netrisk
