#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "netrisk/network.hpp"

namespace netrisk {

// Dense law over all 2^n states; states are packed integers with bit i =
// node i failed. Capped well below memory limits (layered DAG: 20 nodes,
// dense propagation: 12).
struct JointDistribution {
  int n = 0;
  std::vector<double> p;  // size 2^n

  double& operator[](std::uint32_t state) { return p[state]; }
  double operator[](std::uint32_t state) const { return p[state]; }
};

inline constexpr int kLayeredCap = 20;
inline constexpr int kDenseCap = 12;

// Product law with P(X_i = 1) = marginal_i.
JointDistribution product_law(const Eigen::VectorXd& marginals);

// Law of X^0 (product of Bernoulli(r_i)).
JointDistribution initial_product_law(const ContractorNetwork& net);

// One synchronous-kernel step applied `steps` times (dense, exact up to
// rounding). Cap kDenseCap.
JointDistribution propagate_law(const ContractorNetwork& net,
                                const JointDistribution& law, int steps);

// Stationary law of a DAG by layer-by-layer forward propagation (exact
// after depth steps). Throws NotADag / InstanceTooLarge.
JointDistribution dag_stationary(const ContractorNetwork& net,
                                 int cap = kLayeredCap);

struct BruteForceResult {
  JointDistribution law;
  int steps = 0;                 // propagation steps taken
  double last_step_tv = 0.0;     // TV between the last two iterates
  double stationary_gap = 0.0;   // certified bound n * ||(AW)^steps||_inf
};

// Dense propagation from the initial product law until successive laws are
// within 1e-13 in TV (or t_max). Works on cyclic networks; the certificate
// bounds the remaining distance to the true stationary law.
BruteForceResult brute_force_stationary(const ContractorNetwork& net,
                                        int t_max = 0 /* 0 = derived */);

double tv_distance(const JointDistribution& a, const JointDistribution& b);

JointDistribution independent_product_law(const ContractorNetwork& net,
                                          const Eigen::VectorXd& m,
                                          int cap = kLayeredCap);

// Per-node failure marginals of a joint law.
Eigen::VectorXd marginals(const JointDistribution& law);

// P(sum_i beta_i X_i  >  eps) for each eps, from an exact law.
std::vector<double> loss_survival(const ContractorNetwork& net,
                                  const JointDistribution& law,
                                  const std::vector<double>& thresholds);

// Distinct achievable loss values beta^T x (ascending).
std::vector<double> loss_support(const ContractorNetwork& net, int cap = kLayeredCap);

}  // namespace netrisk
