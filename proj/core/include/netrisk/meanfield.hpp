#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "netrisk/network.hpp"

namespace netrisk {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int32_t>;

// Row-sub-stochastic in-weight matrix W (row i holds w_ij over j in
// delta_in(i)) and the contagion operator AW.
SparseRowMatrix weight_matrix(const ContractorNetwork& net);
SparseRowMatrix contagion_matrix(const ContractorNetwork& net);  // AW

enum class SolveMethod { Auto, DirectSolve, NeumannIteration };

struct SolverConfig {
  SolveMethod method = SolveMethod::Auto;  // Auto: direct for n <= 10000
  double tolerance = 1e-12;                // residual infinity-norm target
  int max_iterations = 0;                  // 0 = derived from the contraction factor
};

struct MeanFieldSolution {
  Eigen::VectorXd m;
  double residual = 0.0;  // ||m - (I-A)r - AW m||_inf
  int iterations = 0;     // 0 for DirectSolve
  SolveMethod method_used = SolveMethod::DirectSolve;
};

struct CentralityVector {
  Eigen::VectorXd u;        // (1/n) 1^T (I-AW)^{-1} (I-A), as a column
  Eigen::VectorXd u_tilde;  // beta^T (I-AW)^{-1} (I-A); loss-weighted, unnormalized
};

struct GapBound {
  double delta = 0.0;
  Eigen::VectorXd node_bound;   // delta * (I-AW)^{-1} A r
  double loss_bound = 0.0;      // delta * beta^T (I-AW)^{-1} A r
  double min_slack = 0.0;       // min_i (m_i - r_i - node_bound_i)
};

struct AmplificationReport {
  Eigen::VectorXd m_minus_r;    // (I-AW)^{-1} A (W - I) r
  std::vector<bool> amplified;  // m_minus_r > 0 per node
};

// t-step mean-field recursion m^0 = r, m^{t+1} = (I-A)r + AW m^t.
Eigen::VectorXd iterate_mean_field(const ContractorNetwork& net, int t);

// Fixed point m = (I-AW)^{-1}(I-A) r. DirectSolve uses sparse LU;
// NeumannIteration applies the recursion until the residual target is met
// (on DAGs it terminates exactly after depth steps).
MeanFieldSolution solve_fixed_point(const ContractorNetwork& net,
                                    const SolverConfig& config = {});

// A-priori bound on ||m^t - m||_inf for t >= 2. With use_depth, DAGs give
// exactly 0 once t reaches the depth; otherwise the geometric bound
// (1 + 2/(1-g)) * ||r||_inf * g^floor(t/2) with g = ||(AW)^2||_inf.
double convergence_bound(const ContractorNetwork& net, int t,
                         bool use_depth = true);

// Risk-based and loss-weighted centralities via one transposed solve each.
CentralityVector centrality(const ContractorNetwork& net,
                            const SolverConfig& config = {});

// d m / d alpha_i for intermediary i: (I-AW)^{-1} d(A)/d(alpha_i) (W m - r).
Eigen::VectorXd alpha_sensitivity(const ContractorNetwork& net, int intermediary,
                                  const SolverConfig& config = {});

// Contagion-gap lower bound m - r >= delta (I-AW)^{-1} A r. Without an
// explicit delta the margin check must certify the strict assumption or
// AssumptionViolated is thrown.
GapBound gap_lower_bound(const ContractorNetwork& net,
                         std::optional<double> delta_override = {},
                         const SolverConfig& config = {});

// Closed-form m - r = (I-AW)^{-1} A (W - I) r with per-node sign flags.
AmplificationReport amplification_condition(const ContractorNetwork& net,
                                            const SolverConfig& config = {});

double expected_loss(const ContractorNetwork& net, const Eigen::VectorXd& m);

}  // namespace netrisk
