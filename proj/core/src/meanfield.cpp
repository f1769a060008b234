#include "netrisk/meanfield.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace netrisk {

namespace {

constexpr int kDirectSolveLimit = 10000;

Eigen::VectorXd base_term(const ContractorNetwork& net) {
  // (I - A) r
  const int n = net.n();
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = (1.0 - net.alpha(i)) * net.r(i);
  return b;
}

Eigen::VectorXd r_vector(const ContractorNetwork& net) {
  return Eigen::Map<const Eigen::VectorXd>(net.r_vec().data(), net.n());
}

int iteration_cap(const ContractorNetwork& net, double tolerance) {
  double g = operator_norm_aw_squared(net);
  if (!(g < 1.0))
    throw_error(ErrorCode::SolverDidNotConverge,
                "||(AW)^2|| = " + std::to_string(g) + " is not < 1");
  double n = std::max(2.0, static_cast<double>(net.n()));
  double tol = std::max(tolerance, 1e-300);
  double cap = 2.0 * std::ceil(std::log(n / tol) / (1.0 - g)) + 2.0;
  return static_cast<int>(std::min(cap, 1e9));
}

}  // namespace

SparseRowMatrix weight_matrix(const ContractorNetwork& net) {
  const int n = net.n();
  std::vector<Eigen::Triplet<double, std::int32_t>> trips;
  trips.reserve(static_cast<size_t>(net.edge_count()));
  for (int i = 0; i < n; ++i)
    for (const auto& e : net.in_edges(i))
      trips.emplace_back(i, e.principal, e.weight);
  SparseRowMatrix w(n, n);
  w.setFromTriplets(trips.begin(), trips.end());
  return w;
}

SparseRowMatrix contagion_matrix(const ContractorNetwork& net) {
  const int n = net.n();
  std::vector<Eigen::Triplet<double, std::int32_t>> trips;
  trips.reserve(static_cast<size_t>(net.edge_count()));
  for (int i = 0; i < n; ++i)
    for (const auto& e : net.in_edges(i))
      trips.emplace_back(i, e.principal, net.alpha(i) * e.weight);
  SparseRowMatrix aw(n, n);
  aw.setFromTriplets(trips.begin(), trips.end());
  return aw;
}

Eigen::VectorXd iterate_mean_field(const ContractorNetwork& net, int t) {
  if (t < 0) throw_error(ErrorCode::InvalidArgument, "t must be >= 0");
  const int n = net.n();
  Eigen::VectorXd m = r_vector(net);
  Eigen::VectorXd base = base_term(net);
  Eigen::VectorXd next(n);
  for (int s = 0; s < t; ++s) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& e : net.in_edges(i)) acc += e.weight * m[e.principal];
      next[i] = base[i] + net.alpha(i) * acc;
    }
    m.swap(next);
  }
  return m;
}

MeanFieldSolution solve_fixed_point(const ContractorNetwork& net,
                                    const SolverConfig& config) {
  const int n = net.n();
  SolveMethod method = config.method;
  if (method == SolveMethod::Auto)
    method = n <= kDirectSolveLimit ? SolveMethod::DirectSolve
                                    : SolveMethod::NeumannIteration;

  MeanFieldSolution sol;
  sol.method_used = method;
  Eigen::VectorXd base = base_term(net);

  if (method == SolveMethod::DirectSolve) {
    Eigen::SparseMatrix<double> system(n, n);
    {
      std::vector<Eigen::Triplet<double>> trips;
      trips.reserve(static_cast<size_t>(net.edge_count() + n));
      for (int i = 0; i < n; ++i) trips.emplace_back(i, i, 1.0);
      for (int i = 0; i < n; ++i)
        for (const auto& e : net.in_edges(i))
          trips.emplace_back(i, e.principal, -net.alpha(i) * e.weight);
      system.setFromTriplets(trips.begin(), trips.end());
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success)
      throw_error(ErrorCode::SolverDidNotConverge, "sparse LU factorization failed");
    sol.m = lu.solve(base);
    if (lu.info() != Eigen::Success)
      throw_error(ErrorCode::SolverDidNotConverge, "sparse LU solve failed");
  } else {
    int cap = config.max_iterations > 0 ? config.max_iterations
                                        : iteration_cap(net, config.tolerance);
    Eigen::VectorXd m = r_vector(net);
    Eigen::VectorXd next(n);
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    while (it < cap) {
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (const auto& e : net.in_edges(i)) acc += e.weight * m[e.principal];
        next[i] = base[i] + net.alpha(i) * acc;
      }
      ++it;
      residual = (next - m).lpNorm<Eigen::Infinity>();
      m.swap(next);
      if (residual <= config.tolerance) break;
    }
    if (residual > config.tolerance)
      throw_error(ErrorCode::SolverDidNotConverge,
                  "residual " + std::to_string(residual) + " after " +
                      std::to_string(it) + " iterations");
    sol.m = std::move(m);
    sol.iterations = it;
  }

  // residual of the fixed-point equation, independent of method
  {
    Eigen::VectorXd lhs = sol.m - base;
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& e : net.in_edges(i)) acc += e.weight * sol.m[e.principal];
      lhs[i] -= net.alpha(i) * acc;
    }
    sol.residual = lhs.lpNorm<Eigen::Infinity>();
  }
  return sol;
}

double convergence_bound(const ContractorNetwork& net, int t, bool use_depth) {
  if (t < 2)
    throw_error(ErrorCode::InvalidArgument, "convergence bound needs t >= 2");
  if (use_depth) {
    auto ld = layer_decomposition(net);
    if (ld.is_dag && t >= ld.depth.value_or(0)) return 0.0;
  }
  double g = operator_norm_aw_squared(net);
  if (!(g < 1.0))
    throw_error(ErrorCode::SolverDidNotConverge,
                "||(AW)^2|| must be < 1 for the geometric bound");
  double rmax = 0.0;
  for (double r : net.r_vec()) rmax = std::max(rmax, r);
  return (1.0 + 2.0 / (1.0 - g)) * rmax * std::pow(g, t / 2);
}

namespace {

// Solve (I - AW)^T z = rhs. Transposed system: column j of AW contributes
// alpha_i w_ij to row j of (AW)^T.
Eigen::VectorXd solve_transposed(const ContractorNetwork& net,
                                 const Eigen::VectorXd& rhs,
                                 const SolverConfig& config) {
  const int n = net.n();
  SolveMethod method = config.method;
  if (method == SolveMethod::Auto)
    method = n <= kDirectSolveLimit ? SolveMethod::DirectSolve
                                    : SolveMethod::NeumannIteration;
  if (method == SolveMethod::DirectSolve) {
    Eigen::SparseMatrix<double> system(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(net.edge_count() + n));
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, 1.0);
    for (int i = 0; i < n; ++i)
      for (const auto& e : net.in_edges(i))
        trips.emplace_back(e.principal, i, -net.alpha(i) * e.weight);
    system.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success)
      throw_error(ErrorCode::SolverDidNotConverge, "sparse LU factorization failed");
    Eigen::VectorXd z = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
      throw_error(ErrorCode::SolverDidNotConverge, "sparse LU solve failed");
    return z;
  }
  // Neumann on the transposed operator: z <- rhs + (AW)^T z, scatter form.
  int cap = config.max_iterations > 0 ? config.max_iterations
                                      : iteration_cap(net, config.tolerance);
  Eigen::VectorXd z = rhs;
  Eigen::VectorXd next(n);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < cap) {
    next = rhs;
    for (int i = 0; i < n; ++i) {
      double zi = z[i];
      if (zi == 0.0) continue;
      double a = net.alpha(i);
      for (const auto& e : net.in_edges(i))
        next[e.principal] += a * e.weight * zi;
    }
    ++it;
    residual = (next - z).lpNorm<Eigen::Infinity>();
    z.swap(next);
    if (residual <= config.tolerance) break;
  }
  if (residual > config.tolerance)
    throw_error(ErrorCode::SolverDidNotConverge,
                "transposed Neumann residual " + std::to_string(residual));
  return z;
}

Eigen::VectorXd solve_forward(const ContractorNetwork& net,
                              const Eigen::VectorXd& rhs,
                              const SolverConfig& config) {
  // (I - AW) y = rhs via the same machinery as solve_fixed_point but with an
  // arbitrary right-hand side.
  const int n = net.n();
  SolveMethod method = config.method;
  if (method == SolveMethod::Auto)
    method = n <= kDirectSolveLimit ? SolveMethod::DirectSolve
                                    : SolveMethod::NeumannIteration;
  if (method == SolveMethod::DirectSolve) {
    Eigen::SparseMatrix<double> system(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(net.edge_count() + n));
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, 1.0);
    for (int i = 0; i < n; ++i)
      for (const auto& e : net.in_edges(i))
        trips.emplace_back(i, e.principal, -net.alpha(i) * e.weight);
    system.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success)
      throw_error(ErrorCode::SolverDidNotConverge, "sparse LU factorization failed");
    Eigen::VectorXd y = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
      throw_error(ErrorCode::SolverDidNotConverge, "sparse LU solve failed");
    return y;
  }
  int cap = config.max_iterations > 0 ? config.max_iterations
                                      : iteration_cap(net, config.tolerance);
  Eigen::VectorXd y = rhs;
  Eigen::VectorXd next(n);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < cap) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& e : net.in_edges(i)) acc += e.weight * y[e.principal];
      next[i] = rhs[i] + net.alpha(i) * acc;
    }
    ++it;
    residual = (next - y).lpNorm<Eigen::Infinity>();
    y.swap(next);
    if (residual <= config.tolerance) break;
  }
  if (residual > config.tolerance)
    throw_error(ErrorCode::SolverDidNotConverge,
                "forward Neumann residual " + std::to_string(residual));
  return y;
}

}  // namespace

CentralityVector centrality(const ContractorNetwork& net,
                            const SolverConfig& config) {
  const int n = net.n();
  CentralityVector out;
  Eigen::VectorXd ones = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd z = solve_transposed(net, ones, config);
  Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(net.beta_vec().data(), n);
  Eigen::VectorXd zt = solve_transposed(net, beta, config);
  out.u.resize(n);
  out.u_tilde.resize(n);
  for (int i = 0; i < n; ++i) {
    double one_minus_a = 1.0 - net.alpha(i);
    out.u[i] = one_minus_a * z[i];
    out.u_tilde[i] = one_minus_a * zt[i];
  }
  return out;
}

Eigen::VectorXd alpha_sensitivity(const ContractorNetwork& net, int intermediary,
                                  const SolverConfig& config) {
  if (intermediary < 0 || intermediary >= net.n())
    throw_error(ErrorCode::InvalidArgument, "node index out of range");
  if (net.role(intermediary) != Role::Intermediary)
    throw_error(ErrorCode::NotAnIntermediary,
                net.id(intermediary) + " is not an intermediary");
  MeanFieldSolution sol = solve_fixed_point(net, config);
  double wm = 0.0;
  for (const auto& e : net.in_edges(intermediary))
    wm += e.weight * sol.m[e.principal];
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(net.n());
  rhs[intermediary] = wm - net.r(intermediary);
  return solve_forward(net, rhs, config);
}

GapBound gap_lower_bound(const ContractorNetwork& net,
                         std::optional<double> delta_override,
                         const SolverConfig& config) {
  GapBound out;
  if (delta_override.has_value()) {
    out.delta = *delta_override;
  } else {
    auto chk = check_assumption_monotone(net);
    if (!chk.satisfied || !chk.delta.has_value() || !(*chk.delta > 0.0))
      throw_error(ErrorCode::AssumptionViolated,
                  "strict margin assumption does not hold; pass an explicit delta");
    out.delta = *chk.delta;
  }
  const int n = net.n();
  Eigen::VectorXd ar(n);
  for (int i = 0; i < n; ++i) ar[i] = net.alpha(i) * net.r(i);
  Eigen::VectorXd g = solve_forward(net, ar, config);
  out.node_bound = out.delta * g;
  double loss = 0.0;
  for (int i = 0; i < n; ++i) loss += net.beta(i) * out.node_bound[i];
  out.loss_bound = loss;

  MeanFieldSolution sol = solve_fixed_point(net, config);
  double slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    slack = std::min(slack, sol.m[i] - net.r(i) - out.node_bound[i]);
  out.min_slack = slack;
  return out;
}

AmplificationReport amplification_condition(const ContractorNetwork& net,
                                            const SolverConfig& config) {
  const int n = net.n();
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    double wr = 0.0;
    for (const auto& e : net.in_edges(i)) wr += e.weight * net.r(e.principal);
    rhs[i] = net.alpha(i) * (wr - net.r(i));
  }
  AmplificationReport out;
  out.m_minus_r = solve_forward(net, rhs, config);
  out.amplified.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    out.amplified[static_cast<size_t>(i)] = out.m_minus_r[i] > 1e-12;
  return out;
}

double expected_loss(const ContractorNetwork& net, const Eigen::VectorXd& m) {
  if (m.size() != net.n())
    throw_error(ErrorCode::DimensionMismatch, "marginal vector size mismatch");
  double acc = 0.0;
  for (int i = 0; i < net.n(); ++i) acc += net.beta(i) * m[i];
  return acc;
}

}  // namespace netrisk
