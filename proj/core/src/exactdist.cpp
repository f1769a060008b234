#include "netrisk/exactdist.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>

namespace netrisk {

namespace {

void check_cap(int n, int cap, const char* what) {
  if (n > cap)
    throw_error(ErrorCode::InstanceTooLarge,
                std::string(what) + " supports at most " + std::to_string(cap) +
                    " nodes, got " + std::to_string(n));
  if (n < 0 || n > 30)
    throw_error(ErrorCode::InstanceTooLarge, "state space would overflow");
}

// Conditional failure probabilities given predecessor state bits; `pos`
// maps a node index to its bit position in `state` (-1 = not present, only
// legal for in-edge-free nodes).
double node_prob(const ContractorNetwork& net, int i,
                 const std::vector<int>& pos, std::uint32_t state) {
  double a = net.alpha(i);
  double acc = 0.0;
  for (const auto& e : net.in_edges(i)) {
    int p = pos[static_cast<size_t>(e.principal)];
    if (state >> p & 1u) acc += e.weight;
  }
  return (1.0 - a) * net.r(i) + a * acc;
}

// Tensor-product expansion: out[x] += mass * prod_i Bern(p_i, bit i of x).
void scatter_product(std::vector<double>& out, std::vector<double>& scratch,
                     const std::vector<double>& probs, double mass) {
  const int k = static_cast<int>(probs.size());
  scratch[0] = mass;
  std::uint32_t width = 1;
  for (int i = 0; i < k; ++i) {
    double p = probs[static_cast<size_t>(i)];
    double q = 1.0 - p;
    for (std::uint32_t b = width; b-- > 0;) {
      double v = scratch[b];
      scratch[b | width] = v * p;
      scratch[b] = v * q;
    }
    width <<= 1;
  }
  for (std::uint32_t x = 0; x < width; ++x) out[x] += scratch[x];
}

}  // namespace

JointDistribution product_law(const Eigen::VectorXd& marginals) {
  const int n = static_cast<int>(marginals.size());
  check_cap(n, kLayeredCap, "product law");
  JointDistribution law;
  law.n = n;
  law.p.assign(std::size_t(1) << n, 0.0);
  law.p[0] = 1.0;
  std::uint32_t width = 1;
  for (int i = 0; i < n; ++i) {
    double p = std::clamp(marginals[i], 0.0, 1.0);
    for (std::uint32_t b = width; b-- > 0;) {
      double v = law.p[b];
      law.p[b | width] = v * p;
      law.p[b] = v * (1.0 - p);
    }
    width <<= 1;
  }
  return law;
}

JointDistribution initial_product_law(const ContractorNetwork& net) {
  Eigen::VectorXd r =
      Eigen::Map<const Eigen::VectorXd>(net.r_vec().data(), net.n());
  return product_law(r);
}

namespace {

// Dense synchronous kernel: column s holds P(X' = . | X = s).
Eigen::MatrixXd dense_kernel(const ContractorNetwork& net) {
  const int n = net.n();
  const std::uint32_t size = std::uint32_t(1) << n;
  std::vector<int> pos(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) pos[static_cast<size_t>(i)] = i;
  Eigen::MatrixXd kernel(size, size);
  std::vector<double> probs(static_cast<size_t>(n));
  for (std::uint32_t s = 0; s < size; ++s) {
    for (int i = 0; i < n; ++i)
      probs[static_cast<size_t>(i)] = node_prob(net, i, pos, s);
    double* col = kernel.col(s).data();
    col[0] = 1.0;
    std::uint32_t width = 1;
    for (int i = 0; i < n; ++i) {
      double p = probs[static_cast<size_t>(i)];
      double q = 1.0 - p;
      for (std::uint32_t b = width; b-- > 0;) {
        double v = col[b];
        col[b | width] = v * p;
        col[b] = v * q;
      }
      width <<= 1;
    }
  }
  return kernel;
}

}  // namespace

JointDistribution propagate_law(const ContractorNetwork& net,
                                const JointDistribution& law, int steps) {
  check_cap(net.n(), kDenseCap, "dense propagation");
  if (law.n != net.n())
    throw_error(ErrorCode::DimensionMismatch, "law does not match network size");
  if (steps < 0) throw_error(ErrorCode::InvalidArgument, "steps must be >= 0");
  if (steps == 0) return law;
  Eigen::MatrixXd kernel = dense_kernel(net);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(
      law.p.data(), static_cast<Eigen::Index>(law.p.size()));
  for (int s = 0; s < steps; ++s) v = kernel * v;
  JointDistribution out;
  out.n = law.n;
  out.p.assign(v.data(), v.data() + v.size());
  return out;
}

JointDistribution dag_stationary(const ContractorNetwork& net, int cap) {
  const int n = net.n();
  check_cap(n, cap, "layered stationary law");
  auto ld = layer_decomposition(net);
  if (!ld.is_dag)
    throw_error(ErrorCode::NotADag, "layered stationary law requires a DAG");

  const int d = static_cast<int>(ld.layers.size());
  if (d == 0) return initial_product_law(net);  // edgeless: X^t iid forever

  // Law over the deepest layer at time 0: all its nodes are pure
  // principals, so the product of Bernoulli(r) restricted to it.
  std::vector<std::int32_t> cur_nodes = ld.layers[static_cast<size_t>(d - 1)];
  std::vector<double> cur(std::size_t(1) << cur_nodes.size(), 0.0);
  {
    Eigen::VectorXd marg(static_cast<Eigen::Index>(cur_nodes.size()));
    for (size_t k = 0; k < cur_nodes.size(); ++k)
      marg[static_cast<Eigen::Index>(k)] = net.r(cur_nodes[k]);
    cur = product_law(marg).p;
  }

  std::vector<int> pos(static_cast<size_t>(n), -1);
  std::vector<double> probs;
  std::vector<double> scratch;

  // Walk layers d-1 .. 1, then expand to the full node set: each pass maps
  // the law of X^{t} on layer k+1 to the law of X^{t+1} on layer k.
  for (int k = d - 1; k >= 0; --k) {
    const std::vector<std::int32_t>* target_nodes = nullptr;
    std::vector<std::int32_t> all_nodes;
    if (k >= 1) {
      target_nodes = &ld.layers[static_cast<size_t>(k - 1)];
    } else {
      all_nodes.resize(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) all_nodes[static_cast<size_t>(i)] = i;
      target_nodes = &all_nodes;
    }
    std::fill(pos.begin(), pos.end(), -1);
    for (size_t j = 0; j < cur_nodes.size(); ++j)
      pos[static_cast<size_t>(cur_nodes[j])] = static_cast<int>(j);

    const size_t tcount = target_nodes->size();
    std::vector<double> next(std::size_t(1) << tcount, 0.0);
    probs.resize(tcount);
    scratch.resize(std::size_t(1) << tcount);
    const std::uint32_t src_size = std::uint32_t(1) << cur_nodes.size();
    for (std::uint32_t s = 0; s < src_size; ++s) {
      double mass = cur[s];
      if (mass == 0.0) continue;
      for (size_t j = 0; j < tcount; ++j)
        probs[j] = node_prob(net, (*target_nodes)[j], pos, s);
      scatter_product(next, scratch, probs, mass);
    }
    cur = std::move(next);
    cur_nodes = *target_nodes;
  }

  JointDistribution out;
  out.n = n;
  out.p = std::move(cur);
  return out;
}

BruteForceResult brute_force_stationary(const ContractorNetwork& net, int t_max) {
  const int n = net.n();
  check_cap(n, kDenseCap, "brute-force stationary law");
  constexpr double kTvTarget = 1e-13;

  if (t_max <= 0) {
    auto ld = layer_decomposition(net);
    if (ld.is_dag) {
      t_max = ld.depth.value_or(0) + 2;
    } else {
      double g = operator_norm_aw_squared(net);
      if (!(g < 1.0))
        throw_error(ErrorCode::NoConvergenceWithinTMax,
                    "||(AW)^2|| >= 1; no contraction certificate");
      double steps =
          2.0 + 2.0 / (1.0 - g) * std::log(std::max(2.0, double(n)) / kTvTarget);
      t_max = static_cast<int>(std::ceil(steps)) * 2 + 8;
    }
  }

  Eigen::MatrixXd kernel = dense_kernel(net);
  JointDistribution law = initial_product_law(net);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(
      law.p.data(), static_cast<Eigen::Index>(law.p.size()));

  BruteForceResult res;
  double tv = 1.0;
  int steps = 0;
  while (steps < t_max) {
    Eigen::VectorXd next = kernel * v;
    ++steps;
    tv = 0.5 * (next - v).lpNorm<1>();
    v = std::move(next);
    if (tv < kTvTarget) break;
  }
  if (tv >= kTvTarget)
    throw_error(ErrorCode::NoConvergenceWithinTMax,
                "TV " + std::to_string(tv) + " after " + std::to_string(steps) +
                    " steps");
  res.law.n = n;
  res.law.p.assign(v.data(), v.data() + v.size());
  res.steps = steps;
  res.last_step_tv = tv;
  res.stationary_gap =
      static_cast<double>(n) * operator_norm_aw_power(net, steps);
  return res;
}

double tv_distance(const JointDistribution& a, const JointDistribution& b) {
  if (a.n != b.n || a.p.size() != b.p.size())
    throw_error(ErrorCode::DimensionMismatch, "laws over different state spaces");
  double acc = 0.0;
  for (size_t i = 0; i < a.p.size(); ++i) acc += std::abs(a.p[i] - b.p[i]);
  return 0.5 * acc;
}

JointDistribution independent_product_law(const ContractorNetwork& net,
                                          const Eigen::VectorXd& m, int cap) {
  check_cap(net.n(), cap, "independent product law");
  if (m.size() != net.n())
    throw_error(ErrorCode::DimensionMismatch, "marginal vector size mismatch");
  return product_law(m);
}

Eigen::VectorXd marginals(const JointDistribution& law) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(law.n);
  const std::uint32_t size = std::uint32_t(1) << law.n;
  for (std::uint32_t s = 0; s < size; ++s) {
    double mass = law.p[s];
    if (mass == 0.0) continue;
    std::uint32_t bits = s;
    while (bits) {
      out[std::countr_zero(bits)] += mass;
      bits &= bits - 1;
    }
  }
  return out;
}

std::vector<double> loss_support(const ContractorNetwork& net, int cap) {
  const int n = net.n();
  check_cap(n, cap, "loss support");
  const std::uint32_t size = std::uint32_t(1) << n;
  std::vector<double> loss(size, 0.0);
  for (std::uint32_t s = 1; s < size; ++s) {
    std::uint32_t low = s & (s - 1);
    loss[s] = loss[low] + net.beta(std::countr_zero(s));
  }
  std::sort(loss.begin(), loss.end());
  loss.erase(std::unique(loss.begin(), loss.end()), loss.end());
  return loss;
}

std::vector<double> loss_survival(const ContractorNetwork& net,
                                  const JointDistribution& law,
                                  const std::vector<double>& thresholds) {
  if (law.n != net.n())
    throw_error(ErrorCode::DimensionMismatch, "law does not match network size");
  const std::uint32_t size = std::uint32_t(1) << law.n;
  std::vector<double> loss(size, 0.0);
  for (std::uint32_t s = 1; s < size; ++s) {
    std::uint32_t low = s & (s - 1);
    loss[s] = loss[low] + net.beta(std::countr_zero(s));
  }
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double eps : thresholds) {
    double acc = 0.0, comp = 0.0;
    for (std::uint32_t s = 0; s < size; ++s) {
      if (!(loss[s] > eps)) continue;
      double x = law.p[s];  // Neumaier to keep tail sums order-stable
      double t = acc + x;
      if (std::abs(acc) >= std::abs(x))
        comp += (acc - t) + x;
      else
        comp += (x - t) + acc;
      acc = t;
    }
    out.push_back(acc + comp);
  }
  return out;
}

}  // namespace netrisk
