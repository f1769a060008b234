#include "netrisk/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

namespace netrisk {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* to_string(DiagCode code) {
  switch (code) {
    case DiagCode::DuplicateEdge: return "DuplicateEdge";
    case DiagCode::UnknownNodeReference: return "UnknownNodeReference";
    case DiagCode::WeightSumExceedsOne: return "WeightSumExceedsOne";
    case DiagCode::WeightSumBelowOne: return "WeightSumBelowOne";
    case DiagCode::RoleAlphaMismatch: return "RoleAlphaMismatch";
    case DiagCode::InvalidProbability: return "InvalidProbability";
    case DiagCode::InvalidWeight: return "InvalidWeight";
    case DiagCode::NegativeAmount: return "NegativeAmount";
    case DiagCode::MissingEdgeWeight: return "MissingEdgeWeight";
    case DiagCode::AmbiguousEdgeWeight: return "AmbiguousEdgeWeight";
    case DiagCode::MalformedRecord: return "MalformedRecord";
  }
  return "Unknown";
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SolverDidNotConverge: return "SolverDidNotConverge";
    case ErrorCode::NotAnIntermediary: return "NotAnIntermediary";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::NotADag: return "NotADag";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoConvergenceWithinTMax: return "NoConvergenceWithinTMax";
    case ErrorCode::StubMatchingFailed: return "StubMatchingFailed";
    case ErrorCode::NoSegmentInformation: return "NoSegmentInformation";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::RolePersistenceViolated: return "RolePersistenceViolated";
    case ErrorCode::AlphaBoundViolated: return "AlphaBoundViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

const char* to_string(Role role) {
  switch (role) {
    case Role::PurePrincipal: return "PurePrincipal";
    case Role::Intermediary: return "Intermediary";
    case Role::PureObligee: return "PureObligee";
  }
  return "Unknown";
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diags) {
  std::ostringstream os;
  int errors = 0;
  for (const auto& d : diags)
    if (d.severity == Severity::Error) ++errors;
  os << errors << " validation error(s)";
  for (const auto& d : diags) {
    if (d.severity != Severity::Error) continue;
    os << "; " << to_string(d.code) << " [" << d.subject << "] " << d.message;
    break;  // first error is enough for the what() string
  }
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diags)
    : std::runtime_error(summarize(diags)), diags_(std::move(diags)) {}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

void throw_error(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

std::optional<int> ContractorNetwork::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ContractorNetwork::revenue(int i) const {
  double v = revenue_[static_cast<size_t>(i)];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

std::span<const ContractorNetwork::InEdge> ContractorNetwork::in_edges(int i) const {
  auto b = static_cast<size_t>(in_offsets_[static_cast<size_t>(i)]);
  auto e = static_cast<size_t>(in_offsets_[static_cast<size_t>(i) + 1]);
  return {in_edges_.data() + b, e - b};
}

int ContractorNetwork::in_degree(int i) const {
  return static_cast<int>(in_offsets_[static_cast<size_t>(i) + 1] -
                          in_offsets_[static_cast<size_t>(i)]);
}

double ContractorNetwork::in_weight_sum(int i) const {
  double s = 0.0;
  for (const auto& e : in_edges(i)) s += e.weight;
  return s;
}

namespace {

struct Staged {
  std::unordered_map<std::string, int> index;
  std::vector<int> in_deg, out_deg;
  // resolved edge list (obligee, principal, weight, bond)
  struct E { int obligee; int principal; double weight; double bond; };
  std::vector<E> edges;
};

void stage(const NetworkData& data, const ValidationOptions& opt,
           std::vector<Diagnostic>& diags, Staged& st) {
  const int n = static_cast<int>(data.nodes.size());
  st.index.reserve(data.nodes.size());
  for (int i = 0; i < n; ++i) {
    const auto& nd = data.nodes[static_cast<size_t>(i)];
    if (nd.node_id.empty()) {
      diags.push_back({DiagCode::MalformedRecord, Severity::Error, "<node>",
                       "empty node_id"});
      continue;
    }
    if (!st.index.emplace(nd.node_id, i).second)
      diags.push_back({DiagCode::MalformedRecord, Severity::Error, nd.node_id,
                       "duplicate node_id"});
  }
  st.in_deg.assign(static_cast<size_t>(n), 0);
  st.out_deg.assign(static_cast<size_t>(n), 0);

  std::set<std::pair<int, int>> seen;
  for (const auto& ed : data.edges) {
    std::string subject = ed.obligee_id + "<-" + ed.principal_id;
    auto oi = st.index.find(ed.obligee_id);
    auto pi = st.index.find(ed.principal_id);
    if (oi == st.index.end() || pi == st.index.end()) {
      diags.push_back({DiagCode::UnknownNodeReference, Severity::Error, subject,
                       "edge references a node that is not declared"});
      continue;
    }
    if (!seen.emplace(oi->second, pi->second).second) {
      diags.push_back({DiagCode::DuplicateEdge, Severity::Error, subject,
                       "edge appears more than once"});
      continue;
    }
    if (ed.weight.has_value() && ed.bond_amount.has_value()) {
      diags.push_back({DiagCode::AmbiguousEdgeWeight, Severity::Error, subject,
                       "exactly one of weight/bond_amount may be given"});
      continue;
    }
    double w = kNaN;
    double bond = kNaN;
    if (ed.weight.has_value()) {
      w = *ed.weight;
    } else if (ed.bond_amount.has_value()) {
      bond = *ed.bond_amount;
      if (bond < 0) {
        diags.push_back({DiagCode::NegativeAmount, Severity::Error, subject,
                         "bond_amount must be nonnegative"});
        continue;
      }
      auto rev = data.nodes[static_cast<size_t>(oi->second)].revenue;
      if (!rev.has_value() || *rev <= 0) {
        diags.push_back({DiagCode::MissingEdgeWeight, Severity::Error, subject,
                         "bond_amount given but obligee has no positive revenue"});
        continue;
      }
      w = bond / *rev;
    } else {
      diags.push_back({DiagCode::MissingEdgeWeight, Severity::Error, subject,
                       "one of weight/bond_amount is required"});
      continue;
    }
    if (!(w > 0.0) || !(w <= 1.0 + opt.weight_tolerance)) {
      diags.push_back({DiagCode::InvalidWeight, Severity::Error, subject,
                       "weight must lie in (0, 1]"});
      continue;
    }
    st.edges.push_back({oi->second, pi->second, w, bond});
    st.in_deg[static_cast<size_t>(oi->second)]++;
    st.out_deg[static_cast<size_t>(pi->second)]++;
  }

  // Row sums per obligee.
  std::vector<double> wsum(static_cast<size_t>(n), 0.0);
  for (const auto& e : st.edges) wsum[static_cast<size_t>(e.obligee)] += e.weight;
  for (int i = 0; i < n; ++i) {
    if (st.in_deg[static_cast<size_t>(i)] == 0) continue;
    double s = wsum[static_cast<size_t>(i)];
    const std::string& id = data.nodes[static_cast<size_t>(i)].node_id;
    if (s > 1.0 + opt.weight_tolerance) {
      diags.push_back({DiagCode::WeightSumExceedsOne, Severity::Error, id,
                       "incoming weights sum to " + std::to_string(s)});
    } else if (s < 1.0 - opt.weight_tolerance) {
      diags.push_back({DiagCode::WeightSumBelowOne,
                       opt.require_stochastic ? Severity::Error : Severity::Warning,
                       id, "incoming weights sum to " + std::to_string(s) +
                       " (unobserved exposure)"});
    }
  }

  // Node attribute / role coupling.
  for (int i = 0; i < n; ++i) {
    const auto& nd = data.nodes[static_cast<size_t>(i)];
    bool has_in = st.in_deg[static_cast<size_t>(i)] > 0;
    bool has_out = st.out_deg[static_cast<size_t>(i)] > 0;
    Role role = !has_in ? Role::PurePrincipal
                        : (!has_out ? Role::PureObligee : Role::Intermediary);

    if (!(nd.r >= 0.0) || !(nd.r < 1.0)) {
      diags.push_back({DiagCode::InvalidProbability, Severity::Error, nd.node_id,
                       "r must lie in [0, 1)"});
    }
    if (nd.beta < 0.0)
      diags.push_back({DiagCode::NegativeAmount, Severity::Error, nd.node_id,
                       "beta must be nonnegative"});
    if (nd.alpha.has_value() && (!(*nd.alpha >= 0.0) || !(*nd.alpha <= 1.0)))
      diags.push_back({DiagCode::InvalidProbability, Severity::Error, nd.node_id,
                       "alpha must lie in [0, 1]"});

    // Hard regardless of overrides: a node with out-edges retains idiosyncratic
    // mass (alpha < 1); this is what keeps I - AW invertible.
    if (has_out && nd.alpha.has_value() && *nd.alpha >= 1.0)
      diags.push_back({DiagCode::RoleAlphaMismatch, Severity::Error, nd.node_id,
                       "alpha must be < 1 for a node with out-edges"});

    if (opt.allow_override) continue;

    switch (role) {
      case Role::PurePrincipal:
        if (nd.alpha.has_value() && *nd.alpha != 0.0)
          diags.push_back({DiagCode::RoleAlphaMismatch, Severity::Error,
                           nd.node_id, "pure principal requires alpha = 0"});
        if (!(nd.r > 0.0))
          diags.push_back({DiagCode::RoleAlphaMismatch, Severity::Error,
                           nd.node_id, "pure principal requires r in (0, 1)"});
        break;
      case Role::Intermediary:
        if (nd.alpha.has_value() && !(*nd.alpha > 0.0 && *nd.alpha < 1.0))
          diags.push_back({DiagCode::RoleAlphaMismatch, Severity::Error,
                           nd.node_id, "intermediary requires alpha in (0, 1)"});
        if (!nd.alpha.has_value())
          diags.push_back({DiagCode::RoleAlphaMismatch, Severity::Error,
                           nd.node_id, "intermediary requires an explicit alpha"});
        if (!(nd.r > 0.0))
          diags.push_back({DiagCode::RoleAlphaMismatch, Severity::Error,
                           nd.node_id, "intermediary requires r in (0, 1)"});
        break;
      case Role::PureObligee:
        if (nd.alpha.has_value() && *nd.alpha != 1.0)
          diags.push_back({DiagCode::RoleAlphaMismatch, Severity::Error,
                           nd.node_id, "pure obligee requires alpha = 1"});
        if (nd.r != 0.0)
          diags.push_back({DiagCode::RoleAlphaMismatch, Severity::Error,
                           nd.node_id, "pure obligee requires r = 0"});
        if (nd.beta != 0.0)
          diags.push_back({DiagCode::RoleAlphaMismatch, Severity::Error,
                           nd.node_id, "pure obligee requires beta = 0"});
        break;
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate_records(const NetworkData& data,
                                         const ValidationOptions& options) {
  std::vector<Diagnostic> diags;
  Staged st;
  stage(data, options, diags, st);
  return diags;
}

ContractorNetwork build_network(const NetworkData& data,
                                const ValidationOptions& options) {
  std::vector<Diagnostic> diags;
  Staged st;
  stage(data, options, diags, st);

  bool fatal = std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Severity::Error;
  });
  if (fatal) throw ValidationError(std::move(diags));

  ContractorNetwork net;
  const int n = static_cast<int>(data.nodes.size());
  net.ids_.reserve(static_cast<size_t>(n));
  for (const auto& nd : data.nodes) net.ids_.push_back(nd.node_id);
  net.index_ = std::move(st.index);
  net.r_.resize(static_cast<size_t>(n));
  net.alpha_.resize(static_cast<size_t>(n));
  net.beta_.resize(static_cast<size_t>(n));
  net.revenue_.resize(static_cast<size_t>(n));
  net.segment_.resize(static_cast<size_t>(n));
  net.roles_.resize(static_cast<size_t>(n));
  net.out_degree_.resize(static_cast<size_t>(n));

  for (int i = 0; i < n; ++i) {
    const auto& nd = data.nodes[static_cast<size_t>(i)];
    auto idx = static_cast<size_t>(i);
    bool has_in = st.in_deg[idx] > 0;
    bool has_out = st.out_deg[idx] > 0;
    Role role = !has_in ? Role::PurePrincipal
                        : (!has_out ? Role::PureObligee : Role::Intermediary);
    net.roles_[idx] = role;
    net.r_[idx] = nd.r;
    net.beta_[idx] = nd.beta;
    net.revenue_[idx] = nd.revenue.value_or(kNaN);
    net.segment_[idx] = nd.segment_type;
    net.out_degree_[idx] = st.out_deg[idx];
    if (nd.alpha.has_value()) {
      net.alpha_[idx] = *nd.alpha;
    } else {
      net.alpha_[idx] = role == Role::PurePrincipal ? 0.0
                        : role == Role::PureObligee ? 1.0
                                                    : kNaN;
      // validation already rejected alpha-less intermediaries
    }
  }

  // CSR by obligee, principals ascending within a row.
  std::sort(st.edges.begin(), st.edges.end(), [](const auto& a, const auto& b) {
    return a.obligee != b.obligee ? a.obligee < b.obligee
                                  : a.principal < b.principal;
  });
  net.in_offsets_.assign(static_cast<size_t>(n) + 1, 0);
  for (const auto& e : st.edges)
    net.in_offsets_[static_cast<size_t>(e.obligee) + 1]++;
  for (size_t i = 1; i < net.in_offsets_.size(); ++i)
    net.in_offsets_[i] += net.in_offsets_[i - 1];
  net.in_edges_.reserve(st.edges.size());
  for (const auto& e : st.edges)
    net.in_edges_.push_back({e.principal, e.weight, e.bond});

  for (auto& d : diags)
    if (d.severity == Severity::Warning) net.warnings_.push_back(d);
  return net;
}

std::vector<Role> classify_roles(const ContractorNetwork& net) {
  std::vector<Role> roles(static_cast<size_t>(net.n()));
  for (int i = 0; i < net.n(); ++i) {
    bool has_in = net.in_degree(i) > 0;
    bool has_out = net.out_degree(i) > 0;
    roles[static_cast<size_t>(i)] =
        !has_in ? Role::PurePrincipal
                : (!has_out ? Role::PureObligee : Role::Intermediary);
  }
  return roles;
}

double operator_norm_aw_squared(const ContractorNetwork& net) {
  // row i of AW has entries alpha_i * w_ij; row sums of (AW)^2 are
  // sum_k (AW)_ik * rowsum_k(AW) because all entries are nonnegative.
  const int n = net.n();
  std::vector<double> rowsum(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto& e : net.in_edges(i)) s += e.weight;
    rowsum[static_cast<size_t>(i)] = net.alpha(i) * s;
  }
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto& e : net.in_edges(i))
      s += e.weight * rowsum[static_cast<size_t>(e.principal)];
    best = std::max(best, net.alpha(i) * s);
  }
  return best;
}

double operator_norm_aw_power(const ContractorNetwork& net, int t) {
  if (t < 0) throw_error(ErrorCode::InvalidArgument, "power must be >= 0");
  const int n = net.n();
  std::vector<double> v(static_cast<size_t>(n), 1.0), next(static_cast<size_t>(n));
  for (int s = 0; s < t; ++s) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& e : net.in_edges(i))
        acc += e.weight * v[static_cast<size_t>(e.principal)];
      next[static_cast<size_t>(i)] = net.alpha(i) * acc;
    }
    std::swap(v, next);
  }
  double best = 0.0;
  for (double x : v) best = std::max(best, x);
  return best;
}

LayerDecomposition layer_decomposition(const ContractorNetwork& net) {
  const int n = net.n();
  LayerDecomposition out;

  // Kahn toposort on principal -> obligee direction for DAG detection.
  {
    std::vector<int> indeg(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) indeg[static_cast<size_t>(i)] = net.in_degree(i);
    // out-adjacency once
    std::vector<std::vector<int>> out_adj(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      for (const auto& e : net.in_edges(i))
        out_adj[static_cast<size_t>(e.principal)].push_back(i);
    std::queue<int> q;
    for (int i = 0; i < n; ++i)
      if (indeg[static_cast<size_t>(i)] == 0) q.push(i);
    int seen = 0;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      ++seen;
      for (int w : out_adj[static_cast<size_t>(v)])
        if (--indeg[static_cast<size_t>(w)] == 0) q.push(w);
    }
    out.is_dag = seen == n;
  }

  // Layer recursion: layer 1 = union of in-neighborhoods of all nodes;
  // layer k+1 = union of in-neighborhoods of layer-k nodes.
  std::vector<char> in_layer(static_cast<size_t>(n), 0);
  std::vector<std::int32_t> current;
  for (int i = 0; i < n; ++i)
    for (const auto& e : net.in_edges(i))
      if (!in_layer[static_cast<size_t>(e.principal)]) {
        in_layer[static_cast<size_t>(e.principal)] = 1;
        current.push_back(e.principal);
      }
  std::sort(current.begin(), current.end());
  while (!current.empty()) {
    out.layers.push_back(current);
    std::vector<char> next_in(static_cast<size_t>(n), 0);
    std::vector<std::int32_t> next;
    for (std::int32_t i : current)
      for (const auto& e : net.in_edges(i))
        if (!next_in[static_cast<size_t>(e.principal)]) {
          next_in[static_cast<size_t>(e.principal)] = 1;
          next.push_back(e.principal);
        }
    std::sort(next.begin(), next.end());
    if (next == current) break;  // cyclic core reached a fixed set
    current = std::move(next);
  }
  if (out.is_dag) out.depth = static_cast<int>(out.layers.size());
  return out;
}

AssumptionCheck check_assumption_monotone(const ContractorNetwork& net) {
  AssumptionCheck chk;
  chk.satisfied = true;
  chk.reversed = true;
  double delta = std::numeric_limits<double>::infinity();
  for (int i = 0; i < net.n(); ++i) {
    if (net.role(i) != Role::Intermediary) continue;
    double wr = 0.0;
    for (const auto& e : net.in_edges(i)) wr += e.weight * net.r(e.principal);
    double margin = wr - net.r(i);
    chk.intermediaries.push_back(i);
    chk.margins.push_back(margin);
    if (margin < 0.0) chk.satisfied = false;
    if (margin > 0.0) chk.reversed = false;
    if (net.r(i) > 0.0) delta = std::min(delta, margin / net.r(i));
  }
  if (chk.intermediaries.empty()) delta = 0.0;
  if (chk.satisfied && std::isfinite(delta)) chk.delta = std::max(delta, 0.0);
  return chk;
}

std::vector<int> node_depths(const ContractorNetwork& net) {
  auto ld = layer_decomposition(net);
  if (!ld.is_dag)
    throw_error(ErrorCode::NotADag, "node depths require an acyclic network");
  const int n = net.n();
  std::vector<int> depth(static_cast<size_t>(n), 0);
  // Longest-path DP in topological order (Kahn).
  std::vector<int> indeg(static_cast<size_t>(n));
  std::vector<std::vector<int>> out_adj(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    indeg[static_cast<size_t>(i)] = net.in_degree(i);
    for (const auto& e : net.in_edges(i))
      out_adj[static_cast<size_t>(e.principal)].push_back(i);
  }
  std::queue<int> q;
  for (int i = 0; i < n; ++i)
    if (indeg[static_cast<size_t>(i)] == 0) q.push(i);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : out_adj[static_cast<size_t>(v)]) {
      depth[static_cast<size_t>(w)] =
          std::max(depth[static_cast<size_t>(w)], depth[static_cast<size_t>(v)] + 1);
      if (--indeg[static_cast<size_t>(w)] == 0) q.push(w);
    }
  }
  return depth;
}

ContractorNetwork with_intermediary_alpha(const ContractorNetwork& net,
                                          double alpha) {
  if (!(alpha >= 0.0) || !(alpha <= 1.0))
    throw_error(ErrorCode::InvalidArgument,
                "intermediary alpha override must lie in [0, 1]");
  ContractorNetwork copy = net;
  for (int i = 0; i < copy.n(); ++i)
    if (copy.roles_[static_cast<size_t>(i)] == Role::Intermediary)
      copy.alpha_[static_cast<size_t>(i)] = alpha;
  return copy;
}

NetworkData to_records(const ContractorNetwork& net) {
  NetworkData data;
  data.nodes.reserve(static_cast<size_t>(net.n()));
  for (int i = 0; i < net.n(); ++i) {
    NodeRecord nd;
    nd.node_id = net.id(i);
    nd.r = net.r(i);
    nd.alpha = net.alpha(i);
    nd.beta = net.beta(i);
    nd.revenue = net.revenue(i);
    nd.segment_type = net.segment_type(i);
    data.nodes.push_back(std::move(nd));
  }
  for (int i = 0; i < net.n(); ++i)
    for (const auto& e : net.in_edges(i)) {
      EdgeRecord ed;
      ed.obligee_id = net.id(i);
      ed.principal_id = net.id(e.principal);
      // exactly-one rule on ingestion: a bond-derived weight round-trips
      // through the bond (revenue is preserved, so it re-derives bit-equal)
      if (!std::isnan(e.bond_amount))
        ed.bond_amount = e.bond_amount;
      else
        ed.weight = e.weight;
      data.edges.push_back(std::move(ed));
    }
  return data;
}

}  // namespace netrisk
