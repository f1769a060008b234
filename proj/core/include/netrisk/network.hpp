#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "netrisk/errors.hpp"

namespace netrisk {

enum class Role { PurePrincipal, Intermediary, PureObligee };

const char* to_string(Role role);

// Raw node row as ingested. alpha/revenue/segment_type are optional in the
// input; alpha is resolved against the structural role when the network is
// built.
struct NodeRecord {
  std::string node_id;
  double r = 0.0;
  std::optional<double> alpha;
  double beta = 0.0;
  std::optional<double> revenue;
  std::string segment_type;  // empty = absent
};

// Directed edge principal -> obligee, stored as (obligee, principal) to
// match the row-per-exposure input convention. Exactly one of weight /
// bond_amount must be supplied; a missing weight is derived as
// bond_amount / revenue(obligee).
struct EdgeRecord {
  std::string obligee_id;
  std::string principal_id;
  std::optional<double> weight;
  std::optional<double> bond_amount;
};

struct NetworkData {
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
};

struct ValidationOptions {
  bool allow_override = false;     // keep user-supplied alpha / r that conflict with role
  bool require_stochastic = false; // obligee in-weights must sum to exactly one
  double weight_tolerance = 1e-9;
};

struct AssumptionCheck {
  bool satisfied = false;        // margin_i >= 0 for every intermediary
  bool reversed = false;         // margin_i <= 0 for every intermediary
  std::optional<double> delta;   // largest d with margin_i >= d * r_i (when satisfied)
  std::vector<double> margins;   // per intermediary: sum_j w_ij r_j - r_i
  std::vector<std::int32_t> intermediaries;
};

struct LayerDecomposition {
  // layers[k-1] = nodes reachable as in-neighbors at recursion depth k,
  // i.e. the k-th in-neighbor layer. Nested decreasing; empty layers are
  // never stored.
  std::vector<std::vector<std::int32_t>> layers;
  bool is_dag = false;
  std::optional<int> depth;  // longest directed path length; set only for DAGs
};

// Immutable contractor network: nodes with (r, alpha, beta) attributes and
// a weighted in-adjacency (rows of W). Construct via build_network or the
// io.hpp loaders; construction validates and throws ValidationError.
class ContractorNetwork {
 public:
  struct InEdge {
    std::int32_t principal;
    double weight;
    double bond_amount;  // NaN when not supplied
  };

  int n() const { return static_cast<int>(ids_.size()); }
  int edge_count() const { return static_cast<int>(in_edges_.size()); }

  const std::string& id(int i) const { return ids_[static_cast<size_t>(i)]; }
  std::optional<int> index_of(const std::string& id) const;

  Role role(int i) const { return roles_[static_cast<size_t>(i)]; }
  double r(int i) const { return r_[static_cast<size_t>(i)]; }
  double alpha(int i) const { return alpha_[static_cast<size_t>(i)]; }
  double beta(int i) const { return beta_[static_cast<size_t>(i)]; }
  std::optional<double> revenue(int i) const;
  const std::string& segment_type(int i) const { return segment_[static_cast<size_t>(i)]; }

  const std::vector<double>& r_vec() const { return r_; }
  const std::vector<double>& alpha_vec() const { return alpha_; }
  const std::vector<double>& beta_vec() const { return beta_; }

  // CSR over in-edges, ordered by obligee then principal index.
  std::span<const InEdge> in_edges(int i) const;
  int in_degree(int i) const;
  int out_degree(int i) const { return out_degree_[static_cast<size_t>(i)]; }
  double in_weight_sum(int i) const;

  // Warnings recorded while building (e.g. sub-stochastic rows).
  const std::vector<Diagnostic>& warnings() const { return warnings_; }

  friend ContractorNetwork build_network(const NetworkData&, const ValidationOptions&);
  friend ContractorNetwork with_intermediary_alpha(const ContractorNetwork&, double);

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<Role> roles_;
  std::vector<double> r_, alpha_, beta_;
  std::vector<double> revenue_;  // NaN = absent
  std::vector<std::string> segment_;
  std::vector<std::int64_t> in_offsets_;  // size n+1
  std::vector<InEdge> in_edges_;
  std::vector<std::int32_t> out_degree_;
  std::vector<Diagnostic> warnings_;
};

// Validates records and assembles the immutable network. Role-coupled
// attribute conflicts (intermediary alpha outside (0,1), principal r
// outside (0,1), obligee with nonzero r/beta) are errors unless
// options.allow_override is set; structural errors and alpha >= 1 on a
// node with out-edges are never overridable.
ContractorNetwork build_network(const NetworkData& data,
                                const ValidationOptions& options = {});

// Validation pass that collects every diagnostic instead of throwing.
std::vector<Diagnostic> validate_records(const NetworkData& data,
                                         const ValidationOptions& options = {});

// Re-derives roles from the adjacency structure (no in-edges -> pure
// principal, no out-edges -> pure obligee, otherwise intermediary;
// isolated nodes are pure principals).
std::vector<Role> classify_roles(const ContractorNetwork& net);

// Exact infinity-norm of (AW)^2. Nonnegativity makes row sums of the
// square computable in one pass over the edges.
double operator_norm_aw_squared(const ContractorNetwork& net);

// Infinity-norm of (AW)^t via t sparse mat-vec passes on the all-ones vector.
double operator_norm_aw_power(const ContractorNetwork& net, int t);

// In-neighbor layer recursion (stops when the layer set stabilizes or
// empties). DAG detection is by topological sort.
LayerDecomposition layer_decomposition(const ContractorNetwork& net);

// Margin check sum_j w_ij r_j - r_i over intermediaries; delta is the
// largest value such that margins >= delta * r_i holds for all of them.
AssumptionCheck check_assumption_monotone(const ContractorNetwork& net);

// Per-node depth within a DAG: 0 for pure principals, else 1 + max over
// in-neighbors. Throws NotADag on cyclic networks.
std::vector<int> node_depths(const ContractorNetwork& net);

// Copy with intermediary alphas replaced by `alpha` (simulation knob used
// by the alpha sweep; roles and every other attribute are unchanged).
ContractorNetwork with_intermediary_alpha(const ContractorNetwork& net, double alpha);

// Round-trip back to record form (weights written explicitly; bond
// amounts preserved where they were supplied).
NetworkData to_records(const ContractorNetwork& net);

}  // namespace netrisk
