#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netrisk/network.hpp"

namespace netrisk {

struct AnonymizationConfig {
  std::uint64_t seed = 0;
  double rescale_r = 1.0;
  double rescale_beta = 1.0;
  double rescale_bond = 1.0;
  double noise_scale_r = 0.0;     // Laplace scale, applied after rescaling
  double noise_scale_beta = 0.0;
  double noise_scale_bond = 0.0;
  int max_retries = 100;          // stub-matching attempts before failing
};

// Degree/depth/role-preserving DAG rewiring with index relabeling,
// Laplace-perturbed attributes and per-obligee re-normalized weights.
// Pure-obligee r/beta stay structurally zero. Throws NotADag /
// StubMatchingFailed.
ContractorNetwork anonymize_rewire(const ContractorNetwork& net,
                                   const AnonymizationConfig& config);

struct ImputedObligee {
  std::string obligee_id;
  std::string dummy_id;
  double dummy_weight = 0.0;  // 1 - sum of observed in-weights
  double dummy_risk = 0.0;    // segment-median mix of observed principals
};

struct ImputationReport {
  std::vector<ImputedObligee> added;
  std::string assumption_note;
};

// Adds one dummy pure principal per weight-deficient obligee so every
// in-weight row sums to one; dummy risk is the weight-proportional mix of
// segment-median risks of the observed principals. Idempotent. Throws
// NoSegmentInformation when a deficient obligee has no observed principal
// with a segment type.
std::pair<ContractorNetwork, ImputationReport> impute_unobserved(
    const ContractorNetwork& net);

enum class AssumptionMode { Satisfy, Violate, Mixed };

struct UniformLaw {
  double lo = 0.0;
  double hi = 1.0;
};

struct GeneratorSpec {
  int n = 100;
  double frac_principal = 0.25;
  double frac_intermediary = 0.01;
  // remaining fraction = pure obligees
  int depth = 7;
  AssumptionMode assumption_mode = AssumptionMode::Mixed;
  UniformLaw r_law = {0.02, 0.30};        // pure-principal risk
  UniformLaw alpha_law = {0.10, 0.60};    // intermediary alpha
  UniformLaw beta_law = {0.1, 10.0};      // principal/intermediary loss weight
  // cap for sampled in-degrees; repair edges that keep intermediaries
  // bonded may exceed it when deep levels are thin
  int max_in_degree = 3;
  double deficit_fraction = 0.0;  // obligees left with sum w < 1 (imputation fodder)
  int segment_count = 5;
};

// Layered DAG with the requested size, role counts (rounded), and exact
// depth. assumption_mode rigs intermediary risks relative to their
// weighted in-neighbor average. Throws InfeasibleSpec when the shape is
// unsatisfiable (e.g. depth needs more intermediaries than requested).
ContractorNetwork generate_random_network(const GeneratorSpec& spec,
                                          std::uint64_t seed);

}  // namespace netrisk
