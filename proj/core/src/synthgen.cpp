#include "netrisk/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "netrisk/rng.hpp"
#include "netrisk/stats.hpp"

namespace netrisk {

namespace {

double uniform_in(UniformStream& rng, const UniformLaw& law) {
  return law.lo + (law.hi - law.lo) * rng.next();
}

std::uint64_t pick(UniformStream& rng, std::uint64_t count) {
  return rng.next_u64() % count;
}

double laplace(UniformStream& rng, double scale) {
  if (scale <= 0.0) return 0.0;
  double u = rng.next() - 0.5;
  double tail = std::max(1.0 - 2.0 * std::abs(u), 1e-300);
  return (u >= 0.0 ? -scale : scale) * std::log(tail);
}

template <typename T>
void shuffle(UniformStream& rng, std::vector<T>& v) {
  for (size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[static_cast<size_t>(pick(rng, i))]);
}

std::string padded_id(const char* prefix, int k, int width) {
  std::string digits = std::to_string(k);
  std::string out(prefix);
  if (static_cast<int>(digits.size()) < width)
    out.append(static_cast<size_t>(width) - digits.size(), '0');
  return out + digits;
}

}  // namespace

ContractorNetwork generate_random_network(const GeneratorSpec& spec,
                                          std::uint64_t seed) {
  const int n = spec.n;
  if (n <= 0) throw_error(ErrorCode::InfeasibleSpec, "n must be positive");
  int n_pp = static_cast<int>(std::lround(spec.frac_principal * n));
  int n_int = static_cast<int>(std::lround(spec.frac_intermediary * n));
  if (n_pp + n_int > n)
    throw_error(ErrorCode::InfeasibleSpec, "role fractions exceed one");
  int n_po = n - n_pp - n_int;
  const int d = spec.depth;

  if (d < 0) throw_error(ErrorCode::InfeasibleSpec, "depth must be >= 0");
  if (spec.max_in_degree < 1)
    throw_error(ErrorCode::InfeasibleSpec, "max_in_degree must be >= 1");
  if (spec.segment_count < 1)
    throw_error(ErrorCode::InfeasibleSpec, "segment_count must be >= 1");
  if (d == 0) {
    if (n_int > 0 || n_po > 0)
      throw_error(ErrorCode::InfeasibleSpec,
                  "depth 0 admits only pure principals");
  } else {
    if (n_pp < 1 || n_po < 1)
      throw_error(ErrorCode::InfeasibleSpec,
                  "depth >= 1 needs at least one principal and one obligee");
    if (n_int < d - 1)
      throw_error(ErrorCode::InfeasibleSpec,
                  "depth " + std::to_string(d) + " needs at least " +
                      std::to_string(d - 1) + " intermediaries");
    if (n_int > 0 && d < 2)
      throw_error(ErrorCode::InfeasibleSpec,
                  "intermediaries need depth >= 2");
  }

  UniformStream rng(seed, 0);
  const int width = n >= 100000 ? 7 : 6;

  NetworkData data;
  data.nodes.resize(static_cast<size_t>(n));
  // index layout: [0, n_pp) principals, [n_pp, n_pp+n_int) intermediaries,
  // rest pure obligees
  std::vector<int> level(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    auto& nd = data.nodes[static_cast<size_t>(i)];
    nd.node_id = padded_id("N", i, width);
  }
  for (int k = 0; k < n_int; ++k) {
    int node = n_pp + k;
    // first d-1 intermediaries form a spine pinning the depth
    level[static_cast<size_t>(node)] =
        k < d - 1 ? k + 1 : 1 + static_cast<int>(pick(rng, static_cast<std::uint64_t>(d - 1)));
  }

  struct Pending {
    int node;
    std::vector<int> parents;
    std::vector<double> weights;
  };
  std::vector<Pending> rows;

  // parent pool cycling over all principals so everyone gets bonded work
  // when the slot budget allows it
  std::vector<int> principal_queue;
  auto refill_queue = [&] {
    principal_queue.resize(static_cast<size_t>(n_pp + n_int));
    std::iota(principal_queue.begin(), principal_queue.end(), 0);
    shuffle(rng, principal_queue);
  };
  refill_queue();
  size_t queue_pos = 0;
  auto next_principal = [&]() {
    if (queue_pos >= principal_queue.size()) {
      refill_queue();
      queue_pos = 0;
    }
    return principal_queue[queue_pos++];
  };

  // intermediaries, by level so risks can be rigged in one forward pass
  std::vector<int> inter_order;
  for (int k = 0; k < n_int; ++k) inter_order.push_back(n_pp + k);
  std::stable_sort(inter_order.begin(), inter_order.end(),
                   [&](int a, int b) { return level[static_cast<size_t>(a)] < level[static_cast<size_t>(b)]; });

  for (size_t oi = 0; oi < inter_order.size(); ++oi) {
    int node = inter_order[oi];
    int lv = level[static_cast<size_t>(node)];
    Pending row;
    row.node = node;
    std::set<int> chosen;
    // spine link keeps the longest path exact
    bool on_spine = node - n_pp < d - 1;
    if (on_spine) {
      int prev = node == n_pp ? static_cast<int>(pick(rng, static_cast<std::uint64_t>(n_pp)))
                              : node - 1;
      chosen.insert(prev);
    }
    int extra = 1 + static_cast<int>(pick(rng, static_cast<std::uint64_t>(spec.max_in_degree)));
    for (int tries = 0; static_cast<int>(chosen.size()) < extra && tries < 8 * extra; ++tries) {
      // strictly lower level keeps the graph layered
      int cand = next_principal();
      int cl = cand < n_pp ? 0 : level[static_cast<size_t>(cand)];
      if (cl < lv && cand != node) chosen.insert(cand);
    }
    if (chosen.empty()) {
      chosen.insert(static_cast<int>(pick(rng, static_cast<std::uint64_t>(n_pp))));
    }
    row.parents.assign(chosen.begin(), chosen.end());
    rows.push_back(std::move(row));
  }

  // pure obligees pull from the cycling pool
  for (int node = n_pp + n_int; node < n; ++node) {
    Pending row;
    row.node = node;
    std::set<int> chosen;
    int want = 1 + static_cast<int>(pick(rng, static_cast<std::uint64_t>(spec.max_in_degree)));
    for (int tries = 0; static_cast<int>(chosen.size()) < want && tries < 8 * want; ++tries)
      chosen.insert(next_principal());
    row.parents.assign(chosen.begin(), chosen.end());
    rows.push_back(std::move(row));
  }
  // obligee 0 closes the spine; replace a slot when the row is at the cap
  if (d >= 1) {
    int spine_end = d >= 2 ? n_pp + d - 2 : static_cast<int>(pick(rng, static_cast<std::uint64_t>(n_pp)));
    for (auto& row : rows)
      if (row.node == n_pp + n_int &&
          std::find(row.parents.begin(), row.parents.end(), spine_end) ==
              row.parents.end()) {
        if (static_cast<int>(row.parents.size()) < spec.max_in_degree)
          row.parents.push_back(spine_end);
        else
          row.parents[static_cast<size_t>(
              pick(rng, static_cast<std::uint64_t>(row.parents.size())))] = spine_end;
      }
  }

  // the queue cycling leaves tail intermediaries undrawed now and then;
  // without an out-edge their derived role flips to obligee, so park them
  // on a strictly deeper row (append under the cap, else displace a pure
  // principal or a multiply-used supplier)
  if (n_int > 0) {
    std::vector<int> out_count(static_cast<size_t>(n_pp + n_int), 0);
    for (const auto& row : rows)
      for (int p : row.parents) out_count[static_cast<size_t>(p)]++;
    const size_t first_obligee_row = rows.size() - static_cast<size_t>(n_po);
    for (int p = n_pp; p < n_pp + n_int; ++p) {
      if (out_count[static_cast<size_t>(p)] > 0) continue;
      auto admissible = [&](size_t ri) {
        const Pending& row = rows[ri];
        if (ri < first_obligee_row &&
            level[static_cast<size_t>(row.node)] <= level[static_cast<size_t>(p)])
          return false;
        return std::find(row.parents.begin(), row.parents.end(), p) ==
               row.parents.end();
      };
      bool placed = false;
      for (size_t ri = 0; ri < rows.size() && !placed; ++ri) {
        if (!admissible(ri)) continue;
        if (static_cast<int>(rows[ri].parents.size()) < spec.max_in_degree) {
          rows[ri].parents.push_back(p);
          placed = true;
        }
      }
      for (size_t ri = 0; ri < rows.size() && !placed; ++ri) {
        if (!admissible(ri)) continue;
        for (auto& slot : rows[ri].parents) {
          if (slot >= n_pp && out_count[static_cast<size_t>(slot)] < 2) continue;
          out_count[static_cast<size_t>(slot)]--;
          slot = p;
          placed = true;
          break;
        }
      }
      if (!placed) {
        // shapes with thin deep levels leave no capped slot; stretching an
        // obligee row past the cap beats mislabeling the node
        size_t best = first_obligee_row;
        for (size_t ri = first_obligee_row; ri < rows.size(); ++ri)
          if (admissible(ri) &&
              rows[ri].parents.size() < rows[best].parents.size())
            best = ri;
        rows[best].parents.push_back(p);
      }
      out_count[static_cast<size_t>(p)]++;
    }
  }

  // weights: normalized positive draws; a slice of obligees keeps a deficit
  for (auto& row : rows) {
    row.weights.resize(row.parents.size());
    double sum = 0.0;
    for (auto& w : row.weights) {
      w = 0.3 + 0.7 * rng.next();
      sum += w;
    }
    for (auto& w : row.weights) w /= sum;
    bool is_obligee = row.node >= n_pp + n_int;
    if (is_obligee && spec.deficit_fraction > 0.0 &&
        rng.next() < spec.deficit_fraction) {
      double keep = 0.55 + 0.35 * rng.next();
      for (auto& w : row.weights) w *= keep;
    }
  }

  // attributes
  for (int i = 0; i < n_pp; ++i) {
    auto& nd = data.nodes[static_cast<size_t>(i)];
    nd.r = uniform_in(rng, spec.r_law);
    nd.beta = uniform_in(rng, spec.beta_law);
    nd.segment_type =
        "S" + std::to_string(1 + pick(rng, static_cast<std::uint64_t>(spec.segment_count)));
  }
  // risks for intermediaries need their in-rows; index them
  std::unordered_map<int, const Pending*> row_of;
  for (const auto& row : rows) row_of[row.node] = &row;
  for (int node : inter_order) {
    auto& nd = data.nodes[static_cast<size_t>(node)];
    const Pending& row = *row_of[node];
    double wr = 0.0;
    for (size_t k = 0; k < row.parents.size(); ++k)
      wr += row.weights[k] * data.nodes[static_cast<size_t>(row.parents[k])].r;
    switch (spec.assumption_mode) {
      case AssumptionMode::Satisfy:
        nd.r = std::max(1e-6, wr * (0.5 + 0.35 * rng.next()));
        break;
      case AssumptionMode::Violate:
        nd.r = std::min(0.95, wr * (1.15 + 0.35 * rng.next()) + 1e-4);
        break;
      case AssumptionMode::Mixed:
        nd.r = uniform_in(rng, spec.r_law);
        break;
    }
    nd.alpha = std::clamp(uniform_in(rng, spec.alpha_law), 1e-6, 1.0 - 1e-6);
    nd.beta = uniform_in(rng, spec.beta_law);
    nd.segment_type =
        "S" + std::to_string(1 + pick(rng, static_cast<std::uint64_t>(spec.segment_count)));
  }
  // pure obligees keep structural zeros

  for (const auto& row : rows)
    for (size_t k = 0; k < row.parents.size(); ++k) {
      EdgeRecord ed;
      ed.obligee_id = data.nodes[static_cast<size_t>(row.node)].node_id;
      ed.principal_id = data.nodes[static_cast<size_t>(row.parents[k])].node_id;
      ed.weight = row.weights[k];
      data.edges.push_back(std::move(ed));
    }

  return build_network(data);
}

// --- rewiring -----------------------------------------------------------

ContractorNetwork anonymize_rewire(const ContractorNetwork& net,
                                   const AnonymizationConfig& config) {
  const int n = net.n();
  std::vector<int> depth = node_depths(net);  // throws NotADag when cyclic
  int max_depth = 0;
  for (int dv : depth) max_depth = std::max(max_depth, dv);

  std::vector<int> in_deg(static_cast<size_t>(n)), out_deg(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    in_deg[static_cast<size_t>(i)] = net.in_degree(i);
    out_deg[static_cast<size_t>(i)] = net.out_degree(i);
  }

  UniformStream rng(config.seed, 1);

  std::vector<std::vector<int>> by_depth(static_cast<size_t>(max_depth) + 1);
  for (int i = 0; i < n; ++i)
    by_depth[static_cast<size_t>(depth[static_cast<size_t>(i)])].push_back(i);

  // stub matching: every node keeps its depth (one in-edge from depth-1),
  // remaining out-stubs go to strictly deeper open in-stubs
  std::vector<std::pair<int, int>> edges;  // (obligee, principal)
  bool matched = false;
  for (int attempt = 0; attempt < config.max_retries && !matched; ++attempt) {
    edges.clear();
    std::vector<int> avail_out = out_deg;
    std::vector<int> need_in = in_deg;
    std::set<std::pair<int, int>> used;
    bool ok = true;

    // depth anchors
    std::vector<int> anchored;
    for (int i = 0; i < n; ++i)
      if (in_deg[static_cast<size_t>(i)] > 0) anchored.push_back(i);
    shuffle(rng, anchored);
    for (int i : anchored) {
      auto& pool = by_depth[static_cast<size_t>(depth[static_cast<size_t>(i)]) - 1];
      int total = 0;
      for (int p : pool) total += avail_out[static_cast<size_t>(p)];
      if (total == 0) {
        ok = false;
        break;
      }
      int slot = static_cast<int>(pick(rng, static_cast<std::uint64_t>(total)));
      int chosen = -1;
      for (int p : pool) {
        slot -= avail_out[static_cast<size_t>(p)];
        if (slot < 0) {
          chosen = p;
          break;
        }
      }
      avail_out[static_cast<size_t>(chosen)]--;
      need_in[static_cast<size_t>(i)]--;
      used.emplace(i, chosen);
      edges.emplace_back(i, chosen);
    }
    if (!ok) continue;

    // leftover out-stubs, deepest suppliers first: they have the fewest
    // admissible targets, shallow stubs can mop up whatever remains
    std::vector<int> stubs;
    for (int p = 0; p < n; ++p)
      stubs.insert(stubs.end(), static_cast<size_t>(avail_out[static_cast<size_t>(p)]), p);
    shuffle(rng, stubs);
    std::stable_sort(stubs.begin(), stubs.end(), [&](int a, int b) {
      return depth[static_cast<size_t>(a)] > depth[static_cast<size_t>(b)];
    });
    for (int p : stubs) {
      int total = 0;
      for (int dd = depth[static_cast<size_t>(p)] + 1; dd <= max_depth; ++dd)
        for (int i : by_depth[static_cast<size_t>(dd)])
          if (need_in[static_cast<size_t>(i)] > 0 && !used.count({i, p}))
            total += need_in[static_cast<size_t>(i)];
      if (total == 0) {
        ok = false;
        break;
      }
      int slot = static_cast<int>(pick(rng, static_cast<std::uint64_t>(total)));
      int chosen = -1;
      for (int dd = depth[static_cast<size_t>(p)] + 1; dd <= max_depth && chosen < 0; ++dd)
        for (int i : by_depth[static_cast<size_t>(dd)]) {
          if (need_in[static_cast<size_t>(i)] == 0 || used.count({i, p})) continue;
          slot -= need_in[static_cast<size_t>(i)];
          if (slot < 0) {
            chosen = i;
            break;
          }
        }
      need_in[static_cast<size_t>(chosen)]--;
      used.emplace(chosen, p);
      edges.emplace_back(chosen, p);
    }
    if (!ok) continue;
    matched = true;
  }
  if (!matched)
    throw_error(ErrorCode::StubMatchingFailed,
                "no depth-compatible rewiring found in " +
                    std::to_string(config.max_retries) + " attempts");

  // index relabeling via a random permutation
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(rng, perm);  // perm[new_index] = original index
  std::vector<int> new_of(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) new_of[static_cast<size_t>(perm[static_cast<size_t>(k)])] = k;

  const int width = n >= 100000 ? 7 : 6;
  NetworkData out;
  out.nodes.resize(static_cast<size_t>(n));
  bool perturb_r = config.noise_scale_r > 0.0 || config.rescale_r != 1.0;
  bool perturb_b = config.noise_scale_beta > 0.0 || config.rescale_beta != 1.0;
  for (int k = 0; k < n; ++k) {
    int orig = perm[static_cast<size_t>(k)];
    auto& nd = out.nodes[static_cast<size_t>(k)];
    nd.node_id = padded_id("C", k, width);
    nd.segment_type = net.segment_type(orig);
    if (net.role(orig) == Role::PureObligee) {
      nd.r = 0.0;
      nd.beta = 0.0;
      continue;  // structural zeros carry no information
    }
    nd.r = net.r(orig);
    if (perturb_r)
      nd.r = std::clamp(nd.r * config.rescale_r + laplace(rng, config.noise_scale_r),
                        1e-6, 1.0 - 1e-6);
    nd.beta = net.beta(orig);
    if (perturb_b)
      nd.beta = std::max(0.0, nd.beta * config.rescale_beta +
                                  laplace(rng, config.noise_scale_beta));
    if (net.role(orig) == Role::Intermediary) nd.alpha = net.alpha(orig);
  }

  // per-obligee bond amounts: perturbed, shuffled onto the new in-edges,
  // then normalized to a stochastic row
  std::vector<std::vector<int>> new_in(static_cast<size_t>(n));
  for (const auto& [obligee, principal] : edges)
    new_in[static_cast<size_t>(obligee)].push_back(principal);

  for (int i = 0; i < n; ++i) {
    auto& parents = new_in[static_cast<size_t>(i)];
    if (parents.empty()) continue;
    std::sort(parents.begin(), parents.end());
    std::vector<double> amounts;
    for (const auto& e : net.in_edges(i))
      amounts.push_back(std::isnan(e.bond_amount) ? e.weight : e.bond_amount);
    for (auto& a : amounts) {
      a = a * config.rescale_bond + laplace(rng, config.noise_scale_bond);
      a = std::max(a, 1e-9);
    }
    shuffle(rng, amounts);
    double sum = std::accumulate(amounts.begin(), amounts.end(), 0.0);
    for (size_t k = 0; k < parents.size(); ++k) {
      EdgeRecord ed;
      ed.obligee_id = out.nodes[static_cast<size_t>(new_of[static_cast<size_t>(i)])].node_id;
      ed.principal_id =
          out.nodes[static_cast<size_t>(new_of[static_cast<size_t>(parents[k])])].node_id;
      ed.weight = amounts[k] / sum;
      out.edges.push_back(std::move(ed));
    }
  }

  return build_network(out);
}

// --- imputation ---------------------------------------------------------

std::pair<ContractorNetwork, ImputationReport> impute_unobserved(
    const ContractorNetwork& net) {
  constexpr double kTol = 1e-9;

  // segment medians over every node carrying the label
  std::unordered_map<std::string, std::vector<double>> by_segment;
  for (int i = 0; i < net.n(); ++i)
    if (!net.segment_type(i).empty())
      by_segment[net.segment_type(i)].push_back(net.r(i));
  std::unordered_map<std::string, double> seg_median;
  for (auto& [seg, rs] : by_segment) seg_median[seg] = median(rs);

  NetworkData data = to_records(net);
  ImputationReport report;
  report.assumption_note =
      "unobserved exposure is modeled as one independent pure principal per "
      "obligee with segment-median risk; cross-obligee dependence of the "
      "unobserved book is ignored";

  for (int i = 0; i < net.n(); ++i) {
    if (net.in_degree(i) == 0) continue;
    double wsum = net.in_weight_sum(i);
    if (wsum >= 1.0 - kTol) continue;

    double labeled_w = 0.0;
    double mix = 0.0;
    for (const auto& e : net.in_edges(i)) {
      const std::string& seg = net.segment_type(e.principal);
      auto it = seg_median.find(seg);
      if (seg.empty() || it == seg_median.end()) continue;
      labeled_w += e.weight;
      mix += e.weight * it->second;
    }
    if (labeled_w <= 0.0)
      throw_error(ErrorCode::NoSegmentInformation,
                  "no observed principal of " + net.id(i) +
                      " carries a segment type");

    ImputedObligee entry;
    entry.obligee_id = net.id(i);
    entry.dummy_id = "unobs:" + net.id(i);
    entry.dummy_weight = 1.0 - wsum;
    entry.dummy_risk = std::clamp(mix / labeled_w, 1e-6, 1.0 - 1e-6);

    NodeRecord nd;
    nd.node_id = entry.dummy_id;
    nd.r = entry.dummy_risk;
    nd.beta = 0.0;
    nd.segment_type = "imputed";
    data.nodes.push_back(std::move(nd));

    EdgeRecord ed;
    ed.obligee_id = entry.obligee_id;
    ed.principal_id = entry.dummy_id;
    ed.weight = entry.dummy_weight;
    data.edges.push_back(std::move(ed));

    report.added.push_back(std::move(entry));
  }

  return {build_network(data), std::move(report)};
}

}  // namespace netrisk
