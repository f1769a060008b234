// netrisk: command-line front end for the contagion toolkit.
//
// Subcommands: validate, meanfield, centrality, simulate, exact, generate,
// impute, report, sweep-alpha. Every run writes manifest.json into the
// output directory; exit codes are 0 (ok), 1 (validation failure),
// 2 (runtime/usage error).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netrisk/cascade.hpp"
#include "netrisk/exactdist.hpp"
#include "netrisk/io.hpp"
#include "netrisk/meanfield.hpp"
#include "netrisk/network.hpp"
#include "netrisk/synthgen.hpp"
#include "netrisk/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace netrisk;

namespace {

// --- manifest plumbing ----------------------------------------------------

std::uint64_t fnv1a64(const void* data, size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::IoFailure, "cannot read " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return hex16(fnv1a64(bytes.data(), bytes.size()));
}

struct RunContext {
  std::string command;
  std::string output_dir = ".";
  std::uint64_t seed = 12345;
  std::string format = "csv";  // emitted-network format
  std::vector<std::string> inputs;
  json resolved;  // resolved configuration, goes into the manifest
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << text;
}

void write_json_file(const RunContext& ctx, const std::string& name, const json& j) {
  write_text(fs::path(ctx.output_dir) / name, j.dump(2) + "\n");
}

void write_manifest(const RunContext& ctx) {
  json digests = json::object();
  for (const auto& path : ctx.inputs) digests[path] = file_digest(path);
  std::string cfg = ctx.resolved.dump();
  json manifest = {
      {"command", ctx.command},
      {"tool_version", kVersion},
      {"seed", ctx.seed},
      {"config_digest", hex16(fnv1a64(cfg.data(), cfg.size()))},
      {"input_digests", digests},
      {"resolved_config", ctx.resolved},
  };
  write_json_file(ctx, "manifest.json", manifest);
}

json diagnostics_json(const std::vector<Diagnostic>& diags) {
  json arr = json::array();
  for (const auto& d : diags)
    arr.push_back({{"code", to_string(d.code)},
                   {"severity", d.severity == Severity::Error ? "error" : "warning"},
                   {"subject", d.subject},
                   {"message", d.message}});
  return arr;
}

// --- input loading ----------------------------------------------------------

struct InputFlags {
  std::string input;  // single JSON file
  std::string nodes;  // CSV pair
  std::string edges;
};

void add_input_flags(CLI::App* cmd, InputFlags& in, bool required) {
  auto* opt = cmd->add_option("--input", in.input, "network as a single JSON file");
  auto* n = cmd->add_option("--nodes", in.nodes, "node table (CSV)");
  auto* e = cmd->add_option("--edges", in.edges, "edge table (CSV)");
  n->needs(e);
  e->needs(n);
  opt->excludes(n);
  if (required) {
    // one of the two forms must be present; checked at load time for a
    // friendlier message
  }
}

ContractorNetwork load_input(const InputFlags& in, RunContext& ctx,
                             const ValidationOptions& opts = {}) {
  if (!in.input.empty()) {
    ctx.inputs.push_back(in.input);
    return load_network_json(in.input, opts);
  }
  if (!in.nodes.empty()) {
    ctx.inputs.push_back(in.nodes);
    ctx.inputs.push_back(in.edges);
    return load_network_csv(in.nodes, in.edges, opts);
  }
  throw_error(ErrorCode::InvalidArgument,
              "provide --input FILE.json or --nodes/--edges CSV paths");
}

void emit_network(const ContractorNetwork& net, const RunContext& ctx) {
  NetworkData data = to_records(net);
  fs::path dir(ctx.output_dir);
  if (ctx.format == "json") {
    write_json_records(data, (dir / "network.json").string());
  } else {
    write_csv_records(data, (dir / "nodes.csv").string(),
                      (dir / "edges.csv").string());
  }
}

// --- CSV emitters -----------------------------------------------------------

void write_meanfield_csv(const RunContext& ctx, const ContractorNetwork& net,
                         const Eigen::VectorXd& m, const CentralityVector& c) {
  std::string out = "node_id,r,m,m_minus_r,u,u_tilde\n";
  for (int i = 0; i < net.n(); ++i) {
    out += net.id(i) + ',' + format_double(net.r(i)) + ',' + format_double(m[i]) +
           ',' + format_double(m[i] - net.r(i)) + ',' + format_double(c.u[i]) +
           ',' + format_double(c.u_tilde[i]) + '\n';
  }
  write_text(fs::path(ctx.output_dir) / "meanfield.csv", out);
}

void write_losses_csv(const RunContext& ctx, const StationaryLossReport& rep) {
  std::string out = "replication,loss_t0,loss_stationary\n";
  for (size_t k = 0; k < rep.t0_by_replication.size(); ++k)
    out += std::to_string(k) + ',' + format_double(rep.t0_by_replication[k]) +
           ',' + format_double(rep.stationary_by_replication[k]) + '\n';
  write_text(fs::path(ctx.output_dir) / "losses.csv", out);
}

void write_quantiles_csv(const RunContext& ctx, const StationaryLossReport& rep) {
  std::string out = "q,t0_point,t0_lo,t0_hi,stat_point,stat_lo,stat_hi\n";
  for (size_t k = 0; k < rep.stationary.quantiles.size(); ++k) {
    const auto& a = rep.t0.quantiles[k];
    const auto& b = rep.stationary.quantiles[k];
    out += format_double(b.q) + ',' + format_double(a.point) + ',' +
           format_double(a.lower) + ',' + format_double(a.upper) + ',' +
           format_double(b.point) + ',' + format_double(b.lower) + ',' +
           format_double(b.upper) + '\n';
  }
  write_text(fs::path(ctx.output_dir) / "quantiles.csv", out);
}

json quantile_table_json(const StationaryLossReport& rep) {
  json rows = json::array();
  for (size_t k = 0; k < rep.stationary.quantiles.size(); ++k) {
    const auto& a = rep.t0.quantiles[k];
    const auto& b = rep.stationary.quantiles[k];
    rows.push_back({{"q", b.q},
                    {"t0", {{"point", a.point}, {"lo", a.lower}, {"hi", a.upper}}},
                    {"stationary",
                     {{"point", b.point}, {"lo", b.lower}, {"hi", b.upper}}}});
  }
  return rows;
}

void write_centrality_csv(const RunContext& ctx, const ContractorNetwork& net,
                          const CentralityVector& c, int top) {
  std::vector<int> order;
  for (int i = 0; i < net.n(); ++i)
    if (net.role(i) != Role::PureObligee) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (c.u[a] != c.u[b]) return c.u[a] > c.u[b];
    return c.u_tilde[a] > c.u_tilde[b];
  });
  if (top > 0 && static_cast<int>(order.size()) > top) order.resize(static_cast<size_t>(top));
  std::string out = "rank,node_id,role,u,u_tilde\n";
  for (size_t k = 0; k < order.size(); ++k) {
    int i = order[k];
    out += std::to_string(k + 1) + ',' + net.id(i) + ',' + to_string(net.role(i)) +
           ',' + format_double(c.u[i]) + ',' + format_double(c.u_tilde[i]) + '\n';
  }
  write_text(fs::path(ctx.output_dir) / "centrality_top.csv", out);
}

json assumption_json(const AssumptionCheck& check) {
  return {{"satisfied", check.satisfied},
          {"reversed", check.reversed},
          {"delta", check.delta ? json(*check.delta) : json(nullptr)},
          {"intermediaries", check.intermediaries.size()}};
}

const char* branch_name(MixingBranch b) {
  return b == MixingBranch::DagDepth ? "dag_depth" : "norm_bound";
}

// --- subcommand bodies ------------------------------------------------------

int run_validate(const InputFlags& in, RunContext& ctx) {
  ContractorNetwork net = load_input(in, ctx);
  json diag = diagnostics_json(net.warnings());
  write_json_file(ctx, "diagnostics.json", diag);
  auto layers = layer_decomposition(net);
  json summary = {
      {"nodes", net.n()},
      {"edges", net.edge_count()},
      {"is_dag", layers.is_dag},
      {"depth", layers.depth ? json(*layers.depth) : json(nullptr)},
      {"norm_aw_squared", operator_norm_aw_squared(net)},
      {"warnings", net.warnings().size()},
  };
  write_json_file(ctx, "summary.json", summary);
  write_manifest(ctx);
  std::printf("ok: %d nodes, %d edges, %zu warning(s)\n", net.n(),
              net.edge_count(), net.warnings().size());
  return 0;
}

int run_meanfield(const InputFlags& in, RunContext& ctx, const std::string& method,
                  double tolerance) {
  ContractorNetwork net = load_input(in, ctx);
  SolverConfig cfg;
  cfg.tolerance = tolerance;
  cfg.method = method == "direct"    ? SolveMethod::DirectSolve
               : method == "neumann" ? SolveMethod::NeumannIteration
                                     : SolveMethod::Auto;
  MeanFieldSolution sol = solve_fixed_point(net, cfg);
  CentralityVector cent = centrality(net, cfg);
  write_meanfield_csv(ctx, net, sol.m, cent);
  double el_net = expected_loss(net, sol.m);
  Eigen::VectorXd r(net.n());
  for (int i = 0; i < net.n(); ++i) r[i] = net.r(i);
  json summary = {
      {"method", sol.method_used == SolveMethod::DirectSolve ? "direct" : "neumann"},
      {"residual", sol.residual},
      {"iterations", sol.iterations},
      {"expected_loss_network", el_net},
      {"expected_loss_independent", expected_loss(net, r)},
  };
  write_json_file(ctx, "summary.json", summary);
  write_manifest(ctx);
  return 0;
}

int run_centrality(const InputFlags& in, RunContext& ctx, int top) {
  ContractorNetwork net = load_input(in, ctx);
  CentralityVector cent = centrality(net);
  write_centrality_csv(ctx, net, cent, top);
  write_manifest(ctx);
  return 0;
}

SimulationConfig make_sim_config(const RunContext& ctx, int reps, double epsilon,
                                 const std::string& horizon,
                                 const std::vector<double>& quantiles,
                                 double confidence, int threads) {
  SimulationConfig cfg;
  cfg.replications = reps;
  cfg.epsilon = epsilon;
  cfg.seed = ctx.seed;
  cfg.confidence = confidence;
  cfg.threads = threads;
  if (!quantiles.empty()) cfg.quantiles = quantiles;
  if (horizon != "auto") cfg.horizon = std::stoi(horizon);
  return cfg;
}

int run_simulate(const InputFlags& in, RunContext& ctx, const SimulationConfig& cfg,
                 std::optional<double> alpha_override, const std::string& snapshots_dir,
                 double alpha_bar, bool dominance) {
  if (!snapshots_dir.empty()) {
    TimeVaryingNetwork tv = load_time_varying(snapshots_dir, alpha_bar);
    int n = tv.snapshots.front().n();
    StateVector x0(static_cast<size_t>(n), 0), y0(static_cast<size_t>(n), 1);
    TimeVaryingReport rep = simulate_time_varying(tv, x0, y0, cfg);
    std::string out = "t,mismatch_fraction,tv_bound\n";
    for (size_t t = 0; t < rep.mismatch_fraction.size(); ++t)
      out += std::to_string(t) + ',' + format_double(rep.mismatch_fraction[t]) +
             ',' + format_double(rep.tv_bound[t]) + '\n';
    write_text(fs::path(ctx.output_dir) / "timevarying.csv", out);
    json summary = {{"mode", "time_varying"},
                    {"snapshots", tv.snapshots.size()},
                    {"alpha_bar", tv.alpha_bar},
                    {"horizon", rep.horizon}};
    write_json_file(ctx, "summary.json", summary);
    write_manifest(ctx);
    return 0;
  }

  ContractorNetwork net = load_input(in, ctx);
  if (alpha_override) net = with_intermediary_alpha(net, *alpha_override);
  StationaryLossReport rep = sample_stationary_losses(net, cfg);
  write_losses_csv(ctx, rep);
  write_quantiles_csv(ctx, rep);
  json summary = {
      {"mode", "stationary"},
      {"replications", cfg.replications},
      {"horizon", rep.certificate.horizon},
      {"mixing_branch", branch_name(rep.certificate.branch)},
      {"norm_aw_squared", rep.certificate.norm_aw_squared},
      {"mean_loss_t0", rep.t0.mean},
      {"mean_loss_stationary", rep.stationary.mean},
  };
  if (dominance) {
    DominanceReport dom = coupled_dominance_test(net, cfg);
    std::string out = "t,epsilon,survival\n";
    for (size_t t = 0; t < dom.survival.size(); ++t)
      for (size_t k = 0; k < dom.thresholds.size(); ++k)
        out += std::to_string(t) + ',' + format_double(dom.thresholds[k]) + ',' +
               format_double(dom.survival[t][k]) + '\n';
    write_text(fs::path(ctx.output_dir) / "dominance.csv", out);
    summary["dominance"] = {{"pathwise_monotone", dom.pathwise_monotone},
                            {"violations", dom.violations},
                            {"exploratory", dom.exploratory}};
  }
  write_json_file(ctx, "summary.json", summary);
  write_manifest(ctx);
  return 0;
}

int run_exact(const InputFlags& in, RunContext& ctx, bool independent) {
  ContractorNetwork net = load_input(in, ctx);
  auto layers = layer_decomposition(net);
  JointDistribution law;
  std::string method;
  if (layers.is_dag) {
    law = dag_stationary(net);
    method = "layered";
  } else {
    law = brute_force_stationary(net).law;
    method = "dense";
  }
  std::string out = "state_bits,probability\n";
  for (size_t s = 0; s < law.p.size(); ++s)
    out += std::to_string(s) + ',' + format_double(law.p[s]) + '\n';
  write_text(fs::path(ctx.output_dir) / "joint.csv", out);

  Eigen::VectorXd pi = marginals(law);
  json summary = {{"nodes", law.n},
                  {"method", method},
                  {"expected_loss", [&] {
                     double el = 0.0;
                     for (int i = 0; i < net.n(); ++i) el += net.beta(i) * pi[i];
                     return el;
                   }()}};
  if (independent) {
    JointDistribution indep = product_law(pi);
    std::string io2 = "state_bits,probability\n";
    for (size_t s = 0; s < indep.p.size(); ++s)
      io2 += std::to_string(s) + ',' + format_double(indep.p[s]) + '\n';
    write_text(fs::path(ctx.output_dir) / "joint_independent.csv", io2);
    summary["tv_to_independent"] = tv_distance(law, indep);
  }
  write_json_file(ctx, "summary.json", summary);
  write_manifest(ctx);
  return 0;
}

int run_generate(const InputFlags& in, RunContext& ctx, const GeneratorSpec& spec,
                 const AnonymizationConfig& anon, bool have_input) {
  ContractorNetwork net =
      have_input ? anonymize_rewire(load_input(in, ctx), anon)
                 : generate_random_network(spec, ctx.seed);
  emit_network(net, ctx);
  json summary = {{"mode", have_input ? "anonymize" : "synthetic"},
                  {"nodes", net.n()},
                  {"edges", net.edge_count()}};
  write_json_file(ctx, "summary.json", summary);
  write_manifest(ctx);
  return 0;
}

int run_impute(const InputFlags& in, RunContext& ctx) {
  ContractorNetwork net = load_input(in, ctx);
  auto [imputed, report] = impute_unobserved(net);
  emit_network(imputed, ctx);
  json added = json::array();
  for (const auto& e : report.added)
    added.push_back({{"obligee_id", e.obligee_id},
                     {"dummy_id", e.dummy_id},
                     {"weight", e.dummy_weight},
                     {"r", e.dummy_risk}});
  json summary = {{"added", added}, {"assumption_note", report.assumption_note}};
  write_json_file(ctx, "imputation.json", summary);
  write_manifest(ctx);
  std::printf("imputed %zu unobserved principal(s)\n", report.added.size());
  return 0;
}

int run_report(const InputFlags& in, RunContext& ctx, const SimulationConfig& cfg,
               int top, bool impute_first) {
  ContractorNetwork net = load_input(in, ctx);
  if (impute_first) net = impute_unobserved(net).first;
  write_json_file(ctx, "diagnostics.json", diagnostics_json(net.warnings()));

  MeanFieldSolution sol = solve_fixed_point(net);
  CentralityVector cent = centrality(net);
  write_meanfield_csv(ctx, net, sol.m, cent);
  write_centrality_csv(ctx, net, cent, top);

  StationaryLossReport rep = sample_stationary_losses(net, cfg);
  write_losses_csv(ctx, rep);
  write_quantiles_csv(ctx, rep);

  Eigen::VectorXd r(net.n());
  for (int i = 0; i < net.n(); ++i) r[i] = net.r(i);
  double el_ind = expected_loss(net, r);
  double el_net = expected_loss(net, sol.m);
  json uplift;
  json uplift_reason;
  if (el_ind > 0.0) {
    uplift = 100.0 * (el_net - el_ind) / el_ind;
    uplift_reason = nullptr;
  } else {
    uplift = nullptr;
    uplift_reason = "independent expected loss is zero";
  }
  json summary = {
      {"expected_loss_independent", el_ind},
      {"expected_loss_network", el_net},
      {"uplift_pct", uplift},
      {"uplift_undefined_reason", uplift_reason},
      {"quantiles", quantile_table_json(rep)},
      {"assumption", assumption_json(check_assumption_monotone(net))},
      {"horizon", rep.certificate.horizon},
      {"mixing_branch", branch_name(rep.certificate.branch)},
  };
  write_json_file(ctx, "summary.json", summary);
  write_manifest(ctx);
  return 0;
}

int run_sweep_alpha(const InputFlags& in, RunContext& ctx, const SimulationConfig& cfg,
                    int points) {
  if (points < 2)
    throw_error(ErrorCode::InvalidArgument, "--points must be >= 2");
  ContractorNetwork net = load_input(in, ctx);
  std::string out = "alpha,expected_loss,q,point,lo,hi\n";
  std::vector<std::vector<double>> points_by_q(cfg.quantiles.size());
  std::vector<double> alphas;
  for (int k = 0; k < points; ++k) {
    double alpha = static_cast<double>(k) / (points - 1);
    alphas.push_back(alpha);
    ContractorNetwork swept = with_intermediary_alpha(net, alpha);
    MeanFieldSolution sol = solve_fixed_point(swept);
    // common random numbers across alphas: same seed per sweep point
    StationaryLossReport rep = sample_stationary_losses(swept, cfg);
    double el = expected_loss(swept, sol.m);
    for (size_t qi = 0; qi < rep.stationary.quantiles.size(); ++qi) {
      const auto& qv = rep.stationary.quantiles[qi];
      out += format_double(alpha) + ',' + format_double(el) + ',' +
             format_double(qv.q) + ',' + format_double(qv.point) + ',' +
             format_double(qv.lower) + ',' + format_double(qv.upper) + '\n';
      points_by_q[qi].push_back(qv.point);
    }
  }
  write_text(fs::path(ctx.output_dir) / "sweep_alpha.csv", out);
  json trend = json::array();
  for (size_t qi = 0; qi < cfg.quantiles.size(); ++qi) {
    bool monotone = true;
    for (size_t k = 1; k < points_by_q[qi].size(); ++k)
      if (points_by_q[qi][k] < points_by_q[qi][k - 1]) monotone = false;
    trend.push_back({{"q", cfg.quantiles[qi]}, {"monotone_nondecreasing", monotone}});
  }
  json summary = {{"alphas", alphas}, {"trend", trend}};
  write_json_file(ctx, "summary.json", summary);
  write_manifest(ctx);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surety-network contagion toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  RunContext ctx;
  for (int i = 0; i < argc; ++i) {
    if (i) ctx.command += ' ';
    ctx.command += argv[i];
  }

  // shared state filled by whichever subcommand parses
  InputFlags in;
  std::string method = "auto";
  double tolerance = 1e-12;
  int top = 10;
  int reps = 10000;
  double epsilon = 0.01;
  std::string horizon = "auto";
  std::vector<double> quantiles;
  double confidence = 0.95;
  int threads = 0;
  std::optional<double> alpha_override;
  std::string snapshots_dir;
  double alpha_bar = 0.5;
  bool dominance = false;
  bool independent = false;
  bool impute_first = false;
  int points = 10;
  GeneratorSpec spec;
  AnonymizationConfig anon;

  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    cmd->add_option("--output-dir", ctx.output_dir, "directory for artifacts");
    cmd->add_option("--seed", ctx.seed, "root RNG seed");
    cmd->add_option("--format", ctx.format, "emitted-network format")
        ->check(CLI::IsMember({"csv", "json"}));
    add_input_flags(cmd, in, needs_input);
  };
  auto add_sim_flags = [&](CLI::App* cmd) {
    cmd->add_option("--reps", reps, "Monte Carlo replications");
    cmd->add_option("--epsilon", epsilon, "TV target for the auto horizon");
    cmd->add_option("--horizon", horizon, "auto or a fixed step count");
    cmd->add_option("--quantiles", quantiles, "quantile levels")->delimiter(',');
    cmd->add_option("--confidence", confidence, "CI confidence level");
    cmd->add_option("--threads", threads, "worker threads (0 = auto)");
  };

  auto* c_validate = app.add_subcommand("validate", "check a network file set");
  add_common(c_validate, true);

  auto* c_meanfield = app.add_subcommand("meanfield", "solve the fixed point");
  add_common(c_meanfield, true);
  c_meanfield->add_option("--method", method, "direct|neumann|auto")
      ->check(CLI::IsMember({"direct", "neumann", "auto"}));
  c_meanfield->add_option("--tolerance", tolerance, "solver tolerance");

  auto* c_centrality = app.add_subcommand("centrality", "rank systemic importance");
  add_common(c_centrality, true);
  c_centrality->add_option("--top", top, "rows to keep");

  auto* c_simulate = app.add_subcommand("simulate", "Monte Carlo loss distribution");
  add_common(c_simulate, true);
  add_sim_flags(c_simulate);
  c_simulate->add_option("--alpha-override", alpha_override,
                         "set every intermediary alpha");
  c_simulate->add_option("--snapshots-dir", snapshots_dir,
                         "time-varying mode: directory with nodes.csv + edges_t<k>.csv");
  c_simulate->add_option("--alpha-bar", alpha_bar, "alpha cap for time-varying mode");
  c_simulate->add_flag("--dominance", dominance, "also run the coupled dominance test");

  auto* c_exact = app.add_subcommand("exact", "exact stationary joint law");
  add_common(c_exact, true);
  c_exact->add_flag("--independent", independent,
                    "also emit the independent-marginals law");

  auto* c_generate = app.add_subcommand("generate",
                                        "synthesize a network, or rewire --input");
  add_common(c_generate, false);
  c_generate->add_option("--n", spec.n, "node count");
  c_generate->add_option("--frac-principal", spec.frac_principal, "pure-principal share");
  c_generate->add_option("--frac-intermediary", spec.frac_intermediary,
                         "intermediary share");
  c_generate->add_option("--depth", spec.depth, "exact DAG depth");
  std::string mode_name = "satisfy";
  c_generate->add_option("--assumption-mode", mode_name, "satisfy|violate|mixed")
      ->check(CLI::IsMember({"satisfy", "violate", "mixed"}));
  c_generate->add_option("--max-in-degree", spec.max_in_degree, "in-degree cap");
  c_generate->add_option("--deficit-fraction", spec.deficit_fraction,
                         "share of obligees with sub-stochastic rows");
  c_generate->add_option("--segments", spec.segment_count, "segment label count");
  c_generate->add_option("--noise-scale-r", anon.noise_scale_r, "Laplace scale for r");
  c_generate->add_option("--noise-scale-beta", anon.noise_scale_beta,
                         "Laplace scale for beta");
  c_generate->add_option("--noise-scale-bond", anon.noise_scale_bond,
                         "Laplace scale for bond amounts");
  c_generate->add_option("--rescale-r", anon.rescale_r, "multiplier for r");
  c_generate->add_option("--rescale-beta", anon.rescale_beta, "multiplier for beta");
  c_generate->add_option("--rescale-bond", anon.rescale_bond,
                         "multiplier for bond amounts");

  auto* c_impute = app.add_subcommand("impute", "add unobserved-exposure principals");
  add_common(c_impute, true);

  auto* c_report = app.add_subcommand("report", "full analysis bundle");
  add_common(c_report, true);
  add_sim_flags(c_report);
  c_report->add_option("--top", top, "centrality rows to keep");
  c_report->add_flag("--impute", impute_first, "impute before analysis");

  auto* c_sweep = app.add_subcommand("sweep-alpha", "quantiles under an alpha sweep");
  add_common(c_sweep, true);
  add_sim_flags(c_sweep);
  c_sweep->add_option("--points", points, "sweep points over [0,1]");

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(ctx.output_dir);
    json& rc = ctx.resolved;
    rc["seed"] = ctx.seed;
    rc["format"] = ctx.format;

    if (app.got_subcommand(c_validate)) return run_validate(in, ctx);
    if (app.got_subcommand(c_meanfield)) {
      rc["method"] = method;
      rc["tolerance"] = tolerance;
      return run_meanfield(in, ctx, method, tolerance);
    }
    if (app.got_subcommand(c_centrality)) {
      rc["top"] = top;
      return run_centrality(in, ctx, top);
    }
    SimulationConfig cfg =
        make_sim_config(ctx, reps, epsilon, horizon, quantiles, confidence, threads);
    if (app.got_subcommand(c_simulate) || app.got_subcommand(c_report) ||
        app.got_subcommand(c_sweep)) {
      rc["reps"] = reps;
      rc["epsilon"] = epsilon;
      rc["horizon"] = horizon;
      rc["quantiles"] = cfg.quantiles;
      rc["confidence"] = confidence;
    }
    if (app.got_subcommand(c_simulate)) {
      if (alpha_override) rc["alpha_override"] = *alpha_override;
      if (!snapshots_dir.empty()) {
        rc["snapshots_dir"] = snapshots_dir;
        rc["alpha_bar"] = alpha_bar;
      }
      return run_simulate(in, ctx, cfg, alpha_override, snapshots_dir, alpha_bar,
                          dominance);
    }
    if (app.got_subcommand(c_exact)) return run_exact(in, ctx, independent);
    if (app.got_subcommand(c_generate)) {
      spec.assumption_mode = mode_name == "violate" ? AssumptionMode::Violate
                             : mode_name == "mixed" ? AssumptionMode::Mixed
                                                    : AssumptionMode::Satisfy;
      anon.seed = ctx.seed;
      bool have_input = !in.input.empty() || !in.nodes.empty();
      rc["mode"] = have_input ? "anonymize" : "synthetic";
      if (!have_input) {
        rc["n"] = spec.n;
        rc["depth"] = spec.depth;
        rc["assumption_mode"] = mode_name;
      }
      return run_generate(in, ctx, spec, anon, have_input);
    }
    if (app.got_subcommand(c_impute)) return run_impute(in, ctx);
    if (app.got_subcommand(c_report)) {
      rc["top"] = top;
      rc["impute"] = impute_first;
      return run_report(in, ctx, cfg, top, impute_first);
    }
    if (app.got_subcommand(c_sweep)) {
      rc["points"] = points;
      return run_sweep_alpha(in, ctx, cfg, points);
    }
    return 2;
  } catch (const ValidationError& ve) {
    try {
      fs::create_directories(ctx.output_dir);
      write_json_file(ctx, "diagnostics.json", diagnostics_json(ve.diagnostics()));
    } catch (...) {
    }
    for (const auto& d : ve.diagnostics())
      std::fprintf(stderr, "%s: [%s] %s: %s\n",
                   d.severity == Severity::Error ? "error" : "warning",
                   to_string(d.code), d.subject.c_str(), d.message.c_str());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
