// Command-line front end: solve, compare, verify, export-dot.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "physue/io.hpp"
#include "physue/network.hpp"
#include "physue/oracle.hpp"
#include "physue/physarum.hpp"
#include "physue/probit.hpp"
#include "physue/solvers.hpp"
#include "physue/version.hpp"

namespace {

using namespace physue;

struct SolveOptions {
  std::string network_path;
  std::string demands_path;
  std::string out_path;
  std::string trace_path;
  std::string dot_path;
  std::string from_manifest;
  std::string solver = "physarum";
  double gamma = 0.3;
  double epsilon = 0.1;
  int inner = 1;
  int max_outer = 100000;
  std::uint64_t seed = 0;
  bool costs_from_latest_auxiliary = false;
};

struct CompareOptions {
  std::string a_path;
  std::string b_path;
  double tol = 0.0;
};

struct VerifyOptions {
  std::string network_path;
  std::string demands_path;
  std::string flows_path;
  double gamma = 0.3;
  double conservation_tol = 0.5;
  double demand_tol = 1.0;
  double flow_threshold = 0.05;
  // < 0 means auto: 0.9 * total demand. The reloading residual amplifies any
  // flow error by the cost slope 4*beta*x^3, so it separates misrouted
  // patterns from solved ones but cannot be a sharp equilibrium test.
  double loading_tol = -1.0;
  std::size_t loading_draws = 20000;
  std::size_t max_paths = 50000;
  std::uint64_t seed = 0;
};

struct ExportDotOptions {
  std::string network_path;
  std::string flows_path;
  std::string out_path;
};

int fail_input(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return 1;
}

int run_solve(const CLI::App& cmd, SolveOptions& opt) {
  SolverConfig config;
  if (!opt.from_manifest.empty()) {
    const RunManifest base = read_manifest_file(opt.from_manifest);
    if (!cmd.count("--network")) opt.network_path = base.network_path;
    if (!cmd.count("--demands")) opt.demands_path = base.demands_path;
    if (!cmd.count("--out")) opt.out_path = base.out_path;
    if (!cmd.count("--trace")) opt.trace_path = base.trace_path;
    if (!cmd.count("--solver"))
      opt.solver = base.config.kind == SolverKind::physarum ? "physarum" : "msa";
    if (!cmd.count("--gamma")) opt.gamma = base.config.gamma.value;
    if (!cmd.count("--epsilon")) opt.epsilon = base.config.epsilon0;
    if (!cmd.count("--inner")) opt.inner = base.config.inner_iterations;
    if (!cmd.count("--seed")) opt.seed = base.config.seed;
    if (!cmd.count("--max-outer")) opt.max_outer = base.config.max_outer;
    if (!cmd.count("--costs-from-latest-auxiliary"))
      opt.costs_from_latest_auxiliary = base.config.costs_from_latest_auxiliary;
  }
  if (opt.network_path.empty()) return fail_input("missing --network");
  if (opt.demands_path.empty()) return fail_input("missing --demands");
  if (opt.out_path.empty()) return fail_input("missing --out");

  config.gamma.value = opt.gamma;
  config.epsilon0 = opt.epsilon;
  config.inner_iterations = opt.inner;
  config.seed = opt.seed;
  config.max_outer = opt.max_outer;
  config.kind = opt.solver == "msa" ? SolverKind::msa : SolverKind::physarum;
  config.costs_from_latest_auxiliary = opt.costs_from_latest_auxiliary;

  const Network network = parse_network_file(opt.network_path);
  const DemandSet demands = parse_demands_file(opt.demands_path);
  const auto diagnostics = validate(network, demands);
  if (!diagnostics.empty()) {
    for (const Diagnostic& d : diagnostics) std::cerr << "error: " << d.message << "\n";
    return 1;
  }

  std::ofstream trace_stream;
  std::optional<TraceWriter> trace_writer;
  IterationObserver observer;
  if (!opt.trace_path.empty()) {
    trace_stream.open(opt.trace_path, std::ios::binary);
    if (!trace_stream)
      return fail_input("cannot open trace file for writing: " + opt.trace_path);
    trace_writer.emplace(trace_stream);
    observer = [&](const OuterIterationEvent& event) { trace_writer->record(event); };
  }

  const FlowSolution solution = solve_sue(network, demands, config, observer);

  write_flows_csv_file(network, solution.link_flows, opt.out_path);
  RunManifest manifest;
  manifest.network_path = opt.network_path;
  manifest.demands_path = opt.demands_path;
  manifest.out_path = opt.out_path;
  manifest.trace_path = opt.trace_path;
  manifest.config = config;
  manifest.tool_version = kVersion;
  manifest.rng_id = kRngId;
  const std::string manifest_path = opt.out_path + ".manifest.json";
  write_manifest_file(manifest, manifest_path);

  if (!opt.dot_path.empty()) {
    std::ofstream dot_stream(opt.dot_path, std::ios::binary);
    if (!dot_stream) return fail_input("cannot open dot file for writing: " + opt.dot_path);
    export_dot(network, &solution.link_flows, dot_stream);
  }

  std::cout << "solver: " << opt.solver << "\n";
  std::cout << "outer iterations: " << solution.outer_iterations << "\n";
  std::cout << "converged: "
            << (solution.converged ? "yes" : "no (max outer iterations reached)") << "\n";
  std::cout << "final epsilon: " << solution.epsilon_trace.back() << "\n";
  std::cout << "elapsed: " << std::fixed << std::setprecision(3)
            << solution.elapsed_seconds << " s\n"
            << std::defaultfloat << std::setprecision(6);
  std::cout << "truncated draws: " << solution.truncation_count << "\n";
  std::cout << "flows: " << opt.out_path << "\n";
  std::cout << "manifest: " << manifest_path << "\n";
  if (!opt.trace_path.empty()) std::cout << "trace: " << opt.trace_path << "\n";

  return solution.converged ? 0 : 2;
}

int run_compare(const CompareOptions& opt) {
  const FlowsFile a = read_flows_csv_file(opt.a_path);
  const FlowsFile b = read_flows_csv_file(opt.b_path);

  std::map<std::pair<int, int>, double> b_flows;
  for (const FlowRecord& rec : b.records) {
    if (!b_flows.emplace(std::pair{rec.from, rec.to}, rec.flow).second)
      return fail_input("duplicate link in " + opt.b_path);
  }
  std::set<std::pair<int, int>> a_links;
  for (const FlowRecord& rec : a.records) {
    if (!a_links.emplace(rec.from, rec.to).second)
      return fail_input("duplicate link in " + opt.a_path);
  }
  if (a.records.size() != b.records.size())
    return fail_input("mismatched link sets (different row counts)");
  for (const FlowRecord& rec : a.records) {
    if (!b_flows.count({rec.from, rec.to}))
      return fail_input("mismatched link sets: " + std::to_string(rec.from) + "->" +
                        std::to_string(rec.to) + " only in " + opt.a_path);
  }

  double max_diff = 0.0;
  std::pair<int, int> argmax{0, 0};
  std::cout << "from,to,a,b,abs_diff\n" << std::fixed << std::setprecision(4);
  for (const FlowRecord& rec : a.records) {
    const double other = b_flows.at({rec.from, rec.to});
    const double diff = std::abs(rec.flow - other);
    std::cout << rec.from << ',' << rec.to << ',' << rec.flow << ',' << other << ','
              << diff << "\n";
    if (diff > max_diff) {
      max_diff = diff;
      argmax = {rec.from, rec.to};
    }
  }
  std::cout << "max difference: " << max_diff << " at (" << argmax.first << ','
            << argmax.second << ")\n";
  std::cout << "tolerance: " << opt.tol << "\n";
  return max_diff <= opt.tol ? 0 : 3;
}

int run_verify(const VerifyOptions& opt) {
  const Network network = parse_network_file(opt.network_path);
  const DemandSet demands = parse_demands_file(opt.demands_path);
  const auto diagnostics = validate(network, demands);
  if (!diagnostics.empty()) {
    for (const Diagnostic& d : diagnostics) std::cerr << "error: " << d.message << "\n";
    return 1;
  }
  const std::vector<double> flows = align_flows(network, read_flows_csv_file(opt.flows_path));

  bool all_ok = true;
  auto report = [&](bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    all_ok = all_ok && ok;
  };

  // Supply: +rate at origins, -rate at destinations; everywhere else zero.
  std::vector<double> supply(network.node_count() + 1, 0.0);
  std::set<int> od_nodes;
  for (const OdDemand& d : demands.demands) {
    supply[d.origin] += d.rate;
    supply[d.destination] -= d.rate;
    od_nodes.insert(d.origin);
    od_nodes.insert(d.destination);
  }

  auto net_outflow = [&](int node) {
    double out = 0.0;
    for (int li : network.out_links(node)) out += flows[li];
    for (int li : network.in_links(node)) out -= flows[li];
    return out;
  };

  {
    double worst = 0.0;
    int worst_node = 0;
    for (int node = 1; node <= network.node_count(); ++node) {
      if (od_nodes.count(node)) continue;
      const double imbalance = std::abs(net_outflow(node));
      if (imbalance > worst) {
        worst = imbalance;
        worst_node = node;
      }
    }
    std::ostringstream detail;
    detail << std::fixed << std::setprecision(4) << "max |net flow| at non-OD nodes = "
           << worst;
    if (worst_node) detail << " (node " << worst_node << ")";
    detail << ", tol " << opt.conservation_tol;
    report(worst <= opt.conservation_tol, "conservation", detail.str());
  }

  {
    double worst = 0.0;
    int worst_node = 0;
    for (int node : od_nodes) {
      const double gap = std::abs(net_outflow(node) - supply[node]);
      if (gap > worst) {
        worst = gap;
        worst_node = node;
      }
    }
    std::ostringstream detail;
    detail << std::fixed << std::setprecision(4)
           << "max |net outflow - supply| at OD nodes = " << worst;
    if (worst_node) detail << " (node " << worst_node << ")";
    detail << ", tol " << opt.demand_tol;
    report(worst <= opt.demand_tol, "demand satisfaction", detail.str());
  }

  {
    int violations = 0;
    std::pair<int, int> worst_pair{0, 0};
    for (int a = 0; a < network.link_count(); ++a) {
      const int r = network.reverse_link(a);
      if (r < 0 || r < a) continue;
      if (flows[a] > opt.flow_threshold && flows[r] > opt.flow_threshold) {
        ++violations;
        if (!worst_pair.first) worst_pair = {network.link(a).from, network.link(a).to};
      }
    }
    std::ostringstream detail;
    detail << violations << " node pair(s) carry flow above " << opt.flow_threshold
           << " in both directions";
    if (violations) detail << " (first: " << worst_pair.first << "<->" << worst_pair.second << ")";
    report(violations == 0, "reverse-link structure", detail.str());
  }

  if (opt.loading_draws > 0) {
    try {
      const double loading_tol =
          opt.loading_tol >= 0.0 ? opt.loading_tol : 0.9 * demands.total();
      const std::vector<double> costs = link_costs(network, flows);
      const std::vector<double> free_flow = free_flow_costs(network);
      std::vector<double> expected(network.link_count(), 0.0);
      RngStream rng(opt.seed);
      for (const OdDemand& d : demands.demands) {
        const PathSet paths = enumerate_paths(network, d.origin, d.destination,
                                              network.node_count() - 1, opt.max_paths);
        const PathProbabilities probs = probit_path_probabilities_mc(
            paths, costs, free_flow, GammaParam{opt.gamma}, opt.loading_draws, rng);
        for (std::size_t p = 0; p < paths.size(); ++p)
          for (int li : paths.link_seqs[p]) expected[li] += d.rate * probs.probability[p];
      }
      double worst = 0.0;
      std::size_t worst_link = 0;
      for (int a = 0; a < network.link_count(); ++a) {
        const double diff = std::abs(flows[a] - expected[a]);
        if (diff > worst) {
          worst = diff;
          worst_link = static_cast<std::size_t>(a);
        }
      }
      std::ostringstream detail;
      detail << std::fixed << std::setprecision(4)
             << "max |flow - probit loading of t(flow)| = " << worst << " (link "
             << network.link(static_cast<int>(worst_link)).from << "->"
             << network.link(static_cast<int>(worst_link)).to << "), tol "
             << loading_tol;
      report(worst <= loading_tol, "loading agreement", detail.str());
    } catch (const EnumerationError&) {
      std::cout << "[SKIP] loading agreement: network too large for path enumeration\n";
    }
  }

  return all_ok ? 0 : 3;
}

int run_export_dot(const ExportDotOptions& opt) {
  const Network network = parse_network_file(opt.network_path);
  std::optional<std::vector<double>> flows;
  if (!opt.flows_path.empty())
    flows = align_flows(network, read_flows_csv_file(opt.flows_path));

  if (opt.out_path.empty()) {
    export_dot(network, flows ? &*flows : nullptr, std::cout);
    return 0;
  }
  std::ofstream out(opt.out_path, std::ios::binary);
  if (!out) return fail_input("cannot open dot file for writing: " + opt.out_path);
  export_dot(network, flows ? &*flows : nullptr, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probit stochastic user equilibrium solver (flow-adaptation and MSA)"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  SolveOptions solve_opt;
  CLI::App* solve_cmd = app.add_subcommand("solve", "run a solver and write link flows");
  solve_cmd->add_option("--network", solve_opt.network_path, "network CSV (from,to,alpha,beta)");
  solve_cmd->add_option("--demands", solve_opt.demands_path, "demand CSV (origin,destination,demand)");
  solve_cmd->add_option("--solver", solve_opt.solver, "solver kind")
      ->check(CLI::IsMember({"physarum", "msa"}))
      ->capture_default_str();
  solve_cmd->add_option("--gamma", solve_opt.gamma, "perception variance scale")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve_cmd->add_option("--epsilon", solve_opt.epsilon, "outer stopping tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve_cmd->add_option("--inner", solve_opt.inner, "Monte Carlo draws per outer iteration")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve_cmd->add_option("--seed", solve_opt.seed, "RNG seed")->capture_default_str();
  solve_cmd->add_option("--max-outer", solve_opt.max_outer, "outer iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve_cmd->add_option("--out", solve_opt.out_path, "output flows CSV");
  solve_cmd->add_option("--trace", solve_opt.trace_path, "per-iteration trace CSV");
  solve_cmd->add_option("--dot", solve_opt.dot_path, "Graphviz export of the loaded network");
  solve_cmd->add_flag("--costs-from-latest-auxiliary", solve_opt.costs_from_latest_auxiliary,
                      "derive tube lengths from the latest auxiliary flows instead of "
                      "the running average (experimental, flow-adaptation solver only)");
  solve_cmd->add_option("--from-manifest", solve_opt.from_manifest,
                        "re-run a recorded configuration; explicit flags override");

  CompareOptions cmp_opt;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "compare two flows files");
  cmp_cmd->add_option("a", cmp_opt.a_path, "first flows CSV")->required();
  cmp_cmd->add_option("b", cmp_opt.b_path, "second flows CSV")->required();
  cmp_cmd->add_option("--tol", cmp_opt.tol, "max allowed absolute difference")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  VerifyOptions ver_opt;
  CLI::App* ver_cmd = app.add_subcommand("verify", "check a flows file against the model invariants");
  ver_cmd->add_option("--network", ver_opt.network_path, "network CSV")->required();
  ver_cmd->add_option("--demands", ver_opt.demands_path, "demand CSV")->required();
  ver_cmd->add_option("--flows", ver_opt.flows_path, "flows CSV to verify")->required();
  ver_cmd->add_option("--gamma", ver_opt.gamma, "perception variance scale of the producing run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ver_cmd->add_option("--conservation-tol", ver_opt.conservation_tol,
                      "allowed |net flow| at non-OD nodes")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ver_cmd->add_option("--demand-tol", ver_opt.demand_tol,
                      "allowed |net outflow - supply| at OD nodes")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ver_cmd->add_option("--flow-threshold", ver_opt.flow_threshold,
                      "flow below this counts as an unused link")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ver_cmd->add_option("--loading-tol", ver_opt.loading_tol,
                      "allowed |flow - probit loading| per link "
                      "(default: 0.9 * total demand)")
      ->check(CLI::NonNegativeNumber);
  ver_cmd->add_option("--loading-draws", ver_opt.loading_draws,
                      "Monte Carlo draws for the loading check (0 disables)")
      ->capture_default_str();
  ver_cmd->add_option("--seed", ver_opt.seed, "RNG seed for the loading check")
      ->capture_default_str();

  ExportDotOptions dot_opt;
  CLI::App* dot_cmd = app.add_subcommand("export-dot", "emit a Graphviz view of a network");
  dot_cmd->add_option("--network", dot_opt.network_path, "network CSV")->required();
  dot_cmd->add_option("--flows", dot_opt.flows_path, "optional flows CSV overlay");
  dot_cmd->add_option("--out", dot_opt.out_path, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(*solve_cmd, solve_opt);
    if (cmp_cmd->parsed()) return run_compare(cmp_opt);
    if (ver_cmd->parsed()) return run_verify(ver_opt);
    if (dot_cmd->parsed()) return run_export_dot(dot_opt);
  } catch (const std::exception& e) {
    return fail_input(e.what());
  }
  return 1;
}
