// End-to-end gate: each numbered criterion prints exactly one
// [PASS]/[FAIL] line with the measured values, and the process exits
// nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "physue/io.hpp"
#include "physue/network.hpp"
#include "physue/oracle.hpp"
#include "physue/physarum.hpp"
#include "physue/probit.hpp"
#include "physue/solvers.hpp"

using namespace physue;

namespace {

const std::string kGridPath = std::string(PHYSUE_DATA_DIR) + "/sheffi12.net.csv";
const std::string kDemands1Path = std::string(PHYSUE_DATA_DIR) + "/example1.od.csv";
const std::string kDemands2Path = std::string(PHYSUE_DATA_DIR) + "/example2.od.csv";

struct Reference {
  int from;
  int to;
  double msa;
  double phys;
};

// Expected five-seed mean link flows for the bundled examples, one column
// per solver. Directions not listed are expected to stay idle (flow 0).
const std::vector<Reference> kExample1Reference = {
    {1, 2, 10.3639, 10.2070}, {1, 5, 9.6361, 9.5445},  {2, 6, 4.4459, 4.4894},
    {2, 3, 5.9180, 5.7079},   {3, 7, 2.7803, 2.5665},  {3, 4, 3.1377, 3.1324},
    {4, 8, 3.1377, 3.1328},   {5, 6, 4.9213, 4.7524},  {5, 9, 4.7148, 4.7896},
    {6, 7, 5.6918, 5.4874},   {6, 10, 3.6754, 3.7607}, {7, 8, 7.6230, 7.5404},
    {7, 11, 0.8492, 0.5210},  {8, 12, 10.7607, 10.6752}, {9, 10, 4.7148, 4.7948},
    {10, 11, 8.3902, 8.5612}, {11, 12, 9.2393, 9.0669},
};

const std::vector<Reference> kExample2Reference = {
    {1, 2, 10.3988, 10.1945}, {1, 5, 9.6058, 9.4830},  {2, 6, 3.6292, 3.5431},
    {2, 3, 6.7686, 6.6450},   {3, 7, 2.2849, 2.1953},  {3, 4, 4.4803, 4.4454},
    {4, 8, 4.4803, 4.4424},   {5, 6, 5.1153, 4.7598},  {5, 9, 4.4905, 4.7273},
    {6, 7, 6.4263, 6.3017},   {6, 10, 2.3182, 1.9937}, {7, 8, 8.7109, 8.4797},
    {7, 11, 0.0000, 0.0325},  {8, 12, 3.2044, 3.0647}, {9, 10, 4.4905, 4.7273},
    {10, 11, 6.8088, 6.7691}, {11, 12, 6.8088, 6.7691},
};

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void criterion(const std::string& name, const std::function<void(const std::string&)>& body) {
  try {
    body(name);
  } catch (const std::exception& e) {
    report(false, name, std::string("exception: ") + e.what());
  }
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct SeedSweep {
  std::vector<double> mean_flows;
  double max_elapsed = 0.0;
  double mean_outer = 0.0;
  std::vector<FlowSolution> solutions;
};

SeedSweep sweep(const Network& net, const DemandSet& ds, SolverKind kind, int inner) {
  SeedSweep s;
  s.mean_flows.assign(net.link_count(), 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SolverConfig cfg;
    cfg.kind = kind;
    cfg.inner_iterations = inner;
    cfg.seed = seed;
    FlowSolution sol = solve_sue(net, ds, cfg);
    for (int a = 0; a < net.link_count(); ++a) s.mean_flows[a] += sol.link_flows[a] / 5.0;
    s.max_elapsed = std::max(s.max_elapsed, sol.elapsed_seconds);
    s.mean_outer += sol.outer_iterations / 5.0;
    s.solutions.push_back(std::move(sol));
  }
  return s;
}

struct TableDev {
  double max_dev = 0.0;
  int from = 0, to = 0;
  double max_idle = 0.0;  // largest mean flow on a direction expected idle
};

TableDev table_deviation(const Network& net, const std::vector<double>& flows,
                         const std::vector<Reference>& ref, bool msa_column) {
  std::map<std::pair<int, int>, double> targets;
  for (const Reference& r : ref) targets[{r.from, r.to}] = msa_column ? r.msa : r.phys;

  TableDev dev;
  for (int a = 0; a < net.link_count(); ++a) {
    const Link& link = net.link(a);
    const auto it = targets.find({link.from, link.to});
    const double target = it == targets.end() ? 0.0 : it->second;
    const double d = std::abs(flows[a] - target);
    if (d > dev.max_dev) {
      dev.max_dev = d;
      dev.from = link.from;
      dev.to = link.to;
    }
    if (it == targets.end()) dev.max_idle = std::max(dev.max_idle, flows[a]);
  }
  return dev;
}

std::vector<double> demand_imbalance(const Network& net, std::span<const double> flows,
                                     const DemandSet& ds) {
  std::vector<double> balance(net.node_count(), 0.0);
  for (const OdDemand& d : ds.demands) {
    balance[d.origin - 1] -= d.rate;
    balance[d.destination - 1] += d.rate;
  }
  for (int a = 0; a < net.link_count(); ++a) {
    balance[net.link(a).from - 1] += flows[a];
    balance[net.link(a).to - 1] -= flows[a];
  }
  return balance;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Network two_route_net() {
  return Network::from_links({{1, 2, 18.0, 0.0}, {1, 3, 10.0, 0.0}, {3, 2, 10.0, 0.0}});
}

std::string strip_elapsed_column(const std::string& trace) {
  std::istringstream in(trace);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t first = line.find(',');
    std::size_t second = line.find(',', first + 1);
    std::size_t third = line.find(',', second + 1);
    out << line.substr(0, second) << line.substr(third) << '\n';
  }
  return out.str();
}

}  // namespace

int main() {
  const Network net = parse_network_file(kGridPath);
  const DemandSet ds1 = parse_demands_file(kDemands1Path);
  const DemandSet ds2 = parse_demands_file(kDemands2Path);

  std::optional<SeedSweep> msa1, phys1, msa2, phys2;
  try {
    msa1 = sweep(net, ds1, SolverKind::msa, 1);
    phys1 = sweep(net, ds1, SolverKind::physarum, 1);
    msa2 = sweep(net, ds2, SolverKind::msa, 10);
    phys2 = sweep(net, ds2, SolverKind::physarum, 10);
  } catch (const std::exception& e) {
    std::printf("solver sweeps failed: %s\n", e.what());
  }

  criterion("C1 single-destination reference flows", [&](const std::string& name) {
    if (!msa1 || !phys1) {
      report(false, name, "solver sweep did not complete");
      return;
    }
    const TableDev dm = table_deviation(net, msa1->mean_flows, kExample1Reference, true);
    const TableDev dp = table_deviation(net, phys1->mean_flows, kExample1Reference, false);
    const double idle = std::max(dm.max_idle, dp.max_idle);
    const double elapsed = std::max(msa1->max_elapsed, phys1->max_elapsed);
    const bool ok = dm.max_dev <= 0.5 && dp.max_dev <= 0.5 && idle <= 0.05 && elapsed < 60.0;
    report(ok, name,
           "5-seed mean dev: msa " + fmt(dm.max_dev) + " at (" + std::to_string(dm.from) +
               "," + std::to_string(dm.to) + "), adaptation " + fmt(dp.max_dev) + " at (" +
               std::to_string(dp.from) + "," + std::to_string(dp.to) +
               ") [tol 0.5]; idle-direction max " + fmt(idle) +
               " [tol 0.05]; slowest run " + fmt(elapsed, 2) + " s [limit 60]");
  });

  criterion("C2 two-destination reference flows", [&](const std::string& name) {
    if (!msa2 || !phys2) {
      report(false, name, "solver sweep did not complete");
      return;
    }
    const TableDev dm = table_deviation(net, msa2->mean_flows, kExample2Reference, true);
    const TableDev dp = table_deviation(net, phys2->mean_flows, kExample2Reference, false);
    const double elapsed = std::max(msa2->max_elapsed, phys2->max_elapsed);
    const bool ok = dm.max_dev <= 0.6 && dp.max_dev <= 0.6 && elapsed < 60.0;
    report(ok, name,
           "5-seed mean dev: msa " + fmt(dm.max_dev) + " at (" + std::to_string(dm.from) +
               "," + std::to_string(dm.to) + "), adaptation " + fmt(dp.max_dev) + " at (" +
               std::to_string(dp.from) + "," + std::to_string(dp.to) +
               ") [tol 0.6]; slowest run " + fmt(elapsed, 2) + " s [limit 60]");
  });

  criterion("C3 solver agreement", [&](const std::string& name) {
    if (!msa1 || !phys1 || !msa2 || !phys2) {
      report(false, name, "solver sweep did not complete");
      return;
    }
    const auto cmp1 = compare_solutions(msa1->mean_flows, phys1->mean_flows);
    const auto cmp2 = compare_solutions(msa2->mean_flows, phys2->mean_flows);
    const bool ok = cmp1.max_diff <= 0.5 && cmp2.max_diff <= 0.6;
    report(ok, name,
           "max |msa - adaptation| on 5-seed means: " + fmt(cmp1.max_diff) +
               " [tol 0.5] and " + fmt(cmp2.max_diff) + " [tol 0.6]");
  });

  criterion("C4 outer-iteration ordering", [&](const std::string& name) {
    if (!msa1 || !phys1 || !msa2 || !phys2) {
      report(false, name, "solver sweep did not complete");
      return;
    }
    const bool ok =
        phys1->mean_outer < msa1->mean_outer && phys2->mean_outer < msa2->mean_outer;
    report(ok, name,
           "mean outers, adaptation vs msa: " + fmt(phys1->mean_outer, 1) + " vs " +
               fmt(msa1->mean_outer, 1) + " and " + fmt(phys2->mean_outer, 1) + " vs " +
               fmt(msa2->mean_outer, 1));
  });

  criterion("C5 shortest-path concentration", [&](const std::string& name) {
    const auto tree = dijkstra(net, free_flow_costs(net), 1);
    const auto path = shortest_path_links(tree, 1, 12);
    double worst_share = 1.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RngStream rng(seed);
      const auto flows = physarum_load(net, free_flow_costs(net), ds1, rng);
      double path_min = std::numeric_limits<double>::infinity();
      for (int li : path) path_min = std::min(path_min, flows[li]);
      worst_share = std::min(worst_share, path_min / ds1.total());
    }
    report(worst_share >= 0.999, name,
           "fixed-length adaptation puts >= " + fmt(worst_share * 100.0, 3) +
               "% of demand on every tree link over 5 seeds [needs 99.9%]");
  });

  criterion("C6 probit share vs closed form", [&](const std::string& name) {
    const Network fixture = two_route_net();
    const auto paths = enumerate_paths(fixture, 1, 2, 3);
    const double closed =
        two_link_choice_probability(18.0, 20.0, 18.0, 20.0, GammaParam{0.3});
    double err4 = 0.0, err6 = 0.0;
    {
      RngStream rng(101);
      const auto probs = probit_path_probabilities_mc(
          paths, free_flow_costs(fixture), free_flow_costs(fixture), GammaParam{0.3},
          10000, rng);
      err4 = std::abs(probs.probability[0] - closed);
    }
    {
      RngStream rng(102);
      const auto probs = probit_path_probabilities_mc(
          paths, free_flow_costs(fixture), free_flow_costs(fixture), GammaParam{0.3},
          1000000, rng);
      err6 = std::abs(probs.probability[0] - closed);
    }
    const bool ok = err4 <= 3.0 / std::sqrt(1e4) && err6 <= 3.0 / std::sqrt(1e6);
    report(ok, name,
           "|mc - closed form|: " + fmt(err4, 5) + " at 1e4 draws [tol 0.03], " +
               fmt(err6, 5) + " at 1e6 draws [tol 0.003]");
  });

  criterion("C7 expected-minimum gradient identity", [&](const std::string& name) {
    struct Fixture {
      const char* label;
      Network net;
    };
    std::vector<Fixture> fixtures;
    fixtures.push_back({"symmetric", Network::from_links({{1, 2, 20.0, 0.0},
                                                          {1, 3, 10.0, 0.0},
                                                          {3, 2, 10.0, 0.0}})});
    fixtures.push_back({"asymmetric", two_route_net()});
    fixtures.push_back({"dominant", Network::from_links({{1, 2, 10.0, 0.0},
                                                         {1, 3, 20.0, 0.0},
                                                         {3, 2, 20.0, 0.0}})});
    double worst = 0.0;
    std::string detail;
    std::uint64_t seed = 201;
    for (const Fixture& f : fixtures) {
      const auto paths = enumerate_paths(f.net, 1, 2, 3);
      RngStream rng(seed++);
      const auto check =
          williams_gradient_check(paths, free_flow_costs(f.net), free_flow_costs(f.net),
                                  GammaParam{0.3}, 0, -1.0, 1000000, rng);
      worst = std::max(worst, check.discrepancy);
      if (!detail.empty()) detail += ", ";
      detail += std::string(f.label) + " " + fmt(check.discrepancy, 5);
    }
    report(worst <= 0.01, name,
           "|dE[min]/dc - P| at 1e6 draws: " + detail + " [tol 0.01]");
  });

  criterion("C8 conservation suite", [&](const std::string& name) {
    // unclipped pair flows must balance the injections at every adaptation
    // step, under freshly sampled lengths each step
    double worst_unclipped = 0.0;
    for (const DemandSet* ds : {&ds1, &ds2}) {
      const auto groups = group_by_origin(*ds);
      RngStream rng(301);
      PressureSolver solver(net);
      for (const OriginGroup& group : groups) {
        PhysarumState state;
        state.conductivity = init_conductivity(net, rng);
        state.lengths = free_flow_costs(net);
        const auto injections = make_injections(net.node_count(), group);
        int ref = group.demands.front().destination;
        for (const OdDemand& d : group.demands) ref = std::min(ref, d.destination);
        double inj_scale = 0.0;
        for (double v : injections) inj_scale = std::max(inj_scale, std::abs(v));
        const double tol = 10.0 * kPressureResidualTol * (1.0 + inj_scale);
        for (int step = 0; step < 300; ++step) {
          const auto draw = sample_perceived_costs(free_flow_costs(net),
                                                   free_flow_costs(net), GammaParam{0.3},
                                                   rng);
          state.lengths = draw.values;
          const auto p = solver.solve(state, injections, ref);
          const auto moved = combined_fluxes(net, state, p);
          std::vector<double> balance(injections.begin(), injections.end());
          for (int a = 0; a < net.link_count(); ++a) {
            balance[net.link(a).from - 1] += moved[a];
            balance[net.link(a).to - 1] -= moved[a];
          }
          worst_unclipped = std::max(worst_unclipped, max_abs(balance) / tol);
          update_conductivity(state, compute_fluxes(net, state, p));
        }
      }
    }

    // clipped flows balance once the fixed-length adaptation has settled
    RngStream rng_load(302);
    const double flux_tol = 1e-6;
    const auto settled = physarum_load(net, free_flow_costs(net), ds1, rng_load, 10000,
                                       flux_tol);
    const double worst_clipped = max_abs(demand_imbalance(net, settled, ds1));

    // every averaged iterate conserves demand up to rounding
    double worst_msa = 0.0;
    SolverConfig cfg;
    cfg.kind = SolverKind::msa;
    cfg.seed = 1;
    cfg.max_outer = 300;
    (void)msa_solve(net, ds1, cfg, [&](const OuterIterationEvent& ev) {
      worst_msa = std::max(
          worst_msa, max_abs(demand_imbalance(net, ev.current_flows, ds1)));
    });

    const bool ok = worst_unclipped <= 1.0 && worst_clipped <= 10.0 * flux_tol &&
                    worst_msa <= 1e-9;
    report(ok, name,
           "unclipped worst imbalance " + fmt(worst_unclipped, 4) +
               "x its 10-residual budget; clipped at settle " + fmt(worst_clipped, 8) +
               " [tol 1e-5]; msa iterates " + fmt(worst_msa, 12) + " [tol 1e-9]");
  });

  criterion("C9 deterministic outputs", [&](const std::string& name) {
    auto run_once = [&](SolverKind kind) {
      SolverConfig cfg;
      cfg.kind = kind;
      cfg.seed = 1;
      if (kind == SolverKind::msa) cfg.max_outer = 300;
      std::ostringstream trace;
      TraceWriter writer(trace);
      const FlowSolution sol = solve_sue(
          net, ds1, cfg, [&](const OuterIterationEvent& ev) { writer.record(ev); });
      std::ostringstream flows;
      write_flows_csv(net, sol.link_flows, flows);
      RunManifest manifest;
      manifest.network_path = kGridPath;
      manifest.demands_path = kDemands1Path;
      manifest.out_path = "flows.csv";
      manifest.trace_path = "trace.csv";
      manifest.config = cfg;
      manifest.tool_version = "0.1.0";
      manifest.rng_id = "mt19937_64+icdf-as241";
      return std::tuple<std::string, std::string, std::string>(
          flows.str(), manifest_to_json(manifest), strip_elapsed_column(trace.str()));
    };
    bool ok = true;
    std::string detail;
    for (SolverKind kind : {SolverKind::physarum, SolverKind::msa}) {
      const auto first = run_once(kind);
      const auto second = run_once(kind);
      const bool same = first == second;
      ok = ok && same;
      if (!detail.empty()) detail += "; ";
      detail += std::string(kind == SolverKind::msa ? "msa" : "adaptation") +
                (same ? " byte-identical" : " DIFFERS") +
                " (flows, manifest, trace minus wall-clock column)";
    }
    report(ok, name, detail);
  });

  criterion("C10 inner-draw variance study", [&](const std::string& name) {
    // fixed 300-outer horizon so the traces are comparable point by point;
    // variance = mean squared deviation of the per-outer flow trace from the
    // run's final value, transient included as the study plots it
    const int link67 = net.link_index(6, 7);
    const int horizon = 300;
    auto study = [&](SolverKind kind, int inner) {
      double spread_sum = 0.0;
      double final_sum = 0.0;
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SolverConfig cfg;
        cfg.kind = kind;
        cfg.inner_iterations = inner;
        cfg.seed = seed;
        cfg.epsilon0 = 1e-12;
        cfg.max_outer = horizon;
        std::vector<double> trace;
        (void)solve_sue(net, ds1, cfg, [&](const OuterIterationEvent& ev) {
          trace.push_back(ev.current_flows[link67]);
        });
        const double last = trace.back();
        double spread = 0.0;
        for (double v : trace) spread += (v - last) * (v - last);
        spread_sum += spread / trace.size() / 5.0;
        final_sum += last / 5.0;
      }
      return std::pair<double, double>(spread_sum, final_sum);
    };
    bool ok = true;
    std::string detail;
    for (SolverKind kind : {SolverKind::physarum, SolverKind::msa}) {
      const auto [spread1, final1] = study(kind, 1);
      const auto [spread10, final10] = study(kind, 10);
      const bool reduced = spread10 < spread1;
      ok = ok && reduced && std::abs(final1 - final10) <= 0.5;
      if (!detail.empty()) detail += "; ";
      detail += std::string(kind == SolverKind::msa ? "msa" : "adaptation") +
                " trace variance on (6,7): " + fmt(spread1, 4) + " -> " + fmt(spread10, 4) +
                (reduced ? " (reduced)" : " (NOT reduced)") + " from 1 to 10 draws, finals " +
                fmt(final1) + " vs " + fmt(final10) + " [gap tol 0.5]";
    }
    report(ok, name, detail);
  });

  if (failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return 1;
}
