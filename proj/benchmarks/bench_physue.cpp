#include <benchmark/benchmark.h>

#include <cstdint>
#include <sstream>
#include <string>

#include "physue/network.hpp"
#include "physue/oracle.hpp"
#include "physue/physarum.hpp"
#include "physue/probit.hpp"
#include "physue/solvers.hpp"

namespace {

using namespace physue;

const std::string kGridPath = std::string(PHYSUE_DATA_DIR) + "/sheffi12.net.csv";

std::string grid_text() {
  std::ostringstream out;
  serialize_network(parse_network_file(kGridPath), out);
  return out.str();
}

void BM_ParseNetwork(benchmark::State& state) {
  const std::string text = grid_text();
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(parse_network(in));
  }
}
BENCHMARK(BM_ParseNetwork);

void BM_PerceivedCostDraw(benchmark::State& state) {
  const Network net = parse_network_file(kGridPath);
  const auto free_flow = free_flow_costs(net);
  RngStream rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_perceived_costs(free_flow, free_flow, GammaParam{0.3}, rng));
  }
}
BENCHMARK(BM_PerceivedCostDraw);

void BM_Dijkstra(benchmark::State& state) {
  const Network net = parse_network_file(kGridPath);
  const auto free_flow = free_flow_costs(net);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dijkstra(net, free_flow, 1));
  }
}
BENCHMARK(BM_Dijkstra);

void BM_StochasticLoading(benchmark::State& state) {
  const Network net = parse_network_file(kGridPath);
  const auto free_flow = free_flow_costs(net);
  DemandSet demands;
  demands.demands.push_back({1, 12, 20.0});
  RngStream rng(1);
  const int inner = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        msa_stochastic_loading(net, free_flow, demands, inner, GammaParam{0.3}, rng));
  }
}
BENCHMARK(BM_StochasticLoading)->Arg(1)->Arg(10);

void BM_PressureSolve(benchmark::State& state) {
  const Network net = parse_network_file(kGridPath);
  RngStream rng(1);
  PhysarumState tubes;
  tubes.conductivity = init_conductivity(net, rng);
  tubes.lengths = free_flow_costs(net);
  DemandSet demands;
  demands.demands.push_back({1, 12, 20.0});
  const auto groups = group_by_origin(demands);
  const auto injections = make_injections(net.node_count(), groups.front());
  PressureSolver solver(net);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.solve(tubes, injections, 12));
  }
}
BENCHMARK(BM_PressureSolve);

void BM_PhysarumInnerPass(benchmark::State& state) {
  const Network net = parse_network_file(kGridPath);
  DemandSet demands;
  demands.demands.push_back({1, 12, 20.0});
  RngStream rng(1);
  PhysarumSystem system(net, demands, rng);
  const auto free_flow = free_flow_costs(net);
  std::uint64_t truncations = 0;
  const int inner = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        physarum_inner(system, free_flow, inner, GammaParam{0.3}, rng, &truncations));
  }
}
BENCHMARK(BM_PhysarumInnerPass)->Arg(1)->Arg(10);

void BM_SolveExample1(benchmark::State& state) {
  const Network net = parse_network_file(kGridPath);
  DemandSet demands;
  demands.demands.push_back({1, 12, 20.0});
  SolverConfig config;
  config.kind = state.range(0) == 0 ? SolverKind::physarum : SolverKind::msa;
  if (config.kind == SolverKind::msa) config.max_outer = 1000;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    config.seed = seed++;
    benchmark::DoNotOptimize(solve_sue(net, demands, config));
  }
}
BENCHMARK(BM_SolveExample1)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
