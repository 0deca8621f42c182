#include "physue/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "physue/oracle.hpp"

namespace physue {

namespace {

void check_config(const SolverConfig& config) {
  if (!(config.gamma.value > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (!(config.epsilon0 > 0.0)) throw std::invalid_argument("epsilon0 must be > 0");
  if (config.inner_iterations < 1)
    throw std::invalid_argument("inner_iterations must be >= 1");
  if (config.max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

double convergence_metric(std::span<const double> prev, std::span<const double> curr) {
  if (prev.size() != curr.size())
    throw std::invalid_argument("flow vectors have different lengths");
  double sum = 0.0;
  for (std::size_t a = 0; a < prev.size(); ++a) {
    const double d = curr[a] - prev[a];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<double> msa_stochastic_loading(const Network& network,
                                           std::span<const double> mean_costs,
                                           const DemandSet& demands,
                                           int inner_iterations, GammaParam gamma,
                                           RngStream& rng, std::uint64_t* truncations) {
  if (inner_iterations < 1) throw std::invalid_argument("inner_iterations must be >= 1");
  const int m = network.link_count();
  const std::vector<double> free_flow = free_flow_costs(network);
  const auto groups = group_by_origin(demands);

  std::vector<double> average(m, 0.0);
  std::vector<double> loading(m);
  for (int i = 1; i <= inner_iterations; ++i) {
    PerceivedCostDraw draw = sample_perceived_costs(mean_costs, free_flow, gamma, rng);
    if (truncations) *truncations += draw.truncated;

    std::fill(loading.begin(), loading.end(), 0.0);
    for (const OriginGroup& group : groups) {
      DijkstraResult tree = dijkstra(network, draw.values, group.origin);
      for (const OdDemand& od : group.demands) {
        for (int li : shortest_path_links(tree, group.origin, od.destination))
          loading[li] += od.rate;
      }
    }
    for (int a = 0; a < m; ++a) average[a] = ((i - 1) * average[a] + loading[a]) / i;
  }
  return average;
}

FlowSolution msa_solve(const Network& network, const DemandSet& demands,
                       const SolverConfig& config, const IterationObserver& observer) {
  check_config(config);
  const auto start = std::chrono::steady_clock::now();
  const int m = network.link_count();

  RngStream rng(config.seed);
  std::uint64_t truncations = 0;

  const std::vector<double> free_flow = free_flow_costs(network);
  std::vector<double> flows =
      msa_stochastic_loading(network, free_flow, demands, config.inner_iterations,
                             config.gamma, rng, &truncations);

  FlowSolution solution;
  for (int n = 1; n <= config.max_outer; ++n) {
    const std::vector<double> costs = link_costs(network, flows);
    const std::vector<double> auxiliary = msa_stochastic_loading(
        network, costs, demands, config.inner_iterations, config.gamma, rng, &truncations);

    std::vector<double> next(m);
    for (int a = 0; a < m; ++a) next[a] = flows[a] + (auxiliary[a] - flows[a]) / n;

    const double epsilon = convergence_metric(auxiliary, next);
    solution.epsilon_trace.push_back(epsilon);
    flows = std::move(next);
    solution.outer_iterations = n;

    if (observer)
      observer({n, epsilon, seconds_since(start), truncations, flows, auxiliary});

    // The unit step at n = 1 lands exactly on the auxiliary pattern, making
    // the metric zero by arithmetic; the test is only meaningful from n = 2.
    if (n >= 2 && epsilon <= config.epsilon0) {
      solution.converged = true;
      break;
    }
  }

  solution.link_flows = std::move(flows);
  solution.elapsed_seconds = seconds_since(start);
  solution.truncation_count = truncations;
  return solution;
}

PhysarumSystem::PhysarumSystem(const Network& network, const DemandSet& demands,
                               RngStream& rng)
    : network_(&network),
      groups_(group_by_origin(demands)),
      free_flow_(free_flow_costs(network)),
      solver_(network) {
  if (groups_.empty()) throw std::invalid_argument("no demands");
  states_.reserve(groups_.size());
  injections_.reserve(groups_.size());
  reference_nodes_.reserve(groups_.size());
  for (const OriginGroup& group : groups_) {
    PhysarumState state;
    state.conductivity = init_conductivity(network, rng);
    state.lengths = free_flow_;
    states_.push_back(std::move(state));
    injections_.push_back(make_injections(network.node_count(), group));
    int ref = group.demands.front().destination;
    for (const OdDemand& od : group.demands) ref = std::min(ref, od.destination);
    reference_nodes_.push_back(ref);
  }
}

std::vector<double> physarum_inner(PhysarumSystem& system,
                                   std::span<const double> mean_lengths,
                                   int inner_iterations, GammaParam gamma, RngStream& rng,
                                   std::uint64_t* truncations) {
  if (inner_iterations < 1) throw std::invalid_argument("inner_iterations must be >= 1");
  const Network& network = system.network();
  const int m = network.link_count();
  if (mean_lengths.size() != static_cast<std::size_t>(m))
    throw std::invalid_argument("length vector does not match link count");

  std::vector<double> average(m, 0.0);
  std::vector<double> total(m);
  for (int i = 1; i <= inner_iterations; ++i) {
    // One shared length draw per pass: every origin sees the same perceived
    // network, exactly like one traveler population sampling once.
    PerceivedCostDraw draw =
        sample_perceived_costs(mean_lengths, system.free_flow_, gamma, rng);
    if (truncations) *truncations += draw.truncated;

    std::fill(total.begin(), total.end(), 0.0);
    for (std::size_t g = 0; g < system.groups_.size(); ++g) {
      PhysarumState& state = system.states_[g];
      state.lengths = draw.values;
      const auto pressures =
          system.solver_.solve(state, system.injections_[g], system.reference_nodes_[g]);
      // The adaptation feeds on the per-direction clipped flux; the reported
      // auxiliary pattern is the conserved pair flow, which balances the
      // demand at every node from the first iteration on. Both are taken at
      // the conductivities that produced the pressures.
      const auto moved = combined_fluxes(network, state, pressures);
      update_conductivity(state, compute_fluxes(network, state, pressures));
      for (int a = 0; a < m; ++a) total[a] += moved[a];
    }
    for (int a = 0; a < m; ++a) average[a] = ((i - 1) * average[a] + total[a]) / i;
  }
  return average;
}

FlowSolution physarum_sue_solve(const Network& network, const DemandSet& demands,
                                const SolverConfig& config,
                                const IterationObserver& observer) {
  check_config(config);
  const auto start = std::chrono::steady_clock::now();
  const int m = network.link_count();

  RngStream rng(config.seed);
  PhysarumSystem system(network, demands, rng);
  std::uint64_t truncations = 0;

  std::vector<double> lengths = free_flow_costs(network);  // C^0
  std::vector<double> auxiliary(m, 0.0);                   // Q-hat, 0 before iteration 1
  std::vector<double> averaged(m, 0.0);                    // Q-bar

  FlowSolution solution;
  for (int n = 1; n <= config.max_outer; ++n) {
    const std::vector<double>& cost_source =
        config.costs_from_latest_auxiliary ? auxiliary : averaged;
    const std::vector<double> travel_times = link_costs(network, cost_source);
    for (int a = 0; a < m; ++a) lengths[a] = 0.5 * (lengths[a] + travel_times[a]);

    auxiliary = physarum_inner(system, lengths, config.inner_iterations, config.gamma,
                               rng, &truncations);

    std::vector<double> next(m);
    for (int a = 0; a < m; ++a) next[a] = ((n - 1) * averaged[a] + auxiliary[a]) / n;
    const double epsilon = convergence_metric(averaged, next);
    solution.epsilon_trace.push_back(epsilon);
    averaged = std::move(next);
    solution.outer_iterations = n;

    if (observer)
      observer({n, epsilon, seconds_since(start), truncations, averaged, auxiliary});

    if (epsilon <= config.epsilon0) {
      solution.converged = true;
      break;
    }
  }

  solution.link_flows = std::move(averaged);
  solution.elapsed_seconds = seconds_since(start);
  solution.truncation_count = truncations;
  return solution;
}

FlowSolution solve_sue(const Network& network, const DemandSet& demands,
                       const SolverConfig& config, const IterationObserver& observer) {
  switch (config.kind) {
    case SolverKind::physarum:
      return physarum_sue_solve(network, demands, config, observer);
    case SolverKind::msa:
      return msa_solve(network, demands, config, observer);
  }
  throw std::invalid_argument("unknown solver kind");
}

FlowComparison compare_solutions(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("flow vectors have different lengths");
  FlowComparison cmp;
  cmp.abs_diff.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    cmp.abs_diff[i] = std::abs(a[i] - b[i]);
    if (cmp.abs_diff[i] > cmp.max_diff) {
      cmp.max_diff = cmp.abs_diff[i];
      cmp.argmax = i;
    }
  }
  return cmp;
}

}  // namespace physue
