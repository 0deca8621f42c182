#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "physue/network.hpp"
#include "physue/physarum.hpp"
#include "physue/probit.hpp"

namespace physue {

enum class SolverKind { physarum, msa };

struct SolverConfig {
  GammaParam gamma{0.3};
  double epsilon0 = 0.1;     // outer stopping tolerance
  int inner_iterations = 1;  // Monte Carlo draws per outer iteration
  std::uint64_t seed = 0;
  int max_outer = 100000;  // safety cap, flagged when hit
  SolverKind kind = SolverKind::physarum;

  /// Experimental: derive the next tube lengths from the latest auxiliary
  /// flows instead of the running outer average. Off by default: averaged
  /// flows give the travel-cost feedback a stable operating point, and with
  /// multiple destinations in one pressure system the auxiliary-cost variant
  /// can lock onto flow patterns with live two-way tubes between the sinks.
  bool costs_from_latest_auxiliary = false;
};

struct FlowSolution {
  std::vector<double> link_flows;  // >= 0, indexed like Network::links()
  int outer_iterations = 0;
  bool converged = false;  // false when max_outer was hit
  double elapsed_seconds = 0.0;
  std::vector<double> epsilon_trace;  // one entry per outer iteration
  std::uint64_t truncation_count = 0;
};

/// Snapshot handed to the observer after each outer iteration. The spans
/// are only valid during the call.
struct OuterIterationEvent {
  int n = 0;
  double epsilon = 0.0;
  double elapsed_seconds = 0.0;
  std::uint64_t truncations = 0;  // cumulative
  std::span<const double> current_flows;
  std::span<const double> auxiliary_flows;
};
using IterationObserver = std::function<void(const OuterIterationEvent&)>;

/// Euclidean distance sqrt(sum (curr - prev)^2) over all directed links.
double convergence_metric(std::span<const double> prev, std::span<const double> curr);

/// Monte Carlo stochastic loading: for each of inner_iterations draws,
/// samples perceived link times, assigns each OD pair's full demand to its
/// shortest perceived path (all-or-nothing, deterministic tie-breaks), and
/// averages the loadings. Returns the averaged auxiliary flow pattern.
std::vector<double> msa_stochastic_loading(const Network& network,
                                           std::span<const double> mean_costs,
                                           const DemandSet& demands, int inner_iterations,
                                           GammaParam gamma, RngStream& rng,
                                           std::uint64_t* truncations = nullptr);

/// Method of Successive Averages with predetermined 1/n steps.
FlowSolution msa_solve(const Network& network, const DemandSet& demands,
                       const SolverConfig& config, const IterationObserver& observer = {});

/// Persistent per-origin tube states for the flow-adaptation solver.
/// Conductivities are initialized once (ascending origin order) and carry
/// across outer iterations.
class PhysarumSystem {
 public:
  PhysarumSystem(const Network& network, const DemandSet& demands, RngStream& rng);

  const Network& network() const { return *network_; }
  const std::vector<OriginGroup>& groups() const { return groups_; }
  const PhysarumState& state(std::size_t group_index) const { return states_[group_index]; }

 private:
  friend std::vector<double> physarum_inner(PhysarumSystem&, std::span<const double>,
                                            int, GammaParam, RngStream&, std::uint64_t*);

  const Network* network_;
  std::vector<OriginGroup> groups_;
  std::vector<PhysarumState> states_;
  std::vector<std::vector<double>> injections_;  // per group
  std::vector<int> reference_nodes_;             // lowest destination per group
  std::vector<double> free_flow_;
  PressureSolver solver_;
};

/// One Monte Carlo block of the flow-adaptation solver: for each of
/// inner_iterations draws, samples tube lengths from the current mean
/// lengths, relaxes every origin's pressure system once, adapts the
/// conductivities from the clipped per-direction fluxes, and folds the
/// conserved pair flows (summed over origins) into a running average.
/// Returns that average (the auxiliary flow pattern); it balances each
/// origin's demand at every node up to the pressure-solver residual.
std::vector<double> physarum_inner(PhysarumSystem& system,
                                   std::span<const double> mean_lengths,
                                   int inner_iterations, GammaParam gamma, RngStream& rng,
                                   std::uint64_t* truncations = nullptr);

/// Flow-adaptation SUE solver: mean tube lengths track the BPR travel times
/// of the current flows through an averaging update, the auxiliary flows
/// come from physarum_inner, and the reported solution is the running
/// average of the auxiliary patterns.
FlowSolution physarum_sue_solve(const Network& network, const DemandSet& demands,
                                const SolverConfig& config,
                                const IterationObserver& observer = {});

/// Dispatches on config.kind.
FlowSolution solve_sue(const Network& network, const DemandSet& demands,
                       const SolverConfig& config, const IterationObserver& observer = {});

struct FlowComparison {
  std::vector<double> abs_diff;
  double max_diff = 0.0;
  std::size_t argmax = 0;
};

/// Elementwise |a - b| and its maximum. The vectors must describe the same
/// link list.
FlowComparison compare_solutions(std::span<const double> a, std::span<const double> b);

}  // namespace physue
