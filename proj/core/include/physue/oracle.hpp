#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "physue/network.hpp"
#include "physue/probit.hpp"

namespace physue {

/// Reference implementations used to cross-check the solvers. Everything in
/// this header favors clarity over speed and is independent of the
/// Physarum/MSA code paths.

struct DijkstraResult {
  std::vector<double> dist;      // dist[node], +inf when unreachable
  std::vector<int> pred_node;    // predecessor node, 0 when none
  std::vector<int> pred_link;    // incoming link index, -1 when none
  std::vector<char> reachable;   // reachable[node]
};

/// Single-source shortest paths over nonnegative link lengths. Ties are
/// resolved deterministically: a relaxation at equal distance wins only if
/// it lowers the predecessor node index, and equal-priority heap entries pop
/// in ascending node order.
DijkstraResult dijkstra(const Network& network, std::span<const double> lengths, int source);

/// Link indices along the shortest path source -> destination. Throws
/// std::invalid_argument when the destination is unreachable.
std::vector<int> shortest_path_links(const DijkstraResult& result, int source,
                                     int destination);

class EnumerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All simple paths for one OD pair, in lexicographic node-sequence order.
struct PathSet {
  int origin = 0;
  int destination = 0;
  std::vector<std::vector<int>> node_seqs;
  std::vector<std::vector<int>> link_seqs;

  std::size_t size() const { return link_seqs.size(); }
  /// True when the path uses the link.
  bool incidence(std::size_t link, std::size_t path) const;
};

/// Depth-first enumeration of simple paths with at most max_hops links.
/// Throws EnumerationError when path_limit is exceeded.
PathSet enumerate_paths(const Network& network, int origin, int destination, int max_hops,
                        std::size_t path_limit = 1000000);

/// Total cost of each path under the given link costs.
std::vector<double> path_costs(const PathSet& paths, std::span<const double> link_costs);

struct PathProbabilities {
  std::vector<double> probability;
  std::vector<double> std_error;  // binomial standard error per path
};

/// Monte Carlo estimate of the probability that each path is perceived
/// shortest. Link perception errors are sampled once per draw and shared by
/// all paths, so overlapping paths are correlated exactly as the link-based
/// model dictates. Cost ties go to the lowest path index.
PathProbabilities probit_path_probabilities_mc(const PathSet& paths,
                                               std::span<const double> mean_link_costs,
                                               std::span<const double> free_flow,
                                               GammaParam gamma, std::size_t draws,
                                               RngStream& rng);

struct ObjectiveEstimate {
  double value = 0.0;
  double std_error = 0.0;  // from the Monte Carlo term only
};

/// Estimate of the equivalent minimization objective
///   -sum_od q_od E[min_path C_path] + sum_links x*t(x) - integral of t,
/// with the expectation estimated by common-random-number sampling over the
/// provided path sets (one per OD pair, same order as demands).
ObjectiveEstimate sue_objective_estimate(const Network& network,
                                         std::span<const double> flows,
                                         const DemandSet& demands,
                                         std::span<const PathSet> paths, GammaParam gamma,
                                         std::size_t draws, RngStream& rng);

struct WilliamsCheck {
  double finite_difference = 0.0;  // d E[min] / d c_k estimate
  double probability = 0.0;        // MC choice probability of path k
  double discrepancy = 0.0;        // |finite_difference - probability|
};

/// Verifies that the derivative of the expected minimum path cost with
/// respect to one path's mean cost equals that path's choice probability.
/// Uses a centered difference with common random numbers; step <= 0 picks
/// 0.01 times the path's mean cost.
WilliamsCheck williams_gradient_check(const PathSet& paths,
                                      std::span<const double> mean_link_costs,
                                      std::span<const double> free_flow, GammaParam gamma,
                                      std::size_t path_index, double step,
                                      std::size_t draws, RngStream& rng);

}  // namespace physue
