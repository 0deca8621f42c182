#include "physue/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

namespace physue {

DijkstraResult dijkstra(const Network& network, std::span<const double> lengths,
                        int source) {
  const int n = network.node_count();
  if (!network.has_node(source)) throw std::invalid_argument("source node does not exist");
  if (lengths.size() != static_cast<std::size_t>(network.link_count()))
    throw std::invalid_argument("length vector does not match link count");
  for (double l : lengths)
    if (l < 0.0) throw std::invalid_argument("negative link length");

  DijkstraResult result;
  result.dist.assign(n + 1, std::numeric_limits<double>::infinity());
  result.pred_node.assign(n + 1, 0);
  result.pred_link.assign(n + 1, -1);
  result.reachable.assign(n + 1, 0);

  using Entry = std::pair<double, int>;  // (distance, node); ties pop lowest node
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  result.dist[source] = 0.0;
  result.reachable[source] = 1;
  queue.push({0.0, source});

  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > result.dist[u]) continue;
    for (int li : network.out_links(u)) {
      const Link& link = network.link(li);
      const int v = link.to;
      const double nd = d + lengths[li];
      if (nd < result.dist[v]) {
        result.dist[v] = nd;
        result.pred_node[v] = u;
        result.pred_link[v] = li;
        result.reachable[v] = 1;
        queue.push({nd, v});
      } else if (nd == result.dist[v] && u < result.pred_node[v]) {
        result.pred_node[v] = u;
        result.pred_link[v] = li;
      }
    }
  }
  return result;
}

std::vector<int> shortest_path_links(const DijkstraResult& result, int source,
                                     int destination) {
  if (destination < 1 || destination >= static_cast<int>(result.dist.size()) ||
      source < 1 || source >= static_cast<int>(result.dist.size()))
    throw std::invalid_argument("node outside the solved network");
  if (!result.reachable[destination])
    throw std::invalid_argument("destination " + std::to_string(destination) +
                                " unreachable from source " + std::to_string(source));
  std::vector<int> links;
  int node = destination;
  while (node != source) {
    const int li = result.pred_link[node];
    if (li < 0) throw std::invalid_argument("broken predecessor chain");
    links.push_back(li);
    node = result.pred_node[node];
  }
  std::reverse(links.begin(), links.end());
  return links;
}

bool PathSet::incidence(std::size_t link, std::size_t path) const {
  const auto& seq = link_seqs[path];
  return std::find(seq.begin(), seq.end(), static_cast<int>(link)) != seq.end();
}

namespace {

struct PathDfs {
  const Network* network;
  int destination;
  int max_hops;
  std::size_t path_limit;
  PathSet* out;
  std::vector<char> on_path;
  std::vector<int> node_stack;
  std::vector<int> link_stack;

  void expand(int node) {
    if (node == destination) {
      if (out->node_seqs.size() >= path_limit)
        throw EnumerationError("path enumeration exceeded " +
                               std::to_string(path_limit) + " paths");
      out->node_seqs.push_back(node_stack);
      out->link_seqs.push_back(link_stack);
      return;
    }
    if (static_cast<int>(link_stack.size()) >= max_hops) return;

    // Out-links sorted by head node id give lexicographic path order.
    std::vector<int> sorted = network->out_links(node);
    std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
      return network->link(a).to < network->link(b).to;
    });
    for (int li : sorted) {
      const int next = network->link(li).to;
      if (on_path[next]) continue;
      on_path[next] = 1;
      node_stack.push_back(next);
      link_stack.push_back(li);
      expand(next);
      link_stack.pop_back();
      node_stack.pop_back();
      on_path[next] = 0;
    }
  }
};

}  // namespace

PathSet enumerate_paths(const Network& network, int origin, int destination, int max_hops,
                        std::size_t path_limit) {
  if (!network.has_node(origin) || !network.has_node(destination))
    throw std::invalid_argument("origin or destination does not exist");
  if (origin == destination) throw std::invalid_argument("origin equals destination");
  if (max_hops < 1) throw std::invalid_argument("max_hops must be >= 1");

  PathSet paths;
  paths.origin = origin;
  paths.destination = destination;

  PathDfs dfs;
  dfs.network = &network;
  dfs.destination = destination;
  dfs.max_hops = max_hops;
  dfs.path_limit = path_limit;
  dfs.out = &paths;
  dfs.on_path.assign(network.node_count() + 1, 0);
  dfs.on_path[origin] = 1;
  dfs.node_stack.push_back(origin);
  dfs.expand(origin);
  return paths;
}

std::vector<double> path_costs(const PathSet& paths, std::span<const double> link_costs) {
  std::vector<double> costs(paths.size(), 0.0);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (int li : paths.link_seqs[p]) {
      if (li < 0 || static_cast<std::size_t>(li) >= link_costs.size())
        throw std::invalid_argument("path references a link outside the cost vector");
      costs[p] += link_costs[li];
    }
  }
  return costs;
}

PathProbabilities probit_path_probabilities_mc(const PathSet& paths,
                                               std::span<const double> mean_link_costs,
                                               std::span<const double> free_flow,
                                               GammaParam gamma, std::size_t draws,
                                               RngStream& rng) {
  if (paths.size() == 0) throw std::invalid_argument("empty path set");
  if (draws == 0) throw std::invalid_argument("draws must be >= 1");

  std::vector<std::size_t> wins(paths.size(), 0);
  for (std::size_t d = 0; d < draws; ++d) {
    PerceivedCostDraw draw =
        sample_perceived_costs(mean_link_costs, free_flow, gamma, rng);
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < paths.size(); ++p) {
      double cost = 0.0;
      for (int li : paths.link_seqs[p]) cost += draw.values[li];
      if (cost < best_cost) {
        best_cost = cost;
        best = p;
      }
    }
    ++wins[best];
  }

  PathProbabilities result;
  result.probability.resize(paths.size());
  result.std_error.resize(paths.size());
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const double prob = static_cast<double>(wins[p]) / static_cast<double>(draws);
    result.probability[p] = prob;
    result.std_error[p] = std::sqrt(prob * (1.0 - prob) / static_cast<double>(draws));
  }
  return result;
}

ObjectiveEstimate sue_objective_estimate(const Network& network,
                                         std::span<const double> flows,
                                         const DemandSet& demands,
                                         std::span<const PathSet> paths, GammaParam gamma,
                                         std::size_t draws, RngStream& rng) {
  if (paths.size() != demands.demands.size())
    throw std::invalid_argument("need one path set per OD pair");
  if (draws == 0) throw std::invalid_argument("draws must be >= 1");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].origin != demands.demands[i].origin ||
        paths[i].destination != demands.demands[i].destination)
      throw std::invalid_argument("path set order does not match demands");
    if (paths[i].size() == 0) throw std::invalid_argument("empty path set");
  }

  const std::vector<double> mean_costs = link_costs(network, flows);
  const std::vector<double> free_flow = free_flow_costs(network);

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    PerceivedCostDraw draw = sample_perceived_costs(mean_costs, free_flow, gamma, rng);
    double total = 0.0;
    for (std::size_t od = 0; od < paths.size(); ++od) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& seq : paths[od].link_seqs) {
        double cost = 0.0;
        for (int li : seq) cost += draw.values[li];
        best = std::min(best, cost);
      }
      total += demands.demands[od].rate * best;
    }
    sum += total;
    sum_sq += total * total;
  }
  const double nd = static_cast<double>(draws);
  const double expected_min = sum / nd;
  const double variance = std::max(0.0, (sum_sq - sum * sum / nd) / std::max(1.0, nd - 1.0));

  double deterministic = 0.0;
  for (int a = 0; a < network.link_count(); ++a) {
    const Link& link = network.link(a);
    deterministic += flows[a] * link_cost(link, flows[a]) - link_cost_integral(link, flows[a]);
  }

  ObjectiveEstimate estimate;
  estimate.value = -expected_min + deterministic;
  estimate.std_error = std::sqrt(variance / nd);
  return estimate;
}

WilliamsCheck williams_gradient_check(const PathSet& paths,
                                      std::span<const double> mean_link_costs,
                                      std::span<const double> free_flow, GammaParam gamma,
                                      std::size_t path_index, double step,
                                      std::size_t draws, RngStream& rng) {
  if (path_index >= paths.size()) throw std::invalid_argument("path index out of range");
  if (draws == 0) throw std::invalid_argument("draws must be >= 1");

  if (step <= 0.0) {
    double base = 0.0;
    for (int li : paths.link_seqs[path_index]) base += mean_link_costs[li];
    step = 0.01 * base;
  }
  const double half = 0.5 * step;

  // One shared draw per iteration serves both sides of the centered
  // difference and the probability estimate (common random numbers), so the
  // difference has far less variance than two independent estimates would.
  double sum_plus = 0.0;
  double sum_minus = 0.0;
  std::size_t wins = 0;
  std::vector<double> costs(paths.size());
  for (std::size_t d = 0; d < draws; ++d) {
    PerceivedCostDraw draw =
        sample_perceived_costs(mean_link_costs, free_flow, gamma, rng);
    for (std::size_t p = 0; p < paths.size(); ++p) {
      double cost = 0.0;
      for (int li : paths.link_seqs[p]) cost += draw.values[li];
      costs[p] = cost;
    }
    std::size_t best = 0;
    for (std::size_t p = 1; p < paths.size(); ++p)
      if (costs[p] < costs[best]) best = p;
    if (best == path_index) ++wins;

    double min_plus = std::numeric_limits<double>::infinity();
    double min_minus = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const double shift = p == path_index ? half : 0.0;
      min_plus = std::min(min_plus, costs[p] + shift);
      min_minus = std::min(min_minus, costs[p] - shift);
    }
    sum_plus += min_plus;
    sum_minus += min_minus;
  }

  WilliamsCheck check;
  check.finite_difference = (sum_plus - sum_minus) / (step * static_cast<double>(draws));
  check.probability = static_cast<double>(wins) / static_cast<double>(draws);
  check.discrepancy = std::abs(check.finite_difference - check.probability);
  return check;
}

}  // namespace physue
