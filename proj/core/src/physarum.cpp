#include "physue/physarum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace physue {

std::vector<double> init_conductivity(const Network& network, RngStream& rng) {
  std::vector<double> conductivity(network.link_count());
  for (double& d : conductivity) d = 0.5 + 0.5 * rng.next_uniform01();
  return conductivity;
}

std::vector<OriginGroup> group_by_origin(const DemandSet& demands) {
  std::map<int, OriginGroup> by_origin;
  for (const OdDemand& d : demands.demands) {
    OriginGroup& group = by_origin[d.origin];
    group.origin = d.origin;
    group.demands.push_back(d);
    group.total += d.rate;
  }
  std::vector<OriginGroup> groups;
  groups.reserve(by_origin.size());
  for (auto& [origin, group] : by_origin) groups.push_back(std::move(group));
  return groups;
}

std::vector<double> make_injections(int node_count, const OriginGroup& group) {
  std::vector<double> injections(node_count, 0.0);
  for (const OdDemand& d : group.demands) {
    if (d.origin < 1 || d.origin > node_count || d.destination < 1 ||
        d.destination > node_count)
      throw std::invalid_argument("demand references a node outside the network");
    injections[d.origin - 1] -= d.rate;
    injections[d.destination - 1] += d.rate;
  }
  return injections;
}

struct PressureSolver::Impl {
  const Network* network;

  explicit Impl(const Network& net) : network(&net) {}
};

PressureSolver::PressureSolver(const Network& network)
    : impl_(std::make_unique<Impl>(network)) {}
PressureSolver::~PressureSolver() = default;
PressureSolver::PressureSolver(PressureSolver&&) noexcept = default;
PressureSolver& PressureSolver::operator=(PressureSolver&&) noexcept = default;

std::vector<double> PressureSolver::solve(const PhysarumState& state,
                                          std::span<const double> injections,
                                          int reference_node) {
  const Network& net = *impl_->network;
  const int n = net.node_count();
  const int m = net.link_count();
  if (state.conductivity.size() != static_cast<std::size_t>(m) ||
      state.lengths.size() != static_cast<std::size_t>(m))
    throw std::invalid_argument("state vectors do not match link count");
  if (injections.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("injection vector does not match node count");
  if (reference_node < 1 || reference_node > n)
    throw std::invalid_argument("reference node outside the network");
  for (int a = 0; a < m; ++a) {
    if (!(state.lengths[a] > 0.0)) throw std::invalid_argument("tube lengths must be > 0");
    if (state.conductivity[a] < 0.0)
      throw std::invalid_argument("conductivities must be >= 0");
  }

  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < m; ++a) {
    const Link& link = net.link(a);
    const double g = state.conductivity[a] / state.lengths[a];
    const int i = link.from - 1;
    const int j = link.to - 1;
    laplacian(i, i) += g;
    laplacian(j, j) += g;
    laplacian(i, j) -= g;
    laplacian(j, i) -= g;
  }

  // The node equations sum_i g_ij (p_i - p_j) = injections[j] rearrange to
  // laplacian * p = -injections; the reference row/column is dropped to pin
  // p[reference] = 0.
  Eigen::VectorXd rhs(n);
  for (int k = 0; k < n; ++k) rhs(k) = -injections[k];

  const int ref = reference_node - 1;
  const int r = n - 1;
  Eigen::MatrixXd reduced(r, r);
  Eigen::VectorXd rhs_reduced(r);
  for (int row = 0, rr = 0; row < n; ++row) {
    if (row == ref) continue;
    rhs_reduced(rr) = rhs(row);
    for (int col = 0, rc = 0; col < n; ++col) {
      if (col == ref) continue;
      reduced(rr, rc) = laplacian(row, col);
      ++rc;
    }
    ++rr;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(reduced);
  Eigen::VectorXd x = lu.solve(rhs_reduced);

  Eigen::VectorXd pressures = Eigen::VectorXd::Zero(n);
  auto expand = [&] {
    for (int k = 0, rk = 0; k < n; ++k) {
      if (k == ref) {
        pressures(k) = 0.0;
        continue;
      }
      pressures(k) = x(rk++);
    }
  };
  expand();

  const double tol = kPressureResidualTol * (1.0 + rhs.lpNorm<Eigen::Infinity>());
  double residual = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass <= 3; ++pass) {
    Eigen::VectorXd full_residual = rhs - laplacian * pressures;
    residual = full_residual.lpNorm<Eigen::Infinity>();
    if (residual <= tol) break;
    if (pass == 3) break;
    Eigen::VectorXd reduced_residual(r);
    for (int k = 0, rk = 0; k < n; ++k) {
      if (k == ref) continue;
      reduced_residual(rk++) = full_residual(k);
    }
    x += lu.solve(reduced_residual);
    expand();
  }
  if (!(residual <= tol))
    throw SolveError("pressure solve residual " + std::to_string(residual) +
                     " exceeds tolerance " + std::to_string(tol) +
                     " (unbalanced injections or disconnected network)");

  return std::vector<double>(pressures.data(), pressures.data() + n);
}

std::vector<double> solve_pressures(const Network& network, const PhysarumState& state,
                                    std::span<const double> injections,
                                    int reference_node) {
  PressureSolver solver(network);
  return solver.solve(state, injections, reference_node);
}

std::vector<double> compute_fluxes(const Network& network, const PhysarumState& state,
                                   std::span<const double> pressures) {
  const int m = network.link_count();
  if (pressures.size() != static_cast<std::size_t>(network.node_count()))
    throw std::invalid_argument("pressure vector does not match node count");
  std::vector<double> fluxes(m);
  for (int a = 0; a < m; ++a) {
    const Link& link = network.link(a);
    const double g = state.conductivity[a] / state.lengths[a];
    const double drop = pressures[link.from - 1] - pressures[link.to - 1];
    const double q = g * drop;
    fluxes[a] = q > 0.0 ? q : 0.0;
  }
  return fluxes;
}

std::vector<double> combined_fluxes(const Network& network, const PhysarumState& state,
                                    std::span<const double> pressures) {
  const int m = network.link_count();
  if (pressures.size() != static_cast<std::size_t>(network.node_count()))
    throw std::invalid_argument("pressure vector does not match node count");
  std::vector<double> fluxes(m);
  for (int a = 0; a < m; ++a) {
    const Link& link = network.link(a);
    double g = state.conductivity[a] / state.lengths[a];
    const int rev = network.reverse_link(a);
    if (rev >= 0) g += state.conductivity[rev] / state.lengths[rev];
    const double drop = pressures[link.from - 1] - pressures[link.to - 1];
    const double s = g * drop;
    fluxes[a] = s > 0.0 ? s : 0.0;
  }
  return fluxes;
}

void update_conductivity(PhysarumState& state, std::span<const double> fluxes) {
  if (fluxes.size() != state.conductivity.size())
    throw std::invalid_argument("flux vector does not match link count");
  for (std::size_t a = 0; a < fluxes.size(); ++a) {
    double next = 0.5 * (state.conductivity[a] + fluxes[a]);
    state.conductivity[a] = std::max(next, kConductivityFloor);
  }
}

std::vector<double> physarum_load(const Network& network, std::span<const double> lengths,
                                  const DemandSet& demands, RngStream& rng, int max_steps,
                                  double flux_tolerance) {
  if (lengths.size() != static_cast<std::size_t>(network.link_count()))
    throw std::invalid_argument("length vector does not match link count");

  auto groups = group_by_origin(demands);
  std::vector<PhysarumState> states;
  std::vector<std::vector<double>> injections;
  std::vector<int> reference_nodes;
  states.reserve(groups.size());
  for (const OriginGroup& group : groups) {
    PhysarumState state;
    state.conductivity = init_conductivity(network, rng);
    state.lengths.assign(lengths.begin(), lengths.end());
    states.push_back(std::move(state));
    injections.push_back(make_injections(network.node_count(), group));
    int ref = group.demands.front().destination;
    for (const OdDemand& d : group.demands) ref = std::min(ref, d.destination);
    reference_nodes.push_back(ref);
  }

  PressureSolver solver(network);
  std::vector<double> previous(network.link_count(), 0.0);
  double change = std::numeric_limits<double>::infinity();
  for (int step = 0; step < max_steps; ++step) {
    std::vector<double> total(network.link_count(), 0.0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      auto pressures = solver.solve(states[g], injections[g], reference_nodes[g]);
      auto fluxes = compute_fluxes(network, states[g], pressures);
      update_conductivity(states[g], fluxes);
      for (int a = 0; a < network.link_count(); ++a) total[a] += fluxes[a];
    }
    change = 0.0;
    for (int a = 0; a < network.link_count(); ++a)
      change = std::max(change, std::abs(total[a] - previous[a]));
    previous = std::move(total);
    if (change <= flux_tolerance) return previous;
  }
  throw SolveError("flow adaptation did not settle within " + std::to_string(max_steps) +
                   " steps (last flux change " + std::to_string(change) + ")");
}

}  // namespace physue
