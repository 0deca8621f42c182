#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "physue/network.hpp"
#include "physue/probit.hpp"

namespace physue {

/// Conductivities are clamped here instead of decaying to exact zero; keeps
/// the pressure system well posed while staying far below any meaningful
/// flux. Links sitting at the floor are dead.
inline constexpr double kConductivityFloor = 1e-12;

/// Pressure solves must reach residual <= kPressureResidualTol * (1 + |b|).
inline constexpr double kPressureResidualTol = 1e-10;

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-directed-link tube state. Entries align with Network::links(); the
/// two directions of a node pair are independent entries.
struct PhysarumState {
  std::vector<double> conductivity;  // D, >= kConductivityFloor
  std::vector<double> lengths;       // L, > 0
};

/// Independent U[0.5, 1] draw per existing directed link, in link order.
std::vector<double> init_conductivity(const Network& network, RngStream& rng);

/// Demands of one origin, grouped for a single pressure solve.
struct OriginGroup {
  int origin = 0;
  std::vector<OdDemand> demands;
  double total = 0.0;
};

/// Groups a demand set by origin, ascending origin id.
std::vector<OriginGroup> group_by_origin(const DemandSet& demands);

/// Net flow per node (index = id-1): -total at the origin, +rate at each
/// destination, 0 elsewhere. Entries sum to zero up to rounding.
std::vector<double> make_injections(int node_count, const OriginGroup& group);

/// Solves the combined-conductance pressure system
///   sum_i (D_ij/L_ij + D_ji/L_ji) (p_i - p_j) = injections[j]
/// with p[reference_node] = 0. Absent directions contribute zero
/// conductance. Dense direct solve with iterative refinement; throws
/// SolveError when the residual tolerance cannot be met (e.g. the
/// injections are not balanced or the graph is disconnected under the
/// current conductances).
class PressureSolver {
 public:
  explicit PressureSolver(const Network& network);
  ~PressureSolver();
  PressureSolver(PressureSolver&&) noexcept;
  PressureSolver& operator=(PressureSolver&&) noexcept;

  std::vector<double> solve(const PhysarumState& state,
                            std::span<const double> injections,
                            int reference_node);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around PressureSolver.
std::vector<double> solve_pressures(const Network& network, const PhysarumState& state,
                                    std::span<const double> injections,
                                    int reference_node);

/// Directional positive-part flux: Q_ij = (D_ij/L_ij)(p_i - p_j) when that
/// quantity is positive, else 0. Every entry is >= 0. This is the quantity
/// the adaptation feeds back into the conductivities; while both directions
/// of a pair are alive it carries only the forward share of the pair's flow.
std::vector<double> compute_fluxes(const Network& network, const PhysarumState& state,
                                   std::span<const double> pressures);

/// Flow actually moved by the solve, reported directionally: the signed pair
/// flow s_ij = (D_ij/L_ij + D_ji/L_ji)(p_i - p_j) assigned to its carrying
/// direction (max(s_ij, 0) per directed link). Balances the injections at
/// every node up to the solver residual at every step, which the clipped
/// shares only do once reverse tubes have died.
std::vector<double> combined_fluxes(const Network& network, const PhysarumState& state,
                                    std::span<const double> pressures);

/// Averaging map D <- (D + Q)/2, clamped at kConductivityFloor.
void update_conductivity(PhysarumState& state, std::span<const double> fluxes);

/// Runs the flow-adaptation dynamics with fixed lengths until the max-norm
/// flux change drops to flux_tolerance (or max_steps is hit, reported via
/// SolveError). One independent relaxation per origin; returned flows are
/// summed over origins in ascending origin order. With a unique shortest
/// path the converged flow carries the full demand on it.
std::vector<double> physarum_load(const Network& network, std::span<const double> lengths,
                                  const DemandSet& demands, RngStream& rng,
                                  int max_steps = 10000, double flux_tolerance = 1e-6);

}  // namespace physue
