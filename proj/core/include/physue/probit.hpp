#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace physue {

/// Scale of the perceived-cost variance: a perceived link time is drawn from
/// Normal(t_a, gamma * t0_a) where t0_a is the free-flow time.
struct GammaParam {
  double value = 0.3;
};

/// Deterministic random stream: std::mt19937_64 with an inverse-CDF normal
/// transform (Wichura's AS241 rational approximation). Exactly one 64-bit
/// word is consumed per variate, so the draw count per operation is fixed
/// and the sequence for a given seed is identical across platforms. That is
/// what keeps golden flow files stable.
///
/// Single-owner mutable state: concurrent samplers need one stream each,
/// derived via for_worker().
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on the open interval (0,1); one u64 consumed.
  double next_uniform01();

  /// Normal variate via inverse CDF; one u64 consumed.
  double next_normal(double mean, double stddev);

  /// Independently seeded stream for worker `worker_index`, derived
  /// deterministically from the master seed (splitmix64 mixing).
  static RngStream for_worker(std::uint64_t master_seed, std::uint64_t worker_index);

 private:
  std::mt19937_64 gen_;
};

/// Standard normal CDF.
double normal_cdf(double z);

/// Inverse standard normal CDF (AS241); p must be in (0,1).
double inverse_normal_cdf(double p);

/// Sampled perceived times are floored at this fraction of the free-flow
/// time. The normal model admits negative draws, which would break both the
/// shortest-path loading and the tube-length matrix; at the bundled network's
/// parameters the floor is hit less than once per 10^4 draws, and every hit
/// is counted so solver traces can report it.
inline constexpr double kPerceivedCostFloorFactor = 0.01;

/// One realization of perceived link travel times, indexed like
/// Network::links().
struct PerceivedCostDraw {
  std::vector<double> values;
  std::uint64_t truncated = 0;  // draws clamped to the floor
};

/// Draws one perceived time per link: Normal(mean_costs[a], gamma *
/// free_flow[a]), floored at kPerceivedCostFloorFactor * free_flow[a].
/// Advances `rng` by exactly one draw per link, in link order.
PerceivedCostDraw sample_perceived_costs(std::span<const double> mean_costs,
                                         std::span<const double> free_flow,
                                         GammaParam gamma, RngStream& rng);

/// Exact probability that route 1 is perceived cheaper than route 2 when the
/// two routes share no links: Phi((t2 - t1) / sqrt(gamma * (t01 + t02))).
/// Used as a closed-form oracle for the Monte Carlo machinery.
double two_link_choice_probability(double t1, double t2, double t01, double t02,
                                   GammaParam gamma);

}  // namespace physue
