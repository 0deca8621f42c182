#include "physue/probit.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace physue {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double RngStream::next_uniform01() {
  // 53 significand bits, shifted into the open interval (0,1).
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal(double mean, double stddev) {
  return mean + stddev * inverse_normal_cdf(next_uniform01());
}

RngStream RngStream::for_worker(std::uint64_t master_seed, std::uint64_t worker_index) {
  return RngStream(splitmix64(master_seed ^ splitmix64(worker_index)));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Wichura's algorithm AS241 (PPND16 variant): rational approximations on a
// central interval and two tails, accurate to ~1e-16 relative error.
double inverse_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("inverse_normal_cdf requires p in (0,1)");

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) *
                 r +
             4.5921953931549871457e4) *
                r +
            1.3731693765509461125e4) *
               r +
           1.9715909503065514427e3) *
              r +
          1.3314166789178437745e2) *
             r +
         3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) *
                 r +
             2.1213794301586595867e4) *
                r +
            5.3941960214247511077e3) *
               r +
           6.8718700749205790830e2) *
              r +
          4.2313330701600911252e1) *
             r +
         1.0);
    return q * num / den;
  }

  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

PerceivedCostDraw sample_perceived_costs(std::span<const double> mean_costs,
                                         std::span<const double> free_flow,
                                         GammaParam gamma, RngStream& rng) {
  if (mean_costs.size() != free_flow.size())
    throw std::invalid_argument("mean_costs and free_flow size mismatch");
  if (!(gamma.value > 0.0)) throw std::invalid_argument("gamma must be > 0");

  PerceivedCostDraw draw;
  draw.values.resize(mean_costs.size());
  for (std::size_t i = 0; i < mean_costs.size(); ++i) {
    double value = rng.next_normal(mean_costs[i], std::sqrt(gamma.value * free_flow[i]));
    double floor = kPerceivedCostFloorFactor * free_flow[i];
    if (value < floor) {
      value = floor;
      ++draw.truncated;
    }
    draw.values[i] = value;
  }
  return draw;
}

double two_link_choice_probability(double t1, double t2, double t01, double t02,
                                   GammaParam gamma) {
  if (!(gamma.value > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (!(t01 > 0.0) || !(t02 > 0.0))
    throw std::invalid_argument("free-flow times must be > 0");
  return normal_cdf((t2 - t1) / std::sqrt(gamma.value * (t01 + t02)));
}

}  // namespace physue
