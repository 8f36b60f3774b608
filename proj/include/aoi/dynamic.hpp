#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "aoi/types.hpp"

// Monte Carlo estimate of the expected average AoI of the dynamic system:
// draw the UE population from a PPP on the annulus, compute the
// zero-waiting AoI of that realization, average over realizations.
namespace aoi::dynamic {

enum class Scheme { Broadcast, Unicast };

class RangeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// N ~ Poisson(Lambda) distances with density 2d / (D2^2 - D1^2).
std::vector<double> sample_realization(const DynamicConfig& cfg, std::mt19937_64& rng);
std::vector<double> sample_realization(const DynamicConfig& cfg, std::uint64_t seed);

struct RealizationOptions {
  // When set, unicast packets are sent at backoff * C_n instead of at
  // capacity and each UE's AoI carries the resulting block error rate.
  std::optional<double> rate_backoff;
};

// Zero-waiting AoI averaged over the UEs of one realization.
//   Broadcast: one packet of L_co + N L_id bits at rate C_D2, AoI 3/2 M.
//   Unicast: UEs served nearest first, U_n gets (L_co + L_id) / C_n
//   channel uses plus the overhead, C_n = 1/2 log2(gamma0 d_n^-eta).
// An empty realization has AoI 0.  Throws RangeError when some C_n <= 0.
double realization_aoi(const DynamicConfig& cfg, std::span<const double> distances,
                       Scheme scheme, const RealizationOptions& options = {});

// Mean and 95% interval over `realizations` independent draws (>= 100).
// Draw i uses stats::stream_seed(seed, i).
AoiEstimate expected_aoi_monte_carlo(const DynamicConfig& cfg, Scheme scheme,
                                     std::size_t realizations, std::uint64_t seed,
                                     const RealizationOptions& options = {},
                                     std::size_t threads = 0);

}  // namespace aoi::dynamic
