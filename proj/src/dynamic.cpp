#include "aoi/dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aoi/analytic.hpp"
#include "aoi/fbl.hpp"
#include "aoi/parallel.hpp"
#include "aoi/stats.hpp"

namespace aoi::dynamic {

namespace {

double unicast_capacity(const DynamicConfig& cfg, double d) {
  return 0.5 * std::log2(cfg.snr_at(d));
}

double link_error(double snr, double bits, double blocklength) {
  fbl::LinkBudget link{snr, bits, blocklength};
  return fbl::block_error_rate(link).value;
}

}  // namespace

std::vector<double> sample_realization(const DynamicConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  std::poisson_distribution<std::size_t> count(cfg.mean_ue_count());
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double d1sq = cfg.inner_radius * cfg.inner_radius;
  const double span = cfg.outer_radius * cfg.outer_radius - d1sq;
  std::vector<double> d(count(rng));
  for (double& x : d) x = std::sqrt(d1sq + uniform(rng) * span);
  return d;
}

std::vector<double> sample_realization(const DynamicConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_realization(cfg, rng);
}

double realization_aoi(const DynamicConfig& cfg, std::span<const double> distances,
                       Scheme scheme, const RealizationOptions& options) {
  if (distances.empty()) return 0.0;
  const std::size_t n = distances.size();
  const double backoff = options.rate_backoff.value_or(1.0);
  if (!(backoff > 0.0 && backoff <= 1.0))
    throw std::invalid_argument("dynamic: rate_backoff must lie in (0, 1]");

  if (scheme == Scheme::Broadcast) {
    const double bits = cfg.common_bits + static_cast<double>(n) * cfg.individual_bits;
    const double m = bits / (backoff * cfg.outer_capacity());
    const double slot[] = {m};
    if (!options.rate_backoff) return analytic::dnp_zero_wait(slot, 0.0, 0);
    double sum = 0.0;
    for (double d : distances)
      sum += analytic::dnp_zero_wait(slot, link_error(cfg.snr_at(d), bits, m), 0);
    return sum / static_cast<double>(n);
  }

  std::vector<double> order(distances.begin(), distances.end());
  std::sort(order.begin(), order.end());
  const double bits = cfg.common_bits + cfg.individual_bits;
  std::vector<double> serving(n);
  std::vector<double> eps(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = unicast_capacity(cfg, order[k]);
    if (!(c > 0.0))
      throw RangeError("dynamic: UE beyond decodable range under approximation (d = " +
                       std::to_string(order[k]) + ")");
    const double m = bits / (backoff * c);
    serving[k] = m + cfg.overhead;
    if (options.rate_backoff) eps[k] = link_error(cfg.snr_at(order[k]), bits, m);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += analytic::dnp_zero_wait(serving, eps[k], k);
  return sum / static_cast<double>(n);
}

AoiEstimate expected_aoi_monte_carlo(const DynamicConfig& cfg, Scheme scheme,
                                     std::size_t realizations, std::uint64_t seed,
                                     const RealizationOptions& options, std::size_t threads) {
  cfg.validate();
  if (realizations < 100)
    throw std::invalid_argument("dynamic: at least 100 realizations are required");
  std::vector<double> values(realizations);
  parallel_for(realizations, threads, [&](std::size_t i) {
    const auto d = sample_realization(cfg, stats::stream_seed(seed, i));
    values[i] = realization_aoi(cfg, d, scheme, options);
  });
  const auto s = stats::summarize(values);
  AoiEstimate est;
  est.mean = s.mean;
  est.ci_half_width = s.ci_half_width;
  est.replications = realizations;
  return est;
}

}  // namespace aoi::dynamic
