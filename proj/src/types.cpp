#include "aoi/types.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace aoi {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::BRNP: return "BRNP";
    case Strategy::BRPS: return "BRPS";
    case Strategy::DNP: return "DNP";
    case Strategy::DPB: return "DPB";
    case Strategy::DPS: return "DPS";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies)
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

std::vector<double> SystemConfig::serving_times() const {
  std::vector<double> out(n_ues());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = serving_time(k);
  return out;
}

double SystemConfig::cycle_length() const {
  const auto s = serving_times();
  return std::accumulate(s.begin(), s.end(), 0.0);
}

double SystemConfig::info_ratio() const {
  return broadcast_bits / std::accumulate(ue_bits.begin(), ue_bits.end(), 0.0);
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

void SystemConfig::validate() const {
  const std::size_t n = n_ues();
  require(n >= 1, "system: n_ues must be >= 1");
  require(ue_blocklength.size() == n, "system: ue_blocklength must have n_ues entries");
  require(ue_snr.size() == n, "system: ue_snr must have n_ues entries");
  require(positive(gen_rate), "system: gen_rate must be positive");
  require(overhead >= 0.0 && std::isfinite(overhead), "system: overhead must be >= 0");
  for (std::size_t k = 0; k < n; ++k) {
    const std::string at = "[" + std::to_string(k) + "]";
    require(positive(ue_bits[k]), "system: ue_bits" + at + " must be positive");
    require(positive(ue_blocklength[k]), "system: ue_blocklength" + at + " must be positive");
    require(positive(ue_snr[k]), "system: ue_snr" + at + " must be positive");
  }
  require(positive(broadcast_bits), "system: broadcast_bits must be positive");
  require(positive(broadcast_blocklength), "system: broadcast_blocklength must be positive");
  const double alpha = info_ratio();
  require(alpha > 0.0 && alpha <= 1.0 + 1e-12,
          "system: information ratio alpha must lie in (0, 1], got " + std::to_string(alpha));
  if (!error_override.empty()) {
    require(error_override.size() == n, "system: error_override must have n_ues entries");
    for (double e : error_override)
      require(e >= 0.0 && e <= 1.0, "system: error_override entries must lie in [0, 1]");
  }
}

SystemConfig SystemConfig::homogeneous(std::size_t n_ues, double gen_rate, double bits_per_ue,
                                       double coding_rate, double snr, double overhead,
                                       double alpha) {
  SystemConfig cfg;
  cfg.gen_rate = gen_rate;
  cfg.ue_bits.assign(n_ues, bits_per_ue);
  cfg.ue_blocklength.assign(n_ues, bits_per_ue / coding_rate);
  cfg.ue_snr.assign(n_ues, snr);
  cfg.overhead = overhead;
  cfg.broadcast_bits = alpha * static_cast<double>(n_ues) * bits_per_ue;
  cfg.broadcast_blocklength = cfg.broadcast_bits / coding_rate;
  return cfg;
}

double DynamicConfig::mean_ue_count() const {
  return ue_intensity * std::numbers::pi *
         (outer_radius * outer_radius - inner_radius * inner_radius);
}

double DynamicConfig::snr_at(double distance) const {
  return ref_snr * std::pow(distance, -pathloss_exp);
}

double DynamicConfig::outer_capacity() const { return 0.5 * std::log2(1.0 + snr_at(outer_radius)); }

double DynamicConfig::inner_capacity() const { return 0.5 * std::log2(1.0 + snr_at(inner_radius)); }

void DynamicConfig::set_outer_snr(double outer_snr) {
  ref_snr = outer_snr * std::pow(outer_radius, pathloss_exp);
}

void DynamicConfig::validate() const {
  require(inner_radius >= 1.0, "dynamic: inner_radius must be >= 1");
  require(outer_radius > inner_radius, "dynamic: outer_radius must exceed inner_radius");
  require(pathloss_exp >= 2.0, "dynamic: pathloss_exp must be >= 2");
  require(positive(ref_snr), "dynamic: ref_snr must be positive");
  require(positive(ue_intensity), "dynamic: ue_intensity must be positive");
  require(overhead >= 0.0 && std::isfinite(overhead), "dynamic: overhead must be >= 0");
  require(positive(common_bits), "dynamic: common_bits must be positive");
  require(individual_bits >= 0.0 && std::isfinite(individual_bits),
          "dynamic: individual_bits must be >= 0");
}

}  // namespace aoi
