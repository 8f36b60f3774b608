#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aoi {

// Time is measured in channel uses throughout.

enum class Strategy { BRNP, BRPS, DNP, DPB, DPS };

inline constexpr Strategy kAllStrategies[] = {Strategy::BRNP, Strategy::BRPS, Strategy::DNP,
                                              Strategy::DPB, Strategy::DPS};

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

constexpr bool is_broadcast(Strategy s) { return s == Strategy::BRNP || s == Strategy::BRPS; }

// Which variant of the dispersion term to use in the block error rate.
// AsPrinted keeps 1 - 1/(1 + snr^2); Squared uses 1 - 1/(1 + snr)^2.
enum class DispersionForm { AsPrinted, Squared };

// Raised when the block error rate is so close to one that the mean AoI
// is unbounded (or would overflow into a meaningless number).
class DivergentAoi : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// One base station serving N UEs.  Unicast fields are per UE; the
// broadcast packet carries broadcast_bits in broadcast_blocklength.
struct SystemConfig {
  double gen_rate = 0.0;                // lambda
  std::vector<double> ue_bits;          // L_n
  std::vector<double> ue_blocklength;   // M_n
  std::vector<double> ue_snr;           // gamma_n, linear
  double overhead = 0.0;                // M_L, per-UE pre-processing time
  double broadcast_bits = 0.0;          // L
  double broadcast_blocklength = 0.0;   // M
  DispersionForm dispersion = DispersionForm::AsPrinted;
  // Forces the per-UE block error rate (same value for the broadcast and
  // unicast link of a UE).  Empty means "derive from the link budget".
  std::vector<double> error_override;

  std::size_t n_ues() const { return ue_bits.size(); }
  // M_k' = M_k + M_L
  double serving_time(std::size_t ue) const { return ue_blocklength.at(ue) + overhead; }
  std::vector<double> serving_times() const;
  // M_T, the length of one unicast pass over all UEs.
  double cycle_length() const;
  // alpha = L / sum L_n
  double info_ratio() const;
  // rho_n = M_n / (M_L + M_n)
  double tx_ratio(std::size_t ue) const { return ue_blocklength.at(ue) / serving_time(ue); }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  // N identical UEs at coding rate R.  The broadcast packet carries
  // alpha * N * bits and is sent at the same rate.
  static SystemConfig homogeneous(std::size_t n_ues, double gen_rate, double bits_per_ue,
                                  double coding_rate, double snr, double overhead,
                                  double alpha = 1.0);
};

// Intermediate renewal quantities for one UE.  Closed forms come from
// analytic::renewal_diagnostics, measured ones from sim::measure_renewals.
struct RenewalDiagnostics {
  double mean_t = 0.0;         // E[T_j], generation to reception
  double mean_w = 0.0;         // E[W_j], buffer waiting
  double mean_s = 0.0;         // E[S_j], service start to reception
  double mean_y = 0.0;         // E[Y_j], inter-reception time
  double mean_y2 = 0.0;        // E[Y_j^2]
  double mean_attempts = 0.0;  // E[H_j]

  // E[Y^2] / (2 E[Y]) + E[T]
  double renewal_aoi() const { return mean_y2 / (2.0 * mean_y) + mean_t; }
};

struct UeEstimate {
  double mean = 0.0;
  double ci_half_width = 0.0;
};

// A mean AoI with its 95% confidence half-width.
struct AoiEstimate {
  double mean = 0.0;
  double ci_half_width = 0.0;
  std::size_t replications = 0;
  std::vector<UeEstimate> per_ue;
};

// Dynamic system: UEs form a Poisson point process on an annulus around
// the base station.
struct DynamicConfig {
  double ue_intensity = 0.0;    // lambda_UE, UEs per unit area
  double inner_radius = 1.0;    // D1
  double outer_radius = 2.0;    // D2
  double pathloss_exp = 2.0;    // eta
  double ref_snr = 1.0;         // gamma0, SNR at unit distance
  double overhead = 0.0;        // M_L
  double common_bits = 0.0;     // L_co
  double individual_bits = 0.0; // L_id

  // Lambda = lambda_UE * pi * (D2^2 - D1^2)
  double mean_ue_count() const;
  double snr_at(double distance) const;
  double beta() const { return individual_bits / common_bits; }
  // C_{D2} = 1/2 log2(1 + gamma_{D2}), the broadcast rate.
  double outer_capacity() const;
  double inner_capacity() const;

  void validate() const;

  // Picks gamma0 so that the SNR at the outer radius equals outer_snr.
  void set_outer_snr(double outer_snr);
};

}  // namespace aoi
