#pragma once

#include "aoi/types.hpp"

namespace aoi::fbl {

// Block errors are only well approximated by the normal approximation
// above this blocklength.
inline constexpr double kTightBlocklength = 100.0;

struct LinkBudget {
  double snr = 1.0;          // gamma, linear
  double info_bits = 1.0;    // l
  double blocklength = 1.0;  // m, channel uses

  double rate() const { return info_bits / blocklength; }
  void validate() const;
};

struct BlockErrorRate {
  double value = 0.0;
  // Set when m < 100, where the approximation is loose.
  bool short_blocklength = false;
};

// P[Z > x] for a standard normal Z.
double q_function(double x);

// 1/2 log2(1 + snr)
double capacity(double snr);

// Normal-approximation block error rate of an AWGN link.
BlockErrorRate block_error_rate(const LinkBudget& link,
                                DispersionForm form = DispersionForm::AsPrinted);

// Ei(x) = -PV int_{-x}^inf e^{-t}/t dt.  Throws std::domain_error at x = 0.
double exp_integral_ei(double x);

// High-SNR capacity at distance d: C0 - (eta/2) log2 d with
// C0 = 1/2 log2(1 + gamma0).
double approx_capacity_at(const DynamicConfig& cfg, double distance);

// C_Lambda, defined by 1/C_Lambda = E[1/C_n] for a UE placed uniformly
// over the annulus, in closed form through Ei.
double harmonic_capacity(const DynamicConfig& cfg);

}  // namespace aoi::fbl
