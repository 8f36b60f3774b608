#pragma once

#include <cstddef>
#include <vector>

#include "aoi/types.hpp"

// Choosing between broadcast and unicast transmission.
//
// Remote control: N homogeneous UEs, one broadcast packet of relative size
// alpha versus N unicast packets, both non-preemptive.  Block errors are
// assumed negligible.
//
// Dynamic system: UEs drawn from a PPP on an annulus, zero-waiting, with a
// common payload L_co and an individual payload L_id per UE.
namespace aoi::selector {

struct RemoteControlScenario {
  std::size_t n_ues = 1;
  double gen_rate = 1.0;   // lambda
  double cycle = 1.0;      // M_T = N (M_L + M_h)
  double tx_ratio = 1.0;   // rho = M_h / (M_L + M_h)

  void validate() const;

  static RemoteControlScenario from_system(const SystemConfig& cfg);
};

// (2e^{-w} - e^{-2w}) / (w + e^{-w}) - e^{-w}, rearranged so that small w
// does not cancel.  omega(0) == 0 exactly.
double omega(double w);

// LHS(alpha) - RHS of the threshold equation.  Negative means the
// broadcast scheme has the lower AoI at this alpha.
double alpha_residual(const RemoteControlScenario& sc, double alpha);

enum class Dominance {
  Threshold,        // a root was found
  BroadcastAlways,  // broadcast better for every alpha in the bracket
  UnicastAlways,    // unicast better for every alpha in the bracket
};

struct AlphaThreshold {
  double value = 0.0;
  Dominance dominance = Dominance::Threshold;
  bool exceeds_one = false;   // the root lies in (1, 1/rho]
  bool multiple_roots = false;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::vector<double> roots;  // every sign change found on the scan grid
};

// Bisection on (1e-9, 1], widened to (1e-9, 1/rho] when no root lies
// below one.  Without a root, value is the saturating bracket end.
AlphaThreshold alpha_threshold(const RemoteControlScenario& sc);

struct AlphaLimits {
  double zero_waiting = 0.0;  // (2N+1) / (3 N rho)
  double sporadic = 0.0;      // (N+1) / (2 N rho)
  bool zero_waiting_exceeds_one = false;
  bool sporadic_exceeds_one = false;
};

AlphaLimits alpha_threshold_limits(const RemoteControlScenario& sc);

// Approximate expected average AoI of the two dynamic schemes.  Both
// throw std::domain_error when the outer-radius capacity is not positive.
double expected_aoi_broadcast(const DynamicConfig& cfg);
double expected_aoi_unicast(const DynamicConfig& cfg);

enum class BetaDominance {
  Threshold,        // broadcast preferred iff beta <= value
  BroadcastAlways,  // for every beta >= 0
  UnicastAlways,    // for every beta >= 0
  Reversed,         // denominator < 0: broadcast preferred iff beta >= value
};

struct BetaThreshold {
  double value = 0.0;
  BetaDominance dominance = BetaDominance::Threshold;
  double denominator = 0.0;  // 3 Lambda / C_D2 - (2 Lambda + 1 - e^-Lambda) / C_Lambda
};

// Threshold on beta = L_id / L_co.  cfg.individual_bits is ignored.
BetaThreshold beta_threshold(const DynamicConfig& cfg);

// Many-UE approximation 2 C_D2 / (3 C_Lambda - 2 C_D2), overhead ignored.
double beta_threshold_large_population(const DynamicConfig& cfg);

}  // namespace aoi::selector
