#include "aoi/selector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "aoi/fbl.hpp"

namespace aoi::selector {

namespace {

constexpr double kAlphaFloor = 1e-9;
constexpr std::size_t kMaxBisection = 200;
constexpr std::size_t kScanPoints = 512;

template <class F>
double bisect(F&& f, double lo, double hi, double f_lo, std::size_t& iterations) {
  iterations = 0;
  double f_hi = f(hi);
  while (iterations < kMaxBisection) {
    ++iterations;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

// Both sides of the threshold equation share this shape with m the
// broadcast blocklength or the cycle length.
double side(double lead, double m, double lambda) {
  return (lead - std::exp(-lambda * m)) * m + omega(lambda * m) / (2.0 * lambda);
}

double rhs(const RemoteControlScenario& sc) {
  const double n = static_cast<double>(sc.n_ues);
  return side((2.0 * n + 1.0) / (2.0 * n), sc.cycle, sc.gen_rate);
}

struct DynamicTerms {
  double lambda;   // mean UE count
  double a;        // (1 - e^-Lambda) / Lambda
  double c_outer;  // C_D2
  double c_harm;   // C_Lambda
};

DynamicTerms dynamic_terms(const DynamicConfig& cfg) {
  cfg.validate();
  DynamicTerms t{};
  t.lambda = cfg.mean_ue_count();
  t.a = -std::expm1(-t.lambda) / t.lambda;
  t.c_outer = cfg.outer_capacity();
  if (!(t.c_outer > 0.0)) throw std::domain_error("selector: outer capacity must be positive");
  t.c_harm = fbl::harmonic_capacity(cfg);
  return t;
}

}  // namespace

void RemoteControlScenario::validate() const {
  if (n_ues < 1) throw std::invalid_argument("scenario: n_ues must be >= 1");
  if (!(gen_rate > 0.0) || !std::isfinite(gen_rate))
    throw std::invalid_argument("scenario: gen_rate must be positive");
  if (!(cycle > 0.0) || !std::isfinite(cycle))
    throw std::invalid_argument("scenario: cycle must be positive");
  if (!(tx_ratio > 0.0 && tx_ratio <= 1.0))
    throw std::invalid_argument("scenario: tx_ratio must lie in (0, 1]");
}

RemoteControlScenario RemoteControlScenario::from_system(const SystemConfig& cfg) {
  cfg.validate();
  for (std::size_t k = 1; k < cfg.n_ues(); ++k) {
    if (cfg.ue_blocklength[k] != cfg.ue_blocklength[0])
      throw std::invalid_argument("scenario: UEs must share one blocklength");
  }
  RemoteControlScenario sc;
  sc.n_ues = cfg.n_ues();
  sc.gen_rate = cfg.gen_rate;
  sc.cycle = cfg.cycle_length();
  sc.tx_ratio = cfg.tx_ratio(0);
  return sc;
}

double omega(double w) {
  if (w == 0.0) return 0.0;
  const double decay = std::exp(-w);
  const double a = -std::expm1(-w);  // 1 - e^-w
  return decay * (2.0 * a - w) / (1.0 + w - a);
}

double alpha_residual(const RemoteControlScenario& sc, double alpha) {
  return side(1.5, alpha * sc.tx_ratio * sc.cycle, sc.gen_rate) - rhs(sc);
}

AlphaThreshold alpha_threshold(const RemoteControlScenario& sc) {
  sc.validate();
  const double rhs_value = rhs(sc);
  auto f = [&](double alpha) {
    return side(1.5, alpha * sc.tx_ratio * sc.cycle, sc.gen_rate) - rhs_value;
  };
  const double upper = std::max(1.0, 1.0 / sc.tx_ratio);

  AlphaThreshold out;
  double prev_x = kAlphaFloor;
  double prev_f = f(prev_x);
  if (prev_f == 0.0) out.roots.push_back(prev_x);
  for (std::size_t i = 1; i <= kScanPoints; ++i) {
    const double x = kAlphaFloor + (upper - kAlphaFloor) * static_cast<double>(i) /
                                       static_cast<double>(kScanPoints);
    const double fx = f(x);
    if (fx == 0.0) {
      out.roots.push_back(x);
    } else if (prev_f != 0.0 && (fx < 0.0) != (prev_f < 0.0)) {
      std::size_t it = 0;
      out.roots.push_back(bisect(f, prev_x, x, prev_f, it));
      out.iterations = std::max(out.iterations, it);
    }
    prev_x = x;
    prev_f = fx;
  }
  // A root sitting on the bracket end (N = 1 puts it exactly at 1/rho)
  // may miss zero by rounding and show no sign change.
  if (out.roots.empty()) {
    const double tol = 1e-12 * std::max(1.0, std::abs(rhs_value));
    if (std::abs(f(upper)) <= tol) out.roots.push_back(upper);
    else if (std::abs(f(kAlphaFloor)) <= tol) out.roots.push_back(kAlphaFloor);
  }
  out.multiple_roots = out.roots.size() > 1;

  if (!out.roots.empty()) {
    out.value = out.roots.front();
    out.dominance = Dominance::Threshold;
  } else if (f(kAlphaFloor) > 0.0) {
    out.value = kAlphaFloor;
    out.dominance = Dominance::UnicastAlways;
  } else {
    out.value = upper;
    out.dominance = Dominance::BroadcastAlways;
  }
  out.exceeds_one = out.value > 1.0;
  out.residual = f(out.value);
  return out;
}

AlphaLimits alpha_threshold_limits(const RemoteControlScenario& sc) {
  sc.validate();
  const double n = static_cast<double>(sc.n_ues);
  AlphaLimits lim;
  lim.zero_waiting = (2.0 * n + 1.0) / (3.0 * n * sc.tx_ratio);
  lim.sporadic = (n + 1.0) / (2.0 * n * sc.tx_ratio);
  lim.zero_waiting_exceeds_one = lim.zero_waiting > 1.0;
  lim.sporadic_exceeds_one = lim.sporadic > 1.0;
  return lim;
}

double expected_aoi_broadcast(const DynamicConfig& cfg) {
  cfg.validate();
  const double lambda = cfg.mean_ue_count();
  const double c = cfg.outer_capacity();
  if (!(c > 0.0)) throw std::domain_error("selector: outer capacity must be positive");
  return 1.5 / c * (-std::expm1(-lambda) * cfg.common_bits + lambda * cfg.individual_bits);
}

double expected_aoi_unicast(const DynamicConfig& cfg) {
  const DynamicTerms t = dynamic_terms(cfg);
  return (-std::expm1(-t.lambda) / 2.0 + t.lambda) *
         ((cfg.common_bits + cfg.individual_bits) / t.c_harm + cfg.overhead);
}

BetaThreshold beta_threshold(const DynamicConfig& cfg) {
  const DynamicTerms t = dynamic_terms(cfg);
  // Everything below is divided by Lambda so that Lambda -> 0 stays finite.
  const double b = 2.0 + t.a;  // (2 Lambda + 1 - e^-Lambda) / Lambda
  const double num = b / t.c_harm - 3.0 * t.a / t.c_outer + b * cfg.overhead / cfg.common_bits;
  const double den = 3.0 / t.c_outer - b / t.c_harm;

  BetaThreshold out;
  out.denominator = den * t.lambda;
  if (den > 0.0) {
    out.value = num / den;
    out.dominance = out.value < 0.0 ? BetaDominance::UnicastAlways : BetaDominance::Threshold;
  } else if (den == 0.0) {
    // The AoI difference does not depend on beta; its sign is -num.
    out.value = 0.0;
    out.dominance = num >= 0.0 ? BetaDominance::BroadcastAlways : BetaDominance::UnicastAlways;
  } else {
    out.value = num / den;
    out.dominance = out.value <= 0.0 ? BetaDominance::BroadcastAlways : BetaDominance::Reversed;
  }
  return out;
}

double beta_threshold_large_population(const DynamicConfig& cfg) {
  const double c_outer = cfg.outer_capacity();
  const double c_harm = fbl::harmonic_capacity(cfg);
  return 2.0 * c_outer / (3.0 * c_harm - 2.0 * c_outer);
}

}  // namespace aoi::selector
