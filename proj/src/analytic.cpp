#include "aoi/analytic.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace aoi::analytic {

namespace {

// Below this value of lambda * M_T the ratio helpers switch to series.
constexpr double kSeriesThreshold = 1e-8;

void check_inputs(std::span<const double> serving, double gen_rate, double eps, std::size_t ue) {
  if (serving.empty()) throw std::invalid_argument("analytic: no UEs");
  if (ue >= serving.size())
    throw std::invalid_argument("analytic: ue index " + std::to_string(ue) + " out of range");
  for (double m : serving)
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::invalid_argument("analytic: serving times must be positive");
  if (!(gen_rate > 0.0) || !std::isfinite(gen_rate))
    throw std::invalid_argument("analytic: gen_rate must be positive");
  if (!(eps >= 0.0) || std::isnan(eps))
    throw std::invalid_argument("analytic: block error rate must be >= 0");
  if (eps >= kDivergenceThreshold)
    throw DivergentAoi("divergent AoI: block error rate " + std::to_string(eps) + " too close to 1");
}

double one_minus_exp(double x) { return -std::expm1(-x); }

// (1 - e^{-x}) / (1 - e^{-y}) for 0 <= x, y > 0.
double exp_ratio(double x, double y) {
  if (y < kSeriesThreshold) {
    const double num = 1.0 - x / 2.0 + x * x / 6.0;
    const double den = 1.0 - y / 2.0 + y * y / 6.0;
    return (x / y) * (num / den);
  }
  return one_minus_exp(x) / one_minus_exp(y);
}

double error_factor(double eps) { return (1.0 + eps) / (2.0 * (1.0 - eps)); }

// The preemptive forms grow like e^{lambda M}; past the double range the
// closed form turns into inf or inf - inf.
double finite_aoi(double value) {
  if (!std::isfinite(value) || !(value > 0.0))
    throw DivergentAoi("analytic: average AoI exceeds the floating-point range");
  return value;
}

double total(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// M'_{k_n}: the k-th UE served after U_n, k = 1..N, wrapping cyclically
// so that k = N is U_n itself.
double cyclic(std::span<const double> serving, std::size_t ue, std::size_t k) {
  return serving[(ue + k) % serving.size()];
}

}  // namespace

double dnp(std::span<const double> serving, double gen_rate, double eps, std::size_t ue) {
  check_inputs(serving, gen_rate, eps, ue);
  const double lam = gen_rate;
  const double mt = total(serving);
  const double e = std::exp(-lam * mt);
  const double a = one_minus_exp(lam * mt);
  double tail = 0.0;
  for (std::size_t k = ue + 1; k < serving.size(); ++k) tail += serving[k];

  return error_factor(eps) * (mt + e / lam) + (2.0 * e - e * e) / (2.0 * lam * (lam * mt + e)) -
         tail + (1.0 / lam + mt) * a;
}

double dpb(std::span<const double> serving, double gen_rate, double eps, std::size_t ue) {
  check_inputs(serving, gen_rate, eps, ue);
  const std::size_t n = serving.size();
  const double lam = gen_rate;
  const double mt = total(serving);
  const double e = std::exp(-lam * mt);
  const double a = one_minus_exp(lam * mt);

  double xi_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) xi_sum += exp_ratio(lam * cyclic(serving, ue, k), lam * mt);
  const double xi = e / lam * xi_sum;

  // sum_{k=1}^{N} M'_{k_n} e^{-lam M_T}(1 - e^{-lam sum_{kappa=k}^{N-1} M'_{kappa_n}}) / (1 - e^{-lam M_T})
  double pending = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    double inner = 0.0;
    for (std::size_t kk = k; kk + 1 <= n; ++kk) inner += cyclic(serving, ue, kk);
    pending += cyclic(serving, ue, k) * e * exp_ratio(lam * inner, lam * mt);
  }

  return error_factor(eps) * (mt + xi) + a / lam +
         xi * (2.0 - lam * xi) / (2.0 * lam * (mt + xi)) - pending + serving[ue] * a;
}

namespace {

// E[S_j] = E[T_j] under DPS:
// sum_k M'_{k_n} (e^{-lam sum_{kappa=k+1}^N M'_{kappa_n}} - e^{-lam M_T}) / (1 - e^{-lam M_T})
double dps_service(std::span<const double> serving, double lam, std::size_t ue) {
  const std::size_t n = serving.size();
  const double mt = total(serving);
  double out = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    double after = 0.0;
    for (std::size_t kk = k + 1; kk <= n; ++kk) after += cyclic(serving, ue, kk);
    out += cyclic(serving, ue, k) * std::exp(-lam * after) * exp_ratio(lam * (mt - after), lam * mt);
  }
  return out;
}

}  // namespace

double dps(std::span<const double> serving, double gen_rate, double eps, std::size_t ue) {
  check_inputs(serving, gen_rate, eps, ue);
  const std::size_t n = serving.size();
  const double lam = gen_rate;
  const double mt = total(serving);
  const double e = std::exp(-lam * mt);
  const double a = one_minus_exp(lam * mt);

  // r_k = p_k / (1 - p_k) with p_k = 1 - e^{-lam M'_{k_n}}
  std::vector<double> r(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) r[k] = std::expm1(lam * cyclic(serving, ue, k));
  double r_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) r_sum += r[k];
  const double r_over_a = r_sum / a;
  const double psi = e * r_over_a;

  const double first = (1.0 + eps) / (2.0 * lam * (1.0 - eps)) * r_over_a;
  const double second = dps_service(serving, lam, ue);

  const double lam2 = lam * lam;
  double bracket = psi * (2.0 - psi) / lam2;
  for (std::size_t k = 1; k <= n; ++k) {
    const double m = cyclic(serving, ue, k);
    bracket += r[k] * (2.0 + r[k]) / lam2 - 2.0 * m * (1.0 + r[k]) / lam;
  }
  double cross = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    double inner = 0.0;
    for (std::size_t kk = 1; kk < k; ++kk) inner += r[kk] / lam - cyclic(serving, ue, kk);
    cross += r[k] * inner;
  }
  bracket -= 2.0 * (e / a) * cross;
  const double third = lam * e / (2.0 * psi) * bracket;

  return finite_aoi(first + second + third);
}

double dnp_zero_wait(std::span<const double> serving, double eps, std::size_t ue) {
  check_inputs(serving, 1.0, eps, ue);
  const double mt = total(serving);
  double tail = 0.0;
  for (std::size_t k = ue + 1; k < serving.size(); ++k) tail += serving[k];
  return error_factor(eps) * mt + mt - tail;
}

double dpb_zero_wait(std::span<const double> serving, double eps, std::size_t ue) {
  check_inputs(serving, 1.0, eps, ue);
  return error_factor(eps) * total(serving) + serving[ue];
}

double brnp(double eps, double gen_rate, double blocklength) {
  const double m[] = {blocklength};
  check_inputs(m, gen_rate, eps, 0);
  const double lam = gen_rate;
  const double e = std::exp(-lam * blocklength);
  return error_factor(eps) * (blocklength + e / lam) +
         (2.0 * e - e * e) / (2.0 * (lam * lam * blocklength + lam * e)) +
         (1.0 / lam + blocklength) * one_minus_exp(lam * blocklength);
}

double brps(double eps, double gen_rate, double blocklength) {
  const double m[] = {blocklength};
  check_inputs(m, gen_rate, eps, 0);
  return finite_aoi(std::exp(gen_rate * blocklength) / (gen_rate * (1.0 - eps)));
}

double ue_error_rate(const SystemConfig& cfg, Strategy strategy, std::size_t ue) {
  if (ue >= cfg.n_ues())
    throw std::invalid_argument("analytic: ue index " + std::to_string(ue) + " out of range");
  if (!cfg.error_override.empty()) return cfg.error_override.at(ue);
  fbl::LinkBudget link;
  link.snr = cfg.ue_snr[ue];
  if (is_broadcast(strategy)) {
    link.info_bits = cfg.broadcast_bits;
    link.blocklength = cfg.broadcast_blocklength;
  } else {
    link.info_bits = cfg.ue_bits[ue];
    link.blocklength = cfg.ue_blocklength[ue];
  }
  return fbl::block_error_rate(link, cfg.dispersion).value;
}

namespace {

double resolve_eps(const SystemConfig& cfg, Strategy s, std::size_t ue, std::optional<double> eps) {
  cfg.validate();
  return eps ? *eps : ue_error_rate(cfg, s, ue);
}

}  // namespace

double aoi_dnp(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps) {
  const double e = resolve_eps(cfg, Strategy::DNP, ue, eps);
  return dnp(cfg.serving_times(), cfg.gen_rate, e, ue);
}

double aoi_dpb(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps) {
  const double e = resolve_eps(cfg, Strategy::DPB, ue, eps);
  return dpb(cfg.serving_times(), cfg.gen_rate, e, ue);
}

double aoi_dps(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps) {
  const double e = resolve_eps(cfg, Strategy::DPS, ue, eps);
  return dps(cfg.serving_times(), cfg.gen_rate, e, ue);
}

double aoi_dnp_zero_wait(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps) {
  const double e = resolve_eps(cfg, Strategy::DNP, ue, eps);
  return dnp_zero_wait(cfg.serving_times(), e, ue);
}

double aoi_dpb_zero_wait(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps) {
  const double e = resolve_eps(cfg, Strategy::DPB, ue, eps);
  return dpb_zero_wait(cfg.serving_times(), e, ue);
}

double aoi_brnp(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps) {
  const double e = resolve_eps(cfg, Strategy::BRNP, ue, eps);
  return brnp(e, cfg.gen_rate, cfg.broadcast_blocklength);
}

double aoi_brps(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps) {
  const double e = resolve_eps(cfg, Strategy::BRPS, ue, eps);
  return brps(e, cfg.gen_rate, cfg.broadcast_blocklength);
}

double aoi_brnp(const fbl::LinkBudget& link, double gen_rate, DispersionForm form) {
  return brnp(fbl::block_error_rate(link, form).value, gen_rate, link.blocklength);
}

double aoi_brps(const fbl::LinkBudget& link, double gen_rate, DispersionForm form) {
  return brps(fbl::block_error_rate(link, form).value, gen_rate, link.blocklength);
}

double ue_aoi(const SystemConfig& cfg, Strategy strategy, std::size_t ue) {
  switch (strategy) {
    case Strategy::BRNP: return aoi_brnp(cfg, ue);
    case Strategy::BRPS: return aoi_brps(cfg, ue);
    case Strategy::DNP: return aoi_dnp(cfg, ue);
    case Strategy::DPB: return aoi_dpb(cfg, ue);
    case Strategy::DPS: return aoi_dps(cfg, ue);
  }
  throw std::invalid_argument("analytic: unknown strategy");
}

std::vector<double> per_ue_aoi(const SystemConfig& cfg, Strategy strategy) {
  std::vector<double> out(cfg.n_ues());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = ue_aoi(cfg, strategy, k);
  return out;
}

double system_average(std::span<const double> per_ue) {
  if (per_ue.empty()) throw std::invalid_argument("system_average: empty list");
  return total(per_ue) / static_cast<double>(per_ue.size());
}

double system_aoi(const SystemConfig& cfg, Strategy strategy) {
  const auto v = per_ue_aoi(cfg, strategy);
  return system_average(v);
}

RenewalDiagnostics dnp_renewals(std::span<const double> serving, double gen_rate, double eps,
                                std::size_t ue) {
  check_inputs(serving, gen_rate, eps, ue);
  const double lam = gen_rate;
  const double mt = total(serving);
  const double e = std::exp(-lam * mt);
  const double a = one_minus_exp(lam * mt);

  RenewalDiagnostics d;
  for (std::size_t k = 0; k <= ue; ++k) d.mean_s += serving[k];
  d.mean_w = a / lam - mt * e;
  d.mean_t = d.mean_s + d.mean_w;
  const double b = mt + e / lam;                       // E[B] = M_T + E[V]
  const double var_v = (2.0 * e - e * e) / (lam * lam);  // Var[V]
  d.mean_y = b / (1.0 - eps);
  d.mean_y2 = b * b * (1.0 + eps) / ((1.0 - eps) * (1.0 - eps)) + var_v / (1.0 - eps);
  d.mean_attempts = 1.0 / (1.0 - eps);
  return d;
}

RenewalDiagnostics dpb_renewals(std::span<const double> serving, double gen_rate, double eps,
                                std::size_t ue) {
  check_inputs(serving, gen_rate, eps, ue);
  const std::size_t n = serving.size();
  const double lam = gen_rate;
  const double mt = total(serving);
  const double e = std::exp(-lam * mt);
  const double a = one_minus_exp(lam * mt);

  RenewalDiagnostics d;
  d.mean_w = a / lam - cyclic(serving, ue, n) * e;
  for (std::size_t k = 1; k <= n; ++k) {
    double inner = 0.0;
    for (std::size_t kk = k; kk + 1 <= n; ++kk) inner += cyclic(serving, ue, kk);
    const double m = cyclic(serving, ue, k);
    if (k < n) d.mean_w -= m * std::exp(-lam * inner);
    // (e^{-lam inner} - e^{-lam M_T}) / (1 - e^{-lam M_T})
    d.mean_s += m * std::exp(-lam * inner) * exp_ratio(lam * (mt - inner), lam * mt);
  }
  d.mean_t = d.mean_w + d.mean_s;

  double xi_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) xi_sum += exp_ratio(lam * cyclic(serving, ue, k), lam * mt);
  const double xi = e / lam * xi_sum;
  d.mean_y = (mt + xi) / (1.0 - eps);
  d.mean_y2 = (1.0 + eps) / ((1.0 - eps) * (1.0 - eps)) * (mt + xi) * (mt + xi) +
              xi * (2.0 - lam * xi) / (lam * (1.0 - eps));
  d.mean_attempts = 1.0 / (1.0 - eps);
  return d;
}

RenewalDiagnostics dps_renewals(std::span<const double> serving, double gen_rate, double eps,
                                std::size_t ue) {
  check_inputs(serving, gen_rate, eps, ue);
  const double lam = gen_rate;
  const double mt = total(serving);
  const double a = one_minus_exp(lam * mt);

  RenewalDiagnostics d;
  d.mean_w = 0.0;
  d.mean_s = dps_service(serving, lam, ue);
  d.mean_t = d.mean_s;
  double r_sum = 0.0;
  for (double m : serving) r_sum += std::expm1(lam * m);
  d.mean_y = r_sum / (lam * (1.0 - eps) * a);
  d.mean_y2 = 2.0 * d.mean_y * (dps(serving, gen_rate, eps, ue) - d.mean_t);
  d.mean_attempts = 1.0 / (1.0 - eps);
  return d;
}

RenewalDiagnostics renewal_diagnostics(const SystemConfig& cfg, Strategy strategy, std::size_t ue,
                                       std::optional<double> eps) {
  const double e = resolve_eps(cfg, strategy, ue, eps);
  if (is_broadcast(strategy)) {
    const double m[] = {cfg.broadcast_blocklength};
    return strategy == Strategy::BRNP ? dnp_renewals(m, cfg.gen_rate, e, 0)
                                      : dps_renewals(m, cfg.gen_rate, e, 0);
  }
  const auto serving = cfg.serving_times();
  switch (strategy) {
    case Strategy::DNP: return dnp_renewals(serving, cfg.gen_rate, e, ue);
    case Strategy::DPB: return dpb_renewals(serving, cfg.gen_rate, e, ue);
    default: return dps_renewals(serving, cfg.gen_rate, e, ue);
  }
}

}  // namespace aoi::analytic
