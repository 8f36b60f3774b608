#include "aoi/fbl.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aoi::fbl {

void LinkBudget::validate() const {
  if (!(snr > 0.0) || !std::isfinite(snr))
    throw std::invalid_argument("link: snr must be positive, got " + std::to_string(snr));
  if (!(info_bits >= 1.0) || !std::isfinite(info_bits))
    throw std::invalid_argument("link: info_bits must be >= 1, got " + std::to_string(info_bits));
  if (!(blocklength >= 1.0) || !std::isfinite(blocklength))
    throw std::invalid_argument("link: blocklength must be >= 1, got " +
                                std::to_string(blocklength));
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double capacity(double snr) { return 0.5 * std::log2(1.0 + snr); }

BlockErrorRate block_error_rate(const LinkBudget& link, DispersionForm form) {
  link.validate();
  const double g = link.snr;
  const double m = link.blocklength;
  const double inv = form == DispersionForm::AsPrinted ? 1.0 / (1.0 + g * g)
                                                       : 1.0 / ((1.0 + g) * (1.0 + g));
  const double dispersion = std::numbers::log2e * std::sqrt((1.0 - inv) / (2.0 * m));
  const double arg = (capacity(g) - link.rate()) / dispersion;
  return {q_function(arg), m < kTightBlocklength};
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// E1(z), z > 0.  Series for small z, modified Lentz continued fraction
// otherwise.
double exp_integral_e1(double z) {
  if (z <= 1.0) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= -z / k;
      const double add = -term / k;
      sum += add;
      if (std::abs(add) < kEps * std::abs(sum)) break;
    }
    return -std::numbers::egamma - std::log(z) + sum;
  }
  constexpr double tiny = 1e-300;
  double b = z + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h * std::exp(-z);
}

double exp_integral_ei_positive(double x) {
  if (x <= 40.0) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 2000; ++k) {
      term *= x / k;
      const double add = term / k;
      sum += add;
      if (add < kEps * sum) break;
    }
    return std::numbers::egamma + std::log(x) + sum;
  }
  // Asymptotic: e^x/x * sum k!/x^k, truncated at the smallest term.
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k < 40; ++k) {
    const double next = term * k / x;
    if (next > term) break;
    term = next;
    sum += term;
    if (term < kEps * sum) break;
  }
  return std::exp(x) / x * sum;
}

}  // namespace

double exp_integral_ei(double x) {
  if (x == 0.0) throw std::domain_error("exp_integral_ei: logarithmic singularity at x = 0");
  if (std::isnan(x)) throw std::domain_error("exp_integral_ei: argument is NaN");
  return x < 0.0 ? -exp_integral_e1(-x) : exp_integral_ei_positive(x);
}

double approx_capacity_at(const DynamicConfig& cfg, double distance) {
  return capacity(cfg.ref_snr) - 0.5 * cfg.pathloss_exp * std::log2(distance);
}

double harmonic_capacity(const DynamicConfig& cfg) {
  cfg.validate();
  const double c0 = capacity(cfg.ref_snr);
  const double u_inner = approx_capacity_at(cfg, cfg.inner_radius);
  const double u_outer = approx_capacity_at(cfg, cfg.outer_radius);
  if (!(u_outer > 0.0))
    throw std::domain_error("harmonic_capacity: high-SNR approximation invalid at outer radius");

  const double eta = cfg.pathloss_exp;
  const double ln2 = std::numbers::ln2;
  const double x1 = -(4.0 / eta) * u_inner * ln2;
  const double x2 = -(4.0 / eta) * u_outer * ln2;
  const double area = cfg.outer_radius * cfg.outer_radius - cfg.inner_radius * cfg.inner_radius;

  // 2^{2 + 4 C0/eta} grows fast; keep it in log space and fold it into
  // the Ei difference, which is of order e^{x2}.
  const double ei_diff = exp_integral_ei(x1) - exp_integral_ei(x2);
  const double log_scale = (2.0 + 4.0 * c0 / eta) * ln2;
  const double inv_c = std::exp(log_scale + std::log(ln2 * ei_diff) - std::log(area * eta));
  return 1.0 / inv_c;
}

}  // namespace aoi::fbl
