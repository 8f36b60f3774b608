#include "aoi/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aoi::stats {

double student_t_quantile(double p, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, p);
}

Summary summarize(std::span<const double> samples, double confidence) {
  if (samples.empty()) throw std::invalid_argument("summarize: no samples");
  Summary s;
  s.count = samples.size();
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count == 1) {
    s.ci_half_width = std::numeric_limits<double>::infinity();
    return s;
  }
  double ss = 0.0;
  for (double v : samples) ss += (v - s.mean) * (v - s.mean);
  const double dof = static_cast<double>(s.count - 1);
  const double sd = std::sqrt(ss / dof);
  const double t = student_t_quantile(0.5 + confidence / 2.0, dof);
  s.ci_half_width = t * sd / std::sqrt(static_cast<double>(s.count));
  return s;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

}  // namespace aoi::stats
