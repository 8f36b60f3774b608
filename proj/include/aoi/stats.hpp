#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace aoi::stats {

// Mean with a two-sided Student-t confidence half-width.  With a single
// sample the half-width is +infinity.
struct Summary {
  double mean = 0.0;
  double ci_half_width = 0.0;
  std::size_t count = 0;
};

Summary summarize(std::span<const double> samples, double confidence = 0.95);

double student_t_quantile(double p, double dof);

// Seed splitting: stream i of master seed s is splitmix64(s + (i + 1) * golden),
// so every replication can be reproduced on its own.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

}  // namespace aoi::stats
