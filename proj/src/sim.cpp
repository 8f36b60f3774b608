#include "aoi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>

#include <fmt/format.h>

#include "aoi/analytic.hpp"
#include "aoi/parallel.hpp"
#include "aoi/stats.hpp"

namespace aoi::sim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Generate: return "generate";
    case EventKind::ServeStart: return "serve_start";
    case EventKind::ServeEndOk: return "serve_end_ok";
    case EventKind::ServeEndFail: return "serve_end_fail";
    case EventKind::Preempt: return "preempt";
    case EventKind::Idle: return "idle";
  }
  return "?";
}

void write_trace(std::ostream& out, std::span<const TraceEvent> trace) {
  for (const auto& ev : trace)
    out << fmt::format("{:.17g} {} {} {}\n", ev.time, to_string(ev.kind), ev.ue, ev.update_id);
}

void SimRun::validate() const {
  cfg.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("sim: horizon must be positive");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 0.5))
    throw std::invalid_argument("sim: warmup_fraction must lie in [0, 0.5]");
  if (replications < 1) throw std::invalid_argument("sim: replications must be >= 1");
}

RenewalDiagnostics RenewalSums::means() const {
  RenewalDiagnostics d;
  if (count == 0) return d;
  const double n = static_cast<double>(count);
  d.mean_y = y / n;
  d.mean_y2 = y2 / n;
  d.mean_t = t / n;
  d.mean_w = w / n;
  d.mean_s = s / n;
  d.mean_attempts = attempts / n;
  return d;
}

double MeasuredRenewals::exact_renewal_aoi() const {
  return (mean.mean_y2 / 2.0 + mean_y_t_prev) / mean.mean_y;
}

std::vector<double> error_rates(const SystemConfig& cfg, Strategy strategy) {
  std::vector<double> out(cfg.n_ues());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = analytic::ue_error_rate(cfg, strategy, k);
  return out;
}

namespace {

enum class Policy { NonPreemptive, PreemptInBuffer, PreemptInServing };

Policy policy_of(Strategy s) {
  switch (s) {
    case Strategy::BRNP:
    case Strategy::DNP: return Policy::NonPreemptive;
    case Strategy::DPB: return Policy::PreemptInBuffer;
    default: return Policy::PreemptInServing;
  }
}

struct Update {
  std::uint64_t id = 0;
  double generated = 0.0;
  double service_start = 0.0;
};

// Sawtooth AoI of one UE plus its renewal statistics.
class AgeTracker {
 public:
  explicit AgeTracker(double warmup) : warmup_(warmup) {}

  void record_attempt() { ++attempts_; }

  void deliver(double now, const Update& u) {
    if (u.generated <= last_generated_) return;
    integrate(now);
    if (now >= warmup_ && last_delivery_) {
      const double y = now - *last_delivery_;
      const double t = now - u.generated;
      sums_.count += 1;
      sums_.y += y;
      sums_.y2 += y * y;
      sums_.t += t;
      sums_.w += u.service_start - u.generated;
      sums_.s += now - u.service_start;
      sums_.attempts += static_cast<double>(attempts_);
      sums_.y_t_prev += y * last_system_time_;
    }
    last_delivery_ = now;
    last_system_time_ = now - u.generated;
    last_generated_ = u.generated;
    attempts_ = 0;
  }

  double time_average(double horizon) {
    integrate(horizon);
    return area_ / (horizon - warmup_);
  }

  const RenewalSums& sums() const { return sums_; }

 private:
  void integrate(double now) {
    const double from = std::max(segment_start_, warmup_);
    if (now > from)
      area_ += (now - from) * ((from - last_generated_) + (now - last_generated_)) / 2.0;
    segment_start_ = std::max(segment_start_, now);
  }

  double warmup_;
  double area_ = 0.0;
  double segment_start_ = 0.0;
  double last_generated_ = 0.0;  // Delta(0) = 0
  std::optional<double> last_delivery_;
  double last_system_time_ = 0.0;
  std::size_t attempts_ = 0;
  RenewalSums sums_;
};

class Simulator {
 public:
  Simulator(const SystemConfig& cfg, Strategy strategy, double warmup, std::uint64_t seed,
            const ReplicationOptions& options)
      : policy_(policy_of(strategy)),
        broadcast_(is_broadcast(strategy)),
        n_ues_(cfg.n_ues()),
        eps_(error_rates(cfg, strategy)),
        rng_(seed),
        arrival_(cfg.gen_rate),
        scripted_(options.scripted_arrivals),
        record_(options.record_trace) {
    if (broadcast_) {
      slot_length_.assign(1, cfg.broadcast_blocklength);
    } else {
      slot_length_ = cfg.serving_times();
    }
    position_ = slot_length_.size() - 1;
    ages_.assign(n_ues_, AgeTracker(warmup));
  }

  ReplicationResult run(double horizon) {
    next_arrival_ = draw_arrival(0.0);
    while (true) {
      const bool completion = busy_ && slot_end_ <= next_arrival_;
      const double t = completion ? slot_end_ : next_arrival_;
      if (t > horizon) break;
      now_ = t;
      if (completion)
        complete_slot();
      else
        arrive();
    }
    ReplicationResult out;
    out.generated = generated_;
    for (auto& age : ages_) {
      out.time_average.push_back(age.time_average(horizon));
      out.renewals.push_back(age.sums());
    }
    out.trace = std::move(trace_);
    return out;
  }

 private:
  double draw_arrival(double after) {
    if (!scripted_.empty()) {
      if (scripted_next_ < scripted_.size()) return scripted_[scripted_next_++];
      return std::numeric_limits<double>::infinity();
    }
    return after + arrival_(rng_);
  }

  void log(EventKind kind, std::size_t ue, std::uint64_t id) {
    if (record_) trace_.push_back({now_, kind, ue, id});
  }

  std::size_t slots() const { return slot_length_.size(); }

  template <class F>
  void for_receivers(F&& f) const {
    if (broadcast_) {
      for (std::size_t k = 0; k < n_ues_; ++k) f(k);
    } else {
      f(position_);
    }
  }

  void begin_slot() {
    slot_end_ = now_ + slot_length_[position_];
    for_receivers([&](std::size_t k) { log(EventKind::ServeStart, k + 1, current_.id); });
  }

  void start(Update u, std::size_t position) {
    current_ = u;
    current_.service_start = now_;
    remaining_ = slots();
    position_ = position;
    busy_ = true;
    begin_slot();
  }

  std::size_t next_position() const { return (position_ + 1) % slots(); }

  void complete_slot() {
    for_receivers([&](std::size_t k) {
      const bool ok = uniform_(rng_) >= eps_[k];
      log(ok ? EventKind::ServeEndOk : EventKind::ServeEndFail, k + 1, current_.id);
      ages_[k].record_attempt();
      if (ok) ages_[k].deliver(now_, current_);
    });
    --remaining_;

    if (policy_ == Policy::PreemptInBuffer && buffer_) {
      start(*buffer_, next_position());
      buffer_.reset();
    } else if (remaining_ > 0) {
      position_ = next_position();
      begin_slot();
    } else if (policy_ == Policy::NonPreemptive && buffer_) {
      start(*buffer_, next_position());
      buffer_.reset();
    } else {
      busy_ = false;
      log(EventKind::Idle, 0, current_.id);
    }
  }

  void arrive() {
    const Update u{++generated_, now_, now_};
    log(EventKind::Generate, 0, u.id);
    next_arrival_ = draw_arrival(now_);
    if (!busy_) {
      start(u, next_position());
    } else if (policy_ == Policy::PreemptInServing) {
      for_receivers([&](std::size_t k) { log(EventKind::Preempt, k + 1, current_.id); });
      start(u, position_);
    } else {
      buffer_ = u;
    }
  }

  Policy policy_;
  bool broadcast_;
  std::size_t n_ues_;
  std::vector<double> eps_;
  std::mt19937_64 rng_;
  std::exponential_distribution<double> arrival_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::vector<double> scripted_;
  std::size_t scripted_next_ = 0;
  bool record_;

  std::vector<double> slot_length_;
  std::vector<AgeTracker> ages_;
  std::vector<TraceEvent> trace_;

  double now_ = 0.0;
  double next_arrival_ = 0.0;
  double slot_end_ = 0.0;
  bool busy_ = false;
  std::size_t position_ = 0;
  std::size_t remaining_ = 0;
  Update current_;
  std::optional<Update> buffer_;
  std::uint64_t generated_ = 0;
};

double full_pass(const SystemConfig& cfg, Strategy strategy) {
  return is_broadcast(strategy) ? cfg.broadcast_blocklength : cfg.cycle_length();
}

std::vector<ReplicationResult> run_all(const SimRun& run) {
  run.validate();
  const double warmup = run.warmup_fraction * run.horizon;
  if (run.horizon - warmup < full_pass(run.cfg, run.strategy))
    throw SimulationError("insufficient horizon: observation window shorter than one service cycle");
  std::vector<ReplicationResult> results(run.replications);
  parallel_for(run.replications, run.threads, [&](std::size_t r) {
    results[r] = run_replication(run.cfg, run.strategy, run.horizon, warmup,
                                 stats::stream_seed(run.seed, r));
  });
  return results;
}

}  // namespace

ReplicationResult run_replication(const SystemConfig& cfg, Strategy strategy, double horizon,
                                  double warmup, std::uint64_t seed,
                                  const ReplicationOptions& options) {
  cfg.validate();
  if (!(warmup >= 0.0 && warmup < horizon))
    throw std::invalid_argument("sim: warmup must lie in [0, horizon)");
  Simulator sim(cfg, strategy, warmup, seed, options);
  return sim.run(horizon);
}

AoiEstimate simulate(const SimRun& run) {
  const auto results = run_all(run);
  const std::size_t n = run.cfg.n_ues();

  AoiEstimate est;
  est.replications = results.size();
  std::vector<double> system(results.size());
  std::vector<double> column(results.size());
  for (std::size_t r = 0; r < results.size(); ++r)
    system[r] = analytic::system_average(results[r].time_average);
  const auto s = stats::summarize(system);
  est.mean = s.mean;
  est.ci_half_width = s.ci_half_width;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t r = 0; r < results.size(); ++r) column[r] = results[r].time_average[k];
    const auto u = stats::summarize(column);
    est.per_ue.push_back({u.mean, u.ci_half_width});
  }
  return est;
}

MeasuredRenewals measure_renewals(const SimRun& run, std::size_t ue) {
  if (ue >= run.cfg.n_ues()) throw std::invalid_argument("sim: ue index out of range");
  const auto results = run_all(run);

  RenewalSums pooled;
  std::vector<RenewalDiagnostics> per_rep;
  std::vector<double> averages;
  for (const auto& res : results) {
    const auto& s = res.renewals[ue];
    pooled.count += s.count;
    pooled.y += s.y;
    pooled.y2 += s.y2;
    pooled.t += s.t;
    pooled.w += s.w;
    pooled.s += s.s;
    pooled.attempts += s.attempts;
    pooled.y_t_prev += s.y_t_prev;
    if (s.count > 0) per_rep.push_back(s.means());
    averages.push_back(res.time_average[ue]);
  }
  if (pooled.count < 30) throw SimulationError("insufficient renewal samples");

  MeasuredRenewals out;
  out.mean = pooled.means();
  out.mean_y_t_prev = pooled.y_t_prev / static_cast<double>(pooled.count);
  out.deliveries = pooled.count;
  const auto avg = stats::summarize(averages);
  out.time_average = avg.mean;
  out.time_average_ci = avg.ci_half_width;

  auto ci_of = [&](double RenewalDiagnostics::*field) {
    std::vector<double> v;
    for (const auto& d : per_rep) v.push_back(d.*field);
    return stats::summarize(v).ci_half_width;
  };
  out.ci_half_width.mean_t = ci_of(&RenewalDiagnostics::mean_t);
  out.ci_half_width.mean_w = ci_of(&RenewalDiagnostics::mean_w);
  out.ci_half_width.mean_s = ci_of(&RenewalDiagnostics::mean_s);
  out.ci_half_width.mean_y = ci_of(&RenewalDiagnostics::mean_y);
  out.ci_half_width.mean_y2 = ci_of(&RenewalDiagnostics::mean_y2);
  out.ci_half_width.mean_attempts = ci_of(&RenewalDiagnostics::mean_attempts);
  return out;
}

}  // namespace aoi::sim
