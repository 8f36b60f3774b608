#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "aoi/types.hpp"

// Continuous-time discrete-event simulation of the base station serving
// N UEs under one of the five packet management strategies.
//
// Semantics:
//   - Updates arrive as a Poisson process; the buffer holds only the newest.
//   - A broadcast packet is one slot of length M received by every UE.
//     Unicast slots are M_L + M_k long and received by U_k only.
//   - Each update is sent once to every UE: one slot for broadcast, a
//     cyclic pass of N slots for unicast.  An idle base station resumes at
//     the UE after the last one served.  Under DNP passes therefore always
//     run U_1 .. U_N.
//   - Non-preemptive: arrivals wait in the buffer until the pass ends.
//   - Preemption in buffer (DPB): at the end of every slot a buffered
//     update replaces the one in service and its pass starts at the next UE.
//   - Preemption in serving (BRPS, DPS): an arrival aborts the slot in
//     progress and the new update restarts that same slot.
//   - Every completed slot fails independently per receiving UE with that
//     UE's block error rate; failures are not retransmitted.
//   - Equal timestamps resolve completion before arrival.
namespace aoi::sim {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventKind { Generate, ServeStart, ServeEndOk, ServeEndFail, Preempt, Idle };

std::string_view to_string(EventKind kind);

// ue is 1-based; 0 for events that do not concern a single UE.
struct TraceEvent {
  double time = 0.0;
  EventKind kind = EventKind::Generate;
  std::size_t ue = 0;
  std::uint64_t update_id = 0;
};

// One event per line: "<time> <kind> <ue> <update_id>", time printed with
// 17 significant digits.
void write_trace(std::ostream& out, std::span<const TraceEvent> trace);

struct SimRun {
  SystemConfig cfg;
  Strategy strategy = Strategy::DNP;
  double horizon = 2e6;
  double warmup_fraction = 0.1;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  // Worker threads for replications; 0 means hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
};

// Running sums over post-warmup receptions at one UE.
struct RenewalSums {
  std::size_t count = 0;
  double y = 0.0;
  double y2 = 0.0;
  double t = 0.0;
  double w = 0.0;
  double s = 0.0;
  double attempts = 0.0;
  double y_t_prev = 0.0;  // Y_j * T_{j-1}

  RenewalDiagnostics means() const;
};

struct ReplicationOptions {
  bool record_trace = false;
  // When non-empty, these (sorted) generation times replace the Poisson
  // process.
  std::vector<double> scripted_arrivals;
};

struct ReplicationResult {
  std::vector<double> time_average;      // per UE, over [warmup, horizon]
  std::vector<RenewalSums> renewals;     // per UE
  std::vector<TraceEvent> trace;
  std::uint64_t generated = 0;
};

// Block error rate per UE for the link the strategy uses.
std::vector<double> error_rates(const SystemConfig& cfg, Strategy strategy);

ReplicationResult run_replication(const SystemConfig& cfg, Strategy strategy, double horizon,
                                  double warmup, std::uint64_t seed,
                                  const ReplicationOptions& options = {});

// Per-UE and system means with Student-t 95% intervals across replications.
AoiEstimate simulate(const SimRun& run);

struct MeasuredRenewals {
  RenewalDiagnostics mean;           // pooled over all replications
  RenewalDiagnostics ci_half_width;  // across replication means
  double mean_y_t_prev = 0.0;        // E[Y_j T_{j-1}]
  double time_average = 0.0;         // measured AoI of this UE
  double time_average_ci = 0.0;
  std::size_t deliveries = 0;

  // (E[Y^2]/2 + E[Y_j T_{j-1}]) / E[Y]; equals the time average without
  // assuming Y_j and T_{j-1} are uncorrelated.
  double exact_renewal_aoi() const;
};

// Throws SimulationError("insufficient renewal samples") below 30
// post-warmup receptions.
MeasuredRenewals measure_renewals(const SimRun& run, std::size_t ue);

}  // namespace aoi::sim
