#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "aoi/fbl.hpp"
#include "aoi/types.hpp"

// Closed-form average AoI per UE.
//
// Two layers are provided.  The first works on raw quantities (serving
// times M_k' = M_k + M_L, generation rate and block error rate of the UE
// under study) so the formulas can be exercised without the link model.
// The second takes a SystemConfig and derives the block error rate from
// the link budget unless one is supplied.
//
// UE indices are 0-based; `ue` = n - 1 for U_n.  Every function throws
// DivergentAoi when eps >= kDivergenceThreshold and std::invalid_argument
// on malformed input.
namespace aoi::analytic {

inline constexpr double kDivergenceThreshold = 1.0 - 1e-12;

// Unicast, non-preemptive: UEs always served U_1 .. U_N.
double dnp(std::span<const double> serving, double gen_rate, double eps, std::size_t ue);
// Unicast, preemption in buffer.
double dpb(std::span<const double> serving, double gen_rate, double eps, std::size_t ue);
// Unicast, preemption in serving.
double dps(std::span<const double> serving, double gen_rate, double eps, std::size_t ue);
// Zero-waiting limits (gen_rate -> infinity) of dnp and dpb.
double dnp_zero_wait(std::span<const double> serving, double eps, std::size_t ue);
double dpb_zero_wait(std::span<const double> serving, double eps, std::size_t ue);
// Broadcast of one packet of length `blocklength`.
double brnp(double eps, double gen_rate, double blocklength);
double brps(double eps, double gen_rate, double blocklength);

// Per-UE block error rate for the link the strategy uses.
double ue_error_rate(const SystemConfig& cfg, Strategy strategy, std::size_t ue);

double aoi_dnp(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps = {});
double aoi_dpb(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps = {});
double aoi_dps(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps = {});
double aoi_dnp_zero_wait(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps = {});
double aoi_dpb_zero_wait(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps = {});
double aoi_brnp(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps = {});
double aoi_brps(const SystemConfig& cfg, std::size_t ue, std::optional<double> eps = {});

// Single-link forms: the block error rate comes from `link` and the
// packet length is link.blocklength.
double aoi_brnp(const fbl::LinkBudget& link, double gen_rate,
                DispersionForm form = DispersionForm::AsPrinted);
double aoi_brps(const fbl::LinkBudget& link, double gen_rate,
                DispersionForm form = DispersionForm::AsPrinted);

double ue_aoi(const SystemConfig& cfg, Strategy strategy, std::size_t ue);
std::vector<double> per_ue_aoi(const SystemConfig& cfg, Strategy strategy);

// Arithmetic mean; throws std::invalid_argument on an empty list.
double system_average(std::span<const double> per_ue);
double system_aoi(const SystemConfig& cfg, Strategy strategy);

// Closed-form renewal moments.  For DPS only E[Y] and E[T] have
// standalone closed forms; E[Y^2] is recovered from the DPS average AoI
// through Delta = E[Y^2]/(2E[Y]) + E[T].  Broadcast strategies are handled
// as a single-slot cycle of the broadcast blocklength.
RenewalDiagnostics renewal_diagnostics(const SystemConfig& cfg, Strategy strategy,
                                       std::size_t ue, std::optional<double> eps = {});

RenewalDiagnostics dnp_renewals(std::span<const double> serving, double gen_rate, double eps,
                                std::size_t ue);
RenewalDiagnostics dpb_renewals(std::span<const double> serving, double gen_rate, double eps,
                                std::size_t ue);
RenewalDiagnostics dps_renewals(std::span<const double> serving, double gen_rate, double eps,
                                std::size_t ue);

}  // namespace aoi::analytic
