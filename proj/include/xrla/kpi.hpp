#pragma once

// XR KPIs computed from simulation event logs: per-UE satisfaction, capacity
// over a load sweep, PRB utilization, packet delay percentiles and the MCS
// distribution of first transmissions.

#include "xrla/sim/event_log.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace xrla::kpi {

struct UeSatisfaction {
    std::uint32_t ue = 0;
    std::uint32_t cell = 0;
    std::uint64_t packets = 0;  ///< in time + late + dropped
    std::uint64_t in_time = 0;
    double fraction = 0.0;
    bool satisfied = false;
};

struct SatisfactionReport {
    std::vector<UeSatisfaction> ues;
    std::map<std::uint32_t, double> cell_fraction;  ///< satisfied UEs per cell
    double satisfied_fraction = 0.0;                ///< over all UEs
};

/// A UE is satisfied when in_time / packets >= x. Packets still in flight at
/// the end of the run are left out; a packet is in time when its delay is at
/// most pdb_ms. UEs without a resolved packet are left out. Throws
/// std::domain_error when the log resolves no packet at all.
SatisfactionReport satisfaction(const sim::EventLog& log, double pdb_ms, double x = 0.99);

struct CapacityPoint {
    std::uint32_t load = 0;
    double satisfied_fraction = 0.0;
};

struct CapacityResult {
    std::uint32_t capacity = 0;  ///< largest load with fraction >= y, 0 if none
    bool monotone = true;        ///< fractions never rise with load
};

/// Points may come in any order.
CapacityResult capacity(std::span<const CapacityPoint> sweep, double y = 0.90);

/// Empirical CDF sampled on a fixed grid.
struct Cdf {
    std::vector<double> x;
    std::vector<double> f;
};

/// Per-cell, per-slot fraction of scheduled PRBs, as a CDF on the grid
/// 0, 0.01, ..., 1. cell < 0 pools every cell. Empty when there are no
/// matching PRB records.
Cdf prb_utilization_cdf(const sim::EventLog& log, int cell = -1);

/// Raw utilization samples behind prb_utilization_cdf().
std::vector<double> prb_utilization(const sim::EventLog& log, int cell = -1);

/// Nearest-rank q-th percentile (q in (0, 100]). Throws std::domain_error on
/// an empty sample or q outside the range.
double percentile_nearest_rank(std::vector<double> values, double q);

/// Delays (delivery - arrival, ms) of delivered packets.
std::vector<double> packet_delays(const sim::EventLog& log, int cell = -1);

/// Nearest-rank percentile of packet_delays(). Throws std::domain_error when
/// nothing was delivered.
double delay_percentile(const sim::EventLog& log, double q, int cell = -1);

/// CDF over MCS indices 0 .. table_size - 1 of first transmissions. Throws
/// std::domain_error when the log has none.
std::vector<double> mcs_cdf(const sim::EventLog& log, std::size_t table_size = 28);

/// True when distribution a lies at or right of b everywhere, i.e. every
/// CDF value of a is at most the matching value of b (plus tol).
bool at_or_right_of(std::span<const double> cdf_a, std::span<const double> cdf_b, double tol = 0.0);

/// One CSV row: scheme, load, seed, cell, metric, value. Empty seed or cell
/// strings denote aggregates and are written as "all".
struct KpiRow {
    std::string scheme;
    std::uint32_t load = 0;
    std::string seed;
    std::string cell;
    std::string metric;
    double value = 0.0;
};

struct KpiTables {
    std::vector<KpiRow> satisfaction;
    std::vector<KpiRow> prb;
    std::vector<KpiRow> delay;
    std::vector<KpiRow> mcs;
};

/// Every per-run KPI of one log.
KpiTables run_kpis(const sim::EventLog& log, double x = 0.99, std::size_t table_size = 28);

void write_csv(std::ostream& out, std::span<const KpiRow> rows);

/// Deterministic text form used for CSV values.
std::string format_value(double value);

}  // namespace xrla::kpi
