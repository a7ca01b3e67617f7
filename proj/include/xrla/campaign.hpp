#pragma once

// Campaign orchestration: every (scheme, load, seed) cell of a sweep runs as
// an independent simulation, optionally in parallel, and the results land in
// an output directory:
//
//   manifest.txt                    config dump, hash and run list
//   runs/<scheme>_load<L>_seed<S>/events.log
//   satisfaction.csv prb_utilization.csv delay.csv mcs_cdf.csv capacity.csv
//
// Seeds are matched across schemes: replication k of every scheme and load
// uses sim.seed + k. CSV rows follow the run order of expand_runs(), so the
// files are a pure function of the manifest.

#include "xrla/config.hpp"
#include "xrla/kpi.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace xrla::cli {

inline constexpr const char* kVersion = "1.0.0";

struct RunSpec {
    sim::Scheme scheme = sim::Scheme::EcqiCbg;
    std::uint32_t load = 0;  ///< UEs per cell
    std::uint64_t seed = 0;

    std::string name() const;
};

/// Schemes outermost, then loads, then seeds.
std::vector<RunSpec> expand_runs(const SimConfig& cfg);

/// The simulator parameters of one campaign cell.
sim::SimParams run_params(const SimConfig& cfg, const RunSpec& spec);

struct RunOutcome {
    RunSpec spec;
    bool ok = false;
    std::string error;
    kpi::KpiTables kpis;
    std::size_t satisfied_ues = 0;
    std::size_t resolved_ues = 0;
    sim::SimStats stats;
};

struct CampaignResult {
    std::vector<RunOutcome> runs;

    std::size_t failures() const;
};

/// KPIs of one event log, as stored in a RunOutcome.
RunOutcome evaluate_log(const RunSpec& spec, const sim::EventLog& log, const KpiParams& kpi);

/// Runs every cell and writes the directory layout above. A failing run is
/// recorded (manifest status and stderr-style message in the outcome) and
/// the others still complete. Progress lines go to `progress` when given.
CampaignResult run_campaign(const SimConfig& cfg, const std::filesystem::path& out_dir,
                            std::ostream* progress = nullptr);

/// Recomputes the KPI CSVs of out_dir from its event logs and manifest.
CampaignResult analyze_campaign(const std::filesystem::path& out_dir, std::ostream* progress = nullptr);

/// Writes the five KPI CSVs for the given outcomes.
void write_kpi_csvs(const SimConfig& cfg, const CampaignResult& result, const std::filesystem::path& out_dir);

void write_manifest(std::ostream& out, const SimConfig& cfg, const CampaignResult& result);

/// The configuration recorded in a manifest. Throws ConfigError when the
/// file is malformed or its hash does not match the recorded config.
SimConfig read_manifest(const std::filesystem::path& path);

}  // namespace xrla::cli
