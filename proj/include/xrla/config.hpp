#pragma once

// Simulator configuration: a flat "key = value" text format with dotted keys.
//
//   # comment
//   topology.ues_per_cell = 4
//   ecqi.n = 4
//   campaign.loads = 2, 3, 4
//
// Unknown keys are rejected, omitted keys keep their defaults, and later
// assignments (file, then command-line overrides) win.

#include "xrla/sim/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xrla::cli {

struct CampaignParams {
    std::vector<std::uint32_t> loads{2, 3, 4, 5};
    std::vector<sim::Scheme> schemes{sim::Scheme::BaselineTb, sim::Scheme::BaselineCbg, sim::Scheme::EcqiCbg};
    std::uint32_t seeds = 3;
    /// Worker threads; 0 uses the hardware concurrency.
    std::uint32_t parallelism = 0;
    bool write_events = true;
};

struct KpiParams {
    double x = 0.99;
    double y = 0.90;
};

struct SimConfig {
    sim::SimParams sim;
    CampaignParams campaign;
    KpiParams kpi;
    std::string rate_label = "45Mbps";

    /// Desk-scale defaults.
    SimConfig();

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sets one key from its text value. Throws ConfigError for unknown keys or
/// malformed values.
void set_key(SimConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its current value, sorted by key.
std::vector<std::pair<std::string, std::string>> dump(const SimConfig& cfg);

/// dump() rendered as "key = value" lines.
std::string dump_text(const SimConfig& cfg);

/// Applies the assignments of a config text on top of cfg. Errors carry the
/// line number ("line 3: ...").
void apply_text(SimConfig& cfg, std::istream& in);

/// Defaults + file; validates.
SimConfig load_config(const std::filesystem::path& path);

/// Parses "key=value" overrides on top of cfg.
void apply_overrides(SimConfig& cfg, const std::vector<std::string>& assignments);

/// 64-bit FNV-1a of dump_text(), as 16 hex digits.
std::string config_hash(const SimConfig& cfg);

}  // namespace xrla::cli
