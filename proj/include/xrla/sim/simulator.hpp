#pragma once

// Slot-level multi-cell downlink simulator.
//
// Each slot: HARQ feedback and CQI reports that have become visible to the
// gNB are applied, new frames enter the per-UE FIFO, packets that can no
// longer meet their deadline leave it, periodic CQI is measured, and on
// downlink-capable slots every cell runs the PF scheduler (retransmissions
// first), transmits one TB per scheduled UE and draws per-CB decode outcomes.
// Interference on a PRB comes from neighbour cells that used it in their
// previous downlink slot.

#include "xrla/ecqi.hpp"
#include "xrla/link_map.hpp"
#include "xrla/sim/channel.hpp"
#include "xrla/sim/event_log.hpp"
#include "xrla/sim/olla.hpp"
#include "xrla/sim/traffic.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xrla::sim {

enum class Scheme {
    BaselineTb,   ///< baseline CQI, one HARQ bit per TB, TB OLLA
    BaselineCbg,  ///< baseline CQI, CBG retransmissions, TB OLLA
    EcqiCbg,      ///< eCQI, CBG retransmissions, per-CBG eOLLA
};

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view text);

struct TopologyParams {
    std::size_t cells = 3;           ///< in a row along x
    double isd_m = 20.0;
    std::size_t ues_per_cell = 4;
    double hall_depth_m = 20.0;      ///< drop area extent along y

    void validate() const;
};

struct FrameParams {
    std::string pattern = "DDDSU";
    double slot_ms = 0.5;
    int symbols_per_slot = 14;
    int control_symbols = 1;
    int special_dl_symbols = 10;
    int ue_processing_symbols = 6;
    int gnb_processing_symbols = 3;

    void validate() const;
    char slot_type(std::uint64_t slot) const;
    /// Downlink symbols that carry data (0 on uplink slots).
    int data_symbols(std::uint64_t slot) const;
    /// Symbol (from the slot start) at which downlink data ends.
    int data_end_symbol(std::uint64_t slot) const;
};

struct LinkParams {
    double bler_slope = 2.0;
    double snr_gap_db = 1.5;
    /// Explicit BLER midpoints, one per MCS; empty selects Shannon + gap.
    std::vector<double> midpoints_db;
    /// 0 selects beta = spectral efficiency per MCS.
    double eesm_beta = 0.0;
    bool use_mmib = false;
    std::map<int, link::MiCurve> mmib_curves;

    link::McsTable build_table() const;
    link::EffectiveSinrMapper build_mapper() const;
};

struct CqiParams {
    double period_ms = 2.0;
    double delay_ms = 2.0;
    double target_tbep = 0.1;
    /// Measure interference as if every neighbour PRB were in use; otherwise
    /// the neighbours' usage in the previous downlink slot is seen.
    bool full_interference = true;

    void validate() const;
};

struct SimParams {
    Scheme scheme = Scheme::EcqiCbg;
    TopologyParams topology;
    FrameParams frame;
    TrafficParams traffic;
    ChannelParams channel;
    LinkParams link;
    CqiParams cqi;
    cqi::EcqiConfig ecqi;
    OllaParams olla;
    OllaParams eolla;
    /// CBG failure fraction targeted by eOLLA; unset means N / M.
    std::optional<double> eolla_target;
    unsigned max_cbgs = 8;
    unsigned harq_max_attempts = 4;
    double pf_time_constant_ms = 100.0;
    double horizon_s = 2.0;
    std::uint64_t seed = 1;
    bool record_events = true;

    void validate() const;
    std::uint64_t horizon_slots() const;
    double resolved_eolla_target() const;
};

struct SimStats {
    std::uint64_t first_tx_tbs = 0;
    std::uint64_t first_tx_tb_errors = 0;
    std::uint64_t first_tx_cbgs = 0;
    std::uint64_t first_tx_cbg_errors = 0;
    std::uint64_t new_tx_prbs = 0;
    std::uint64_t retx_prbs = 0;
    std::uint64_t harq_failures = 0;
    std::uint64_t cqi_reports = 0;
    std::uint64_t cqi_out_of_range = 0;
    std::uint64_t arrived_bits = 0;
    std::uint64_t delivered_bits = 0;

    double first_tx_tber() const;
    double first_tx_cbg_error_rate() const;
};

struct SimResult {
    EventLog log;
    SimStats stats;
};

class Simulator {
public:
    explicit Simulator(const SimParams& params);
    ~Simulator();
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    void step_slot();
    std::uint64_t slot() const;
    const SimStats& stats() const;
    std::size_t ue_count() const;
    std::size_t serving_cell(std::size_t ue) const;
    double olla_offset_db(std::size_t ue) const;

    /// Classifies every packet and returns the log; the simulator is spent.
    SimResult finish();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Runs params.horizon_slots() slots.
SimResult simulate(const SimParams& params);

}  // namespace xrla::sim
