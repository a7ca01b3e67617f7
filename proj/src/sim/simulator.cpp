#include "xrla/sim/simulator.hpp"

#include "xrla/probability.hpp"
#include "xrla/sim/harq.hpp"
#include "xrla/sim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>

namespace xrla::sim {

std::string_view to_string(Scheme scheme)
{
    switch (scheme) {
    case Scheme::BaselineTb:
        return "baseline_tb";
    case Scheme::BaselineCbg:
        return "baseline_cbg";
    case Scheme::EcqiCbg:
        return "ecqi_cbg";
    }
    return "?";
}

Scheme parse_scheme(std::string_view text)
{
    for (Scheme s : {Scheme::BaselineTb, Scheme::BaselineCbg, Scheme::EcqiCbg}) {
        if (text == to_string(s)) {
            return s;
        }
    }
    throw std::domain_error("unknown scheme '" + std::string(text) + "'");
}

void TopologyParams::validate() const
{
    if (cells == 0) {
        throw std::domain_error("topology.cells must be positive");
    }
    if (ues_per_cell == 0) {
        throw std::domain_error("topology.ues_per_cell must be positive");
    }
    if (!(isd_m > 0.0) || !(hall_depth_m > 0.0)) {
        throw std::domain_error("topology distances must be positive");
    }
}

void FrameParams::validate() const
{
    if (pattern.empty() || pattern.find_first_not_of("DSU") != std::string::npos) {
        throw std::domain_error("frame.pattern may only contain D, S and U");
    }
    if (pattern.find('U') == std::string::npos) {
        throw std::domain_error("frame.pattern needs an uplink slot for feedback");
    }
    if (pattern.find_first_of("DS") == std::string::npos) {
        throw std::domain_error("frame.pattern needs a downlink slot");
    }
    if (!(slot_ms > 0.0)) {
        throw std::domain_error("frame.slot_ms must be positive");
    }
    if (control_symbols < 0 || control_symbols >= special_dl_symbols || special_dl_symbols > symbols_per_slot) {
        throw std::domain_error("frame symbol split is inconsistent");
    }
    if (ue_processing_symbols < 0 || gnb_processing_symbols < 0) {
        throw std::domain_error("frame processing delays must be non-negative");
    }
}

char FrameParams::slot_type(std::uint64_t slot) const
{
    return pattern[slot % pattern.size()];
}

int FrameParams::data_symbols(std::uint64_t slot) const
{
    switch (slot_type(slot)) {
    case 'D':
        return symbols_per_slot - control_symbols;
    case 'S':
        return special_dl_symbols - control_symbols;
    default:
        return 0;
    }
}

int FrameParams::data_end_symbol(std::uint64_t slot) const
{
    return slot_type(slot) == 'S' ? special_dl_symbols : symbols_per_slot;
}

link::McsTable LinkParams::build_table() const
{
    if (midpoints_db.empty()) {
        return link::McsTable::nr_256qam(bler_slope, snr_gap_db);
    }
    return link::McsTable::nr_256qam_with_midpoints(midpoints_db, bler_slope);
}

link::EffectiveSinrMapper LinkParams::build_mapper() const
{
    if (use_mmib) {
        return link::EffectiveSinrMapper::mmib(mmib_curves);
    }
    if (eesm_beta > 0.0) {
        return link::EffectiveSinrMapper::eesm(eesm_beta);
    }
    return {};
}

void CqiParams::validate() const
{
    if (!(period_ms > 0.0) || delay_ms < 0.0) {
        throw std::domain_error("cqi period must be positive and delay non-negative");
    }
    if (!(target_tbep > 0.0 && target_tbep < 1.0)) {
        throw std::domain_error("cqi.target_tbep must lie in (0, 1)");
    }
}

void SimParams::validate() const
{
    topology.validate();
    frame.validate();
    traffic.validate();
    channel.validate();
    cqi.validate();
    ecqi.validate();
    olla.validate();
    if (ecqi.f != max_cbgs) {
        throw std::domain_error("ecqi.f must equal harq.max_cbgs");
    }
    OllaParams e = eolla;
    e.target = resolved_eolla_target();
    e.validate();
    if (max_cbgs != 2 && max_cbgs != 4 && max_cbgs != 6 && max_cbgs != 8) {
        throw std::domain_error("harq.max_cbgs must be 2, 4, 6 or 8");
    }
    if (harq_max_attempts == 0) {
        throw std::domain_error("harq.max_attempts must be positive");
    }
    if (!(pf_time_constant_ms > 0.0)) {
        throw std::domain_error("scheduler.pf_time_constant_ms must be positive");
    }
    if (!(horizon_s >= 1.0)) {
        throw std::domain_error("sim.horizon_s must cover at least one second");
    }
    (void)link.build_table();
}

std::uint64_t SimParams::horizon_slots() const
{
    return static_cast<std::uint64_t>(std::llround(horizon_s * 1000.0 / frame.slot_ms));
}

double SimParams::resolved_eolla_target() const
{
    if (eolla_target) {
        return *eolla_target;
    }
    return static_cast<double>(ecqi.n) / static_cast<double>(ecqi.m);
}

double SimStats::first_tx_tber() const
{
    return first_tx_tbs == 0 ? 0.0 : static_cast<double>(first_tx_tb_errors) / static_cast<double>(first_tx_tbs);
}

double SimStats::first_tx_cbg_error_rate() const
{
    return first_tx_cbgs == 0 ? 0.0 : static_cast<double>(first_tx_cbg_errors) / static_cast<double>(first_tx_cbgs);
}

namespace {

enum Stream : std::uint64_t { kPlacement = 1, kFading = 2, kTraffic = 3, kDecode = 4 };

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
    return std::mt19937_64(seq);
}

/// Splits an allocation of per-PRB SINRs into cb_count equal contiguous
/// frequency chunks and compresses each chunk into one effective SINR.
std::vector<double> cb_effective_sinr(std::span<const double> prb_sinr, std::size_t cb_count,
                                      const link::EffectiveSinrMapper& mapper, const link::McsEntry& entry)
{
    const auto n = static_cast<double>(prb_sinr.size());
    std::vector<double> out(cb_count);
    std::vector<double> samples;
    std::vector<double> weights;
    for (std::size_t j = 0; j < cb_count; ++j) {
        const double lo = static_cast<double>(j) * n / static_cast<double>(cb_count);
        const double hi = static_cast<double>(j + 1) * n / static_cast<double>(cb_count);
        samples.clear();
        weights.clear();
        const auto first = static_cast<std::size_t>(std::floor(lo));
        const auto last = std::min(prb_sinr.size(), static_cast<std::size_t>(std::ceil(hi)));
        for (std::size_t i = first; i < last; ++i) {
            const double w = std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
            if (w > 1e-12) {
                samples.push_back(prb_sinr[i]);
                weights.push_back(w);
            }
        }
        out[j] = mapper.effective(samples, weights, entry);
    }
    return out;
}

struct PacketState {
    XrPacket pkt;
    std::uint64_t unscheduled_bits = 0;
    std::uint32_t outstanding_tbs = 0;
    bool failed = false;
    double last_decode_ms = -1.0;
    PacketStatus status = PacketStatus::InFlight;
};

struct Segment {
    std::size_t packet;
    std::uint64_t bits;
};

struct ActiveHarq {
    HarqProcess proc;
    std::vector<Segment> segments;
    bool awaiting = false;
    std::uint64_t feedback_slot = 0;  ///< slot at whose start the gNB acts on it
    CbgFeedback feedback;
    double decode_ms = 0.0;
    std::size_t acked_cbs = 0;
};

struct Report {
    std::uint64_t effective_slot;
    std::size_t index;
    bool out_of_range;
};

struct UeRuntime {
    std::uint32_t id = 0;
    std::size_t cell = 0;
    std::vector<PacketState> packets;
    std::size_t next_arrival = 0;
    std::deque<std::size_t> queue;
    std::uint64_t queued_bits = 0;
    bool has_report = false;
    std::size_t cqi = 0;
    bool cqi_out_of_range = false;
    std::deque<Report> reports;
    Olla olla;
    double pf_avg = 0.0;
    double delivered_this_slot = 0.0;
    std::vector<ActiveHarq> harq;
    std::uint32_t next_harq_id = 0;
    std::mt19937_64 decode_rng;

    UeRuntime(Olla o, std::mt19937_64 rng) : olla(o), decode_rng(rng) {}
};

struct Candidate {
    std::size_t ue;
    std::size_t retx = std::numeric_limits<std::size_t>::max();  ///< index into harq, or max for new data
    std::size_t mcs = 0;
};

}  // namespace

struct Simulator::Impl {
    SimParams p;
    link::McsTable table;
    link::EffectiveSinrMapper mapper;
    std::unique_ptr<Channel> channel;
    std::vector<UeRuntime> ues;
    std::vector<std::vector<std::size_t>> cell_ues;
    std::vector<std::vector<std::uint8_t>> last_activity;
    std::vector<std::vector<std::uint8_t>> full_activity;
    std::vector<std::vector<std::uint8_t>> activity;
    std::uint64_t slot = 0;
    std::uint64_t cqi_period_slots = 1;
    double pf_alpha = 0.0;
    SimStats stats;
    EventLog log;
    bool finished = false;

    explicit Impl(const SimParams& params) : p(params), table(params.link.build_table())
    {
        p.validate();
        mapper = p.link.build_mapper();
        cqi_period_slots = std::max<std::uint64_t>(1, std::llround(p.cqi.period_ms / p.frame.slot_ms));
        pf_alpha = std::min(1.0, p.frame.slot_ms / p.pf_time_constant_ms);
        place_ues();
        const std::size_t cells = p.topology.cells;
        last_activity.assign(cells, std::vector<std::uint8_t>(p.channel.prbs, 0));
        activity = last_activity;
        full_activity.assign(cells, std::vector<std::uint8_t>(p.channel.prbs, 1));

        log.header.scheme = std::string(to_string(p.scheme));
        log.header.load = static_cast<std::uint32_t>(p.topology.ues_per_cell);
        log.header.seed = p.seed;
        log.header.cells = static_cast<std::uint32_t>(cells);
        log.header.prbs = static_cast<std::uint32_t>(p.channel.prbs);
        log.header.slot_ms = p.frame.slot_ms;
        log.header.pdb_ms = p.traffic.pdb_ms;
        log.header.slots = p.horizon_slots();
    }

    // UEs are dropped uniformly over the hall and attached to the strongest
    // cell (pathloss plus shadowing); drops landing in a full cell are redrawn.
    void place_ues()
    {
        const auto& topo = p.topology;
        std::vector<Position> cells;
        for (std::size_t c = 0; c < topo.cells; ++c) {
            cells.push_back({static_cast<double>(c) * topo.isd_m, 0.0, p.channel.gnb_height_m});
        }
        auto rng = make_rng(p.seed, kPlacement);
        std::uniform_real_distribution<double> ux(-topo.isd_m / 2.0,
                                                  (static_cast<double>(topo.cells) - 0.5) * topo.isd_m);
        std::uniform_real_distribution<double> uy(-topo.hall_depth_m / 2.0, topo.hall_depth_m / 2.0);
        std::normal_distribution<double> shadow(0.0, 1.0);

        std::vector<Position> positions;
        std::vector<std::size_t> serving;
        std::vector<double> shadowing;
        std::vector<std::size_t> count(topo.cells, 0);
        const std::size_t wanted = topo.cells * topo.ues_per_cell;
        std::size_t draws = 0;
        while (positions.size() < wanted) {
            if (++draws > 1000 * wanted) {
                throw std::runtime_error("UE placement could not fill every cell");
            }
            const Position pos{ux(rng), uy(rng), p.channel.ue_height_m};
            std::vector<double> sf(topo.cells);
            std::size_t best = 0;
            double best_loss = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < topo.cells; ++c) {
                sf[c] = p.channel.shadowing_std_db * shadow(rng);
                const double loss =
                    pathloss_db(distance(pos, cells[c]), p.channel.carrier_ghz, p.channel.pathloss_exponent) + sf[c];
                if (loss < best_loss) {
                    best_loss = loss;
                    best = c;
                }
            }
            if (count[best] >= topo.ues_per_cell) {
                continue;
            }
            ++count[best];
            positions.push_back(pos);
            serving.push_back(best);
            shadowing.insert(shadowing.end(), sf.begin(), sf.end());
        }

        channel = std::make_unique<Channel>(p.channel, cells, positions, shadowing, make_rng(p.seed, kFading)(),
                                            p.frame.slot_ms / 1000.0);
        cell_ues.assign(topo.cells, {});
        const double horizon_ms = static_cast<double>(p.horizon_slots()) * p.frame.slot_ms;
        const bool eolla = p.scheme == Scheme::EcqiCbg;
        OllaParams op = eolla ? p.eolla : p.olla;
        if (eolla) {
            op.target = p.resolved_eolla_target();
        }
        for (std::size_t u = 0; u < positions.size(); ++u) {
            channel->set_serving(u, serving[u]);
            UeRuntime ue(Olla(eolla ? OllaMode::CbgEolla : OllaMode::TbOlla, op),
                         make_rng(p.seed, kDecode, u));
            ue.id = static_cast<std::uint32_t>(u);
            ue.cell = serving[u];
            if (!p.traffic.full_buffer) {
                auto trng = make_rng(p.seed, kTraffic, u);
                std::uniform_real_distribution<double> phase(0.0, 1000.0 / p.traffic.fps);
                const double offset = phase(trng);
                for (const auto& pkt : generate_traffic(p.traffic, horizon_ms, trng, offset)) {
                    PacketState ps;
                    ps.pkt = pkt;
                    ps.pkt.arrival_ms = quantize_ms(pkt.arrival_ms);
                    ps.pkt.deadline_ms = ps.pkt.arrival_ms + p.traffic.pdb_ms;
                    ps.unscheduled_bits = pkt.size_bits;
                    ue.packets.push_back(ps);
                }
            }
            cell_ues[serving[u]].push_back(u);
            ues.push_back(std::move(ue));
        }
    }

    int sym() const { return p.frame.symbols_per_slot; }

    /// First slot at which the gNB can act on an uplink message that is ready
    /// at absolute symbol ready_symbol: the message rides the first U slot
    /// ending at or after that point and then takes the gNB processing time.
    std::uint64_t gnb_visible_slot(std::uint64_t from_slot, std::uint64_t ready_symbol) const
    {
        const auto s = static_cast<std::uint64_t>(sym());
        std::uint64_t u = from_slot;
        while (p.frame.slot_type(u) != 'U' || (u + 1) * s < ready_symbol) {
            ++u;
        }
        const std::uint64_t usable = (u + 1) * s + static_cast<std::uint64_t>(p.frame.gnb_processing_symbols);
        return (usable + s - 1) / s;
    }

    double slot_start_ms(std::uint64_t t) const { return static_cast<double>(t) * p.frame.slot_ms; }

    std::size_t select_mcs(const UeRuntime& ue) const
    {
        const std::size_t reported = ue.cqi_out_of_range ? 0 : ue.cqi;
        return table.nearest_by_midpoint(table[reported].bler_midpoint_db - ue.olla.offset_db());
    }

    std::size_t reference_cbs(std::size_t r) const
    {
        const double tbs = std::floor(static_cast<double>(p.channel.prbs) *
                                      table.bits_per_prb(r, p.frame.symbols_per_slot - p.frame.control_symbols));
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tbs / link::kMaxCodeBlockBits)));
    }

    Report measure_cqi(std::size_t u)
    {
        const auto sinr = channel->sinr(u, p.cqi.full_interference ? full_activity : last_activity);
        Report rep{0, 0, false};
        if (p.scheme == Scheme::EcqiCbg) {
            const std::size_t m = p.ecqi.m;
            auto profile_for = [&](std::size_t r) {
                const std::size_t c = std::max(m, reference_cbs(r));
                const auto eff = cb_effective_sinr(sinr, c, mapper, table[r]);
                std::vector<double> db(eff.size());
                std::transform(eff.begin(), eff.end(), db.begin(), link::linear_to_db);
                return link::CbSinrProfile(std::move(db), link::CbgLayout(c, m));
            };
            const auto res = cqi::ecqi(profile_for, table, p.ecqi);
            rep.index = res.index;
            rep.out_of_range = res.out_of_range;
        } else {
            rep.index = cqi::baseline_cqi(
                [&](std::size_t r) {
                    const double eff = mapper.effective(sinr, table[r]);
                    const double p_cb = link::bler(link::linear_to_db(eff), table[r]);
                    return prob::cbg_error_prob_iid(p_cb, reference_cbs(r));
                },
                table.size(), p.cqi.target_tbep);
        }
        ++stats.cqi_reports;
        if (rep.out_of_range) {
            ++stats.cqi_out_of_range;
        }
        return rep;
    }

    void apply_report(UeRuntime& ue, const Report& rep)
    {
        ue.cqi = rep.index;
        ue.cqi_out_of_range = rep.out_of_range;
        if (!ue.has_report) {
            ue.has_report = true;
            // Seed the PF average with the full-band rate of the first report.
            const std::size_t mcs = select_mcs(ue);
            ue.pf_avg = static_cast<double>(p.channel.prbs) *
                        table.bits_per_prb(mcs, p.frame.symbols_per_slot - p.frame.control_symbols);
        }
    }

    void finalize_packet(PacketState& ps)
    {
        if (ps.failed || ps.unscheduled_bits > 0 || ps.outstanding_tbs > 0 ||
            ps.status != PacketStatus::InFlight) {
            return;
        }
        ps.status = ps.last_decode_ms - ps.pkt.arrival_ms <= p.traffic.pdb_ms + 1e-9 ? PacketStatus::InTime
                                                                                    : PacketStatus::Late;
    }

    void drop_packet(PacketState& ps)
    {
        ps.failed = true;
        if (ps.status == PacketStatus::InFlight) {
            ps.status = PacketStatus::Dropped;
        }
    }

    void process_feedback(UeRuntime& ue)
    {
        for (std::size_t k = 0; k < ue.harq.size();) {
            ActiveHarq& h = ue.harq[k];
            if (!h.awaiting || h.feedback_slot != slot) {
                ++k;
                continue;
            }
            h.awaiting = false;
            if (h.proc.attempts() == 1) {
                ue.olla.update(h.feedback);
            }
            std::size_t acked_cbs = 0;
            const auto states = h.proc.cbg_states();
            for (std::size_t m = 0; m < states.size(); ++m) {
                if (states[m] == CbgState::Acked) {
                    acked_cbs += h.proc.layout().group_sizes()[m];
                }
            }
            const std::uint64_t newly = h.proc.tb_bits() * (acked_cbs - h.acked_cbs) / h.proc.layout().cb_count();
            h.acked_cbs = acked_cbs;
            ue.delivered_this_slot += static_cast<double>(newly);

            if (h.proc.complete() || h.proc.exhausted()) {
                const bool ok = h.proc.complete();
                if (!ok) {
                    ++stats.harq_failures;
                }
                for (const Segment& s : h.segments) {
                    PacketState& ps = ue.packets[s.packet];
                    --ps.outstanding_tbs;
                    if (ok) {
                        ps.last_decode_ms = std::max(ps.last_decode_ms, h.decode_ms);
                        stats.delivered_bits += s.bits;
                        finalize_packet(ps);
                    } else {
                        drop_packet(ps);
                    }
                }
                ue.harq.erase(ue.harq.begin() + static_cast<std::ptrdiff_t>(k));
                continue;
            }
            ++k;
        }
    }

    void admit_and_expire(UeRuntime& ue)
    {
        const double now = slot_start_ms(slot);
        const double end = now + p.frame.slot_ms;
        while (ue.next_arrival < ue.packets.size() && ue.packets[ue.next_arrival].pkt.arrival_ms <= now) {
            PacketState& ps = ue.packets[ue.next_arrival];
            ue.queue.push_back(ue.next_arrival);
            ue.queued_bits += ps.unscheduled_bits;
            stats.arrived_bits += ps.pkt.size_bits;
            ++ue.next_arrival;
        }
        // Anything finishing in this slot or later would already be late.
        for (auto it = ue.queue.begin(); it != ue.queue.end();) {
            PacketState& ps = ue.packets[*it];
            if (end > ps.pkt.deadline_ms + 1e-9) {
                ue.queued_bits -= ps.unscheduled_bits;
                ps.unscheduled_bits = 0;
                drop_packet(ps);
                it = ue.queue.erase(it);
            } else {
                ++it;
            }
        }
    }

    void transmit(UeRuntime& ue, ActiveHarq& h, std::size_t first_prb, std::size_t prbs, bool retx)
    {
        const link::McsEntry& entry = table[h.proc.mcs()];
        const auto sinr = channel->sinr(ue.id, last_activity);
        const std::span<const double> alloc(sinr.data() + first_prb, prbs);
        const std::size_t sent_cbs = h.proc.cbs_to_send().size();
        const auto cb_sinr = cb_effective_sinr(alloc, sent_cbs, mapper, entry);
        const std::uint64_t bits = h.proc.bits_to_send();
        h.feedback = h.proc.transmit(cb_sinr, entry, ue.decode_rng);
        h.awaiting = true;
        const std::uint64_t ready = slot * static_cast<std::uint64_t>(sym()) +
                                    static_cast<std::uint64_t>(p.frame.data_end_symbol(slot) +
                                                               p.frame.ue_processing_symbols);
        h.feedback_slot = gnb_visible_slot(slot, ready);
        h.feedback.delay_slots = h.feedback_slot - slot;
        h.decode_ms = quantize_ms(slot_start_ms(slot) + p.frame.slot_ms * p.frame.data_end_symbol(slot) / sym());

        for (std::size_t k = first_prb; k < first_prb + prbs; ++k) {
            activity[ue.cell][k] = 1;
        }
        if (retx) {
            stats.retx_prbs += prbs;
        } else {
            stats.new_tx_prbs += prbs;
            ++stats.first_tx_tbs;
            stats.first_tx_cbgs += h.feedback.ack.size();
            const std::size_t nacks = h.feedback.nack_count();
            stats.first_tx_cbg_errors += nacks;
            if (nacks > 0) {
                ++stats.first_tx_tb_errors;
            }
        }
        if (p.record_events) {
            TxRecord t;
            t.slot = slot;
            t.cell = static_cast<std::uint32_t>(ue.cell);
            t.ue = ue.id;
            t.harq = h.proc.id();
            t.attempt = h.proc.attempts();
            t.mcs = static_cast<std::uint32_t>(h.proc.mcs());
            t.prbs = static_cast<std::uint32_t>(prbs);
            t.bits = bits;
            t.cbs = static_cast<std::uint32_t>(sent_cbs);
            t.cbgs = static_cast<std::uint32_t>(h.feedback.ack.size());
            for (bool a : h.feedback.ack) {
                t.acks.push_back(a ? '1' : '0');
            }
            log.tx.push_back(std::move(t));
        }
    }

    ActiveHarq open_process(UeRuntime& ue, std::uint64_t bits, std::size_t mcs)
    {
        link::CbgLayout layout = p.scheme == Scheme::BaselineTb
                                     ? link::CbgLayout((bits + link::kMaxCodeBlockBits - 1) / link::kMaxCodeBlockBits, 1)
                                     : segment_tb(bits, p.max_cbgs).layout;
        ActiveHarq h{HarqProcess(ue.next_harq_id++, bits, std::move(layout), mcs, p.harq_max_attempts), {}, false, 0, {}, 0.0, 0};
        if (p.traffic.full_buffer) {
            return h;
        }
        std::uint64_t left = bits;
        while (left > 0 && !ue.queue.empty()) {
            PacketState& ps = ue.packets[ue.queue.front()];
            const std::uint64_t take = std::min(left, ps.unscheduled_bits);
            h.segments.push_back({ue.queue.front(), take});
            ps.unscheduled_bits -= take;
            ++ps.outstanding_tbs;
            left -= take;
            ue.queued_bits -= take;
            if (ps.unscheduled_bits == 0) {
                ue.queue.pop_front();
            }
        }
        return h;
    }

    void schedule_cell(std::size_t cell)
    {
        const int symbols = p.frame.data_symbols(slot);
        const std::size_t total = p.channel.prbs;
        std::size_t next_prb = 0;
        std::vector<Candidate> cands;
        for (std::size_t u : cell_ues[cell]) {
            UeRuntime& ue = ues[u];
            Candidate c{u};
            for (std::size_t k = 0; k < ue.harq.size(); ++k) {
                if (!ue.harq[k].awaiting) {
                    c.retx = k;
                    c.mcs = ue.harq[k].proc.mcs();
                    break;
                }
            }
            if (c.retx == std::numeric_limits<std::size_t>::max()) {
                if (!ue.has_report || (!p.traffic.full_buffer && ue.queued_bits == 0)) {
                    continue;
                }
                c.mcs = select_mcs(ue);
            }
            cands.push_back(c);
        }

        while (next_prb < total && !cands.empty()) {
            std::vector<PfCandidate> pf;
            pf.reserve(cands.size());
            for (const auto& c : cands) {
                pf.push_back({ues[c.ue].id, table.bits_per_prb(c.mcs, symbols), ues[c.ue].pf_avg,
                              c.retx != std::numeric_limits<std::size_t>::max()});
            }
            const auto winner = pf_select(pf);
            const auto it = std::find_if(cands.begin(), cands.end(),
                                         [&](const Candidate& c) { return ues[c.ue].id == *winner; });
            const Candidate c = *it;
            cands.erase(it);

            UeRuntime& ue = ues[c.ue];
            const double bpp = table.bits_per_prb(c.mcs, symbols);
            const std::size_t free = total - next_prb;
            if (c.retx != std::numeric_limits<std::size_t>::max()) {
                ActiveHarq& h = ue.harq[c.retx];
                const auto need =
                    static_cast<std::size_t>(std::ceil(static_cast<double>(h.proc.bits_to_send()) / bpp - 1e-9));
                if (need == 0 || need > free) {
                    continue;
                }
                transmit(ue, h, next_prb, need, true);
                next_prb += need;
                continue;
            }
            const auto capacity = static_cast<std::uint64_t>(std::floor(static_cast<double>(free) * bpp));
            const std::uint64_t bits = p.traffic.full_buffer ? capacity : std::min(ue.queued_bits, capacity);
            if (bits == 0) {
                continue;
            }
            const auto need = std::min(
                free, static_cast<std::size_t>(std::ceil(static_cast<double>(bits) / bpp - 1e-9)));
            ue.harq.push_back(open_process(ue, bits, c.mcs));
            transmit(ue, ue.harq.back(), next_prb, need, false);
            next_prb += need;
        }

        if (p.record_events) {
            log.prb.push_back({slot, static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(next_prb),
                               static_cast<std::uint32_t>(total)});
        }
    }

    void step()
    {
        if (finished) {
            throw std::logic_error("simulator already finished");
        }
        for (auto& ue : ues) {
            process_feedback(ue);
            while (!ue.reports.empty() && ue.reports.front().effective_slot <= slot) {
                apply_report(ue, ue.reports.front());
                ue.reports.pop_front();
            }
            if (!p.traffic.full_buffer) {
                admit_and_expire(ue);
            }
        }

        if (slot % cqi_period_slots == 0) {
            const auto s = static_cast<std::uint64_t>(sym());
            const auto delay_symbols =
                static_cast<std::uint64_t>(std::ceil(p.cqi.delay_ms / p.frame.slot_ms * static_cast<double>(s)));
            for (auto& ue : ues) {
                Report rep = measure_cqi(ue.id);
                if (!ue.has_report) {
                    // Initial report, taken as known at attach.
                    apply_report(ue, rep);
                    continue;
                }
                rep.effective_slot = gnb_visible_slot(slot, slot * s + delay_symbols);
                ue.reports.push_back(rep);
            }
        }

        if (p.frame.data_symbols(slot) > 0) {
            for (auto& a : activity) {
                std::fill(a.begin(), a.end(), 0);
            }
            for (std::size_t c = 0; c < cell_ues.size(); ++c) {
                schedule_cell(c);
            }
            last_activity = activity;
        }

        for (auto& ue : ues) {
            ue.pf_avg = pf_average_update(ue.pf_avg, ue.delivered_this_slot, pf_alpha);
            ue.delivered_this_slot = 0.0;
        }
        channel->step();
        ++slot;
    }

    SimResult finish()
    {
        finished = true;
        for (const auto& ue : ues) {
            for (const auto& ps : ue.packets) {
                if (ps.pkt.arrival_ms > slot_start_ms(slot)) {
                    continue;  // never arrived within the horizon
                }
                if (p.record_events) {
                    PacketRecord r;
                    r.ue = ue.id;
                    r.cell = static_cast<std::uint32_t>(ue.cell);
                    r.frame = ps.pkt.frame_index;
                    r.arrival_ms = ps.pkt.arrival_ms;
                    r.size_bits = ps.pkt.size_bits;
                    r.status = ps.status;
                    const bool delivered = ps.status == PacketStatus::InTime || ps.status == PacketStatus::Late;
                    r.delivery_ms = delivered ? ps.last_decode_ms : -1.0;
                    log.packets.push_back(r);
                }
            }
        }
        log.header.slots = slot;
        return {std::move(log), stats};
    }
};

Simulator::Simulator(const SimParams& params) : impl_(std::make_unique<Impl>(params)) {}

Simulator::~Simulator() = default;

void Simulator::step_slot()
{
    impl_->step();
}

std::uint64_t Simulator::slot() const
{
    return impl_->slot;
}

const SimStats& Simulator::stats() const
{
    return impl_->stats;
}

std::size_t Simulator::ue_count() const
{
    return impl_->ues.size();
}

std::size_t Simulator::serving_cell(std::size_t ue) const
{
    return impl_->ues.at(ue).cell;
}

double Simulator::olla_offset_db(std::size_t ue) const
{
    return impl_->ues.at(ue).olla.offset_db();
}

SimResult Simulator::finish()
{
    return impl_->finish();
}

SimResult simulate(const SimParams& params)
{
    Simulator sim(params);
    const std::uint64_t slots = params.horizon_slots();
    for (std::uint64_t t = 0; t < slots; ++t) {
        sim.step_slot();
    }
    return sim.finish();
}

}  // namespace xrla::sim
