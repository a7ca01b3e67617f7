#pragma once

// TB segmentation into CBs/CBGs and HARQ processes with Chase combining.

#include "xrla/link_map.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace xrla::sim {

struct TbSegmentation {
    std::size_t cb_count;
    std::size_t cbg_count;
    link::CbgLayout layout;
};

/// C = ceil(tb_bits / 8448), M = min(F, C). Throws std::domain_error for
/// tb_bits == 0 or F outside {2, 4, 6, 8}.
TbSegmentation segment_tb(std::uint64_t tb_bits, unsigned max_cbgs);

/// One ACK (true) / NACK (false) bit per CBG of a process.
struct CbgFeedback {
    std::uint32_t process_id = 0;
    std::vector<bool> ack;
    std::uint64_t delay_slots = 0;

    bool all_acked() const;
    std::size_t nack_count() const;
};

enum class CbgState : std::uint8_t { Pending, Acked, Nacked };

/// Retransmissions resend every CB of each non-ACKed CBG. Decoding uses the
/// Chase-combined SINR (linear sum over attempts) of each CB; a CB that
/// decoded once stays decoded, and a CBG is ACKed once all its CBs are.
class HarqProcess {
public:
    HarqProcess(std::uint32_t id, std::uint64_t tb_bits, link::CbgLayout layout, std::size_t mcs,
                unsigned max_attempts = 4);

    std::uint32_t id() const { return id_; }
    std::uint64_t tb_bits() const { return tb_bits_; }
    std::size_t mcs() const { return mcs_; }
    const link::CbgLayout& layout() const { return layout_; }
    unsigned attempts() const { return attempts_; }
    unsigned max_attempts() const { return max_attempts_; }
    std::span<const CbgState> cbg_states() const { return states_; }
    std::span<const double> accumulated_sinr() const { return accumulated_; }

    bool complete() const;
    /// Attempts used up without every CBG ACKed.
    bool exhausted() const;

    /// CBs of every CBG that still needs (re)transmission, ascending.
    std::vector<std::size_t> cbs_to_send() const;
    /// Bits of those CBs, pro rata of the TB size.
    std::uint64_t bits_to_send() const;

    /// Runs one attempt: adds sinr_linear[k] to CB cbs_to_send()[k], draws a
    /// decode outcome per undecoded CB and returns the per-CBG feedback.
    CbgFeedback transmit(std::span<const double> sinr_linear, const link::McsEntry& entry, std::mt19937_64& rng);

private:
    std::uint32_t id_;
    std::uint64_t tb_bits_;
    link::CbgLayout layout_;
    std::size_t mcs_;
    unsigned max_attempts_;
    unsigned attempts_ = 0;
    std::vector<CbgState> states_;
    std::vector<double> accumulated_;
    std::vector<bool> decoded_;
};

}  // namespace xrla::sim
