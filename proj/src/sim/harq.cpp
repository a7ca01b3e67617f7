#include "xrla/sim/harq.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace xrla::sim {

TbSegmentation segment_tb(std::uint64_t tb_bits, unsigned max_cbgs)
{
    if (tb_bits == 0) {
        throw std::domain_error("transport block must carry at least one bit");
    }
    if (max_cbgs != 2 && max_cbgs != 4 && max_cbgs != 6 && max_cbgs != 8) {
        throw std::domain_error("maximum CBGs per TB must be 2, 4, 6 or 8");
    }
    const std::size_t c = (tb_bits + link::kMaxCodeBlockBits - 1) / link::kMaxCodeBlockBits;
    const std::size_t m = std::min<std::size_t>(max_cbgs, c);
    return {c, m, link::CbgLayout(c, m)};
}

bool CbgFeedback::all_acked() const
{
    return std::all_of(ack.begin(), ack.end(), [](bool b) { return b; });
}

std::size_t CbgFeedback::nack_count() const
{
    return static_cast<std::size_t>(std::count(ack.begin(), ack.end(), false));
}

HarqProcess::HarqProcess(std::uint32_t id, std::uint64_t tb_bits, link::CbgLayout layout, std::size_t mcs,
                         unsigned max_attempts)
    : id_(id),
      tb_bits_(tb_bits),
      layout_(std::move(layout)),
      mcs_(mcs),
      max_attempts_(max_attempts),
      states_(layout_.cbg_count(), CbgState::Pending),
      accumulated_(layout_.cb_count(), 0.0),
      decoded_(layout_.cb_count(), false)
{
    if (max_attempts_ == 0) {
        throw std::domain_error("HARQ needs at least one attempt");
    }
}

bool HarqProcess::complete() const
{
    return std::all_of(states_.begin(), states_.end(), [](CbgState s) { return s == CbgState::Acked; });
}

bool HarqProcess::exhausted() const
{
    return attempts_ >= max_attempts_ && !complete();
}

std::vector<std::size_t> HarqProcess::cbs_to_send() const
{
    std::vector<std::size_t> cbs;
    for (std::size_t m = 0; m < states_.size(); ++m) {
        if (states_[m] == CbgState::Acked) {
            continue;
        }
        const auto [first, last] = layout_.group_range(m);
        for (std::size_t cb = first; cb < last; ++cb) {
            cbs.push_back(cb);
        }
    }
    return cbs;
}

std::uint64_t HarqProcess::bits_to_send() const
{
    const std::size_t sent = cbs_to_send().size();
    return tb_bits_ * sent / layout_.cb_count();
}

CbgFeedback HarqProcess::transmit(std::span<const double> sinr_linear, const link::McsEntry& entry,
                                  std::mt19937_64& rng)
{
    if (attempts_ >= max_attempts_) {
        throw std::logic_error("HARQ process has no attempts left");
    }
    const auto cbs = cbs_to_send();
    if (cbs.size() != sinr_linear.size()) {
        throw std::invalid_argument("one SINR value is needed per transmitted CB");
    }
    ++attempts_;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < cbs.size(); ++k) {
        const std::size_t cb = cbs[k];
        accumulated_[cb] += sinr_linear[k];
        // One draw per transmitted CB keeps the random stream independent of
        // earlier outcomes.
        const double u = unit(rng);
        if (!decoded_[cb]) {
            const double p = link::bler(link::linear_to_db(accumulated_[cb]), entry);
            decoded_[cb] = u >= p;
        }
    }

    CbgFeedback fb;
    fb.process_id = id_;
    fb.ack.resize(states_.size());
    for (std::size_t m = 0; m < states_.size(); ++m) {
        const auto [first, last] = layout_.group_range(m);
        bool ok = true;
        for (std::size_t cb = first; cb < last; ++cb) {
            ok = ok && decoded_[cb];
        }
        states_[m] = ok ? CbgState::Acked : CbgState::Nacked;
        fb.ack[m] = ok;
    }
    return fb;
}

}  // namespace xrla::sim
