#include "xrla/sim/scheduler.hpp"

#include <algorithm>
#include <limits>

namespace xrla::sim {

namespace {

double metric(const PfCandidate& c)
{
    const double avg = std::max(c.average, std::numeric_limits<double>::min());
    return c.rate / avg;
}

}  // namespace

std::optional<std::uint32_t> pf_select(std::span<const PfCandidate> candidates)
{
    const bool any_retx =
        std::any_of(candidates.begin(), candidates.end(), [](const PfCandidate& c) { return c.retransmission; });
    const PfCandidate* best = nullptr;
    for (const auto& c : candidates) {
        if (any_retx && !c.retransmission) {
            continue;
        }
        if (best == nullptr) {
            best = &c;
            continue;
        }
        const double mc = metric(c);
        const double mb = metric(*best);
        if (mc > mb || (mc == mb && c.ue < best->ue)) {
            best = &c;
        }
    }
    if (best == nullptr) {
        return std::nullopt;
    }
    return best->ue;
}

double pf_average_update(double average, double delivered, double alpha)
{
    return (1.0 - alpha) * average + alpha * delivered;
}

}  // namespace xrla::sim
