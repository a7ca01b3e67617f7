#pragma once

// Proportional-fair PRB assignment.

#include <cstdint>
#include <optional>
#include <span>

namespace xrla::sim {

struct PfCandidate {
    std::uint32_t ue = 0;
    double rate = 0.0;     ///< estimated bits per PRB at the selected MCS
    double average = 0.0;  ///< smoothed delivered throughput
    bool retransmission = false;
};

/// Winner of one PRB: retransmissions go first, then argmax rate / average,
/// ties to the lowest UE id. Empty input yields no allocation.
std::optional<std::uint32_t> pf_select(std::span<const PfCandidate> candidates);

/// One exponential-smoothing step of the PF average.
double pf_average_update(double average, double delivered, double alpha);

}  // namespace xrla::sim
