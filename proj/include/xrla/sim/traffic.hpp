#pragma once

// XR downlink traffic: quasi-periodic video frames with truncated-Gaussian
// jitter and frame sizes.

#include <cstdint>
#include <random>
#include <vector>

namespace xrla::sim {

struct TruncGaussianParams {
    double mean = 0.0;
    double stddev = 1.0;
    double lower = -1.0;
    double upper = 1.0;

    /// Throws std::domain_error unless lower <= upper and stddev > 0.
    void validate() const;
};

/// Mean of the truncated distribution.
double trunc_gaussian_mean(const TruncGaussianParams& params);

/// Inverse-CDF sample, always inside [lower, upper].
double sample_trunc_gaussian(const TruncGaussianParams& params, std::mt19937_64& rng);

struct XrPacket {
    std::uint64_t frame_index = 0;
    double arrival_ms = 0.0;
    std::uint64_t size_bits = 0;
    double deadline_ms = 0.0;
};

struct TrafficParams {
    double fps = 60.0;
    TruncGaussianParams jitter_ms{0.0, 2.0, -4.0, 4.0};
    TruncGaussianParams frame_kbytes{93.0, 10.0, 46.0, 140.0};
    /// Multiplies sampled frame sizes (bandwidth scaling of the source rate).
    double size_scale = 1.0;
    double pdb_ms = 10.0;
    /// Ignore frames and keep every buffer permanently backlogged.
    bool full_buffer = false;

    void validate() const;
};

/// Frames f = 1, 2, ... whose nominal time f * 1000 / fps + offset_ms does not
/// exceed horizon_ms. Frame f arrives at its nominal time plus jitter J_f.
/// Sizes are drawn from frame_kbytes (1 kB = 8000 bits) times size_scale.
std::vector<XrPacket> generate_traffic(const TrafficParams& params, double horizon_ms, std::mt19937_64& rng,
                                       double offset_ms = 0.0);

}  // namespace xrla::sim
