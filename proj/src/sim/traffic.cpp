#include "xrla/sim/traffic.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace xrla::sim {

namespace {

const boost::math::normal kStdNormal;

}  // namespace

void TruncGaussianParams::validate() const
{
    if (!(stddev > 0.0) || !std::isfinite(stddev)) {
        throw std::domain_error("truncated Gaussian: stddev must be positive");
    }
    if (!(lower <= upper)) {
        throw std::domain_error("truncated Gaussian: lower bound exceeds upper bound");
    }
}

double trunc_gaussian_mean(const TruncGaussianParams& params)
{
    params.validate();
    const double alpha = (params.lower - params.mean) / params.stddev;
    const double beta = (params.upper - params.mean) / params.stddev;
    const double mass = boost::math::cdf(kStdNormal, beta) - boost::math::cdf(kStdNormal, alpha);
    if (!(mass > 0.0)) {
        return std::clamp(params.mean, params.lower, params.upper);
    }
    const double shift = (boost::math::pdf(kStdNormal, alpha) - boost::math::pdf(kStdNormal, beta)) / mass;
    return params.mean + params.stddev * shift;
}

double sample_trunc_gaussian(const TruncGaussianParams& params, std::mt19937_64& rng)
{
    params.validate();
    double alpha = (params.lower - params.mean) / params.stddev;
    double beta = (params.upper - params.mean) / params.stddev;
    // Work in the left half so the CDF values keep their precision.
    const bool mirrored = alpha > 0.0;
    if (mirrored) {
        std::swap(alpha, beta);
        alpha = -alpha;
        beta = -beta;
    }
    const double pa = boost::math::cdf(kStdNormal, alpha);
    const double pb = boost::math::cdf(kStdNormal, beta);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double z = 0.0;
    if (pb - pa > 0.0) {
        const double v = pa + u * (pb - pa);
        const double tiny = std::numeric_limits<double>::min();
        z = boost::math::quantile(kStdNormal, std::clamp(v, tiny, 1.0 - 1e-16));
        z = std::clamp(z, alpha, beta);
    } else {
        // The interval sits too far in a tail to resolve; its near end is
        // where all the mass is.
        z = alpha;
    }
    if (mirrored) {
        z = -z;
    }
    return std::clamp(params.mean + params.stddev * z, params.lower, params.upper);
}

void TrafficParams::validate() const
{
    if (!(fps > 0.0)) {
        throw std::domain_error("traffic.fps must be positive");
    }
    jitter_ms.validate();
    frame_kbytes.validate();
    if (frame_kbytes.lower < 0.0) {
        throw std::domain_error("traffic frame size bounds must be non-negative");
    }
    if (!(size_scale > 0.0)) {
        throw std::domain_error("traffic.size_scale must be positive");
    }
    if (!(pdb_ms > 0.0)) {
        throw std::domain_error("traffic.pdb_ms must be positive");
    }
}

std::vector<XrPacket> generate_traffic(const TrafficParams& params, double horizon_ms, std::mt19937_64& rng,
                                       double offset_ms)
{
    params.validate();
    std::vector<XrPacket> packets;
    for (std::uint64_t f = 1;; ++f) {
        const double nominal = static_cast<double>(f) * 1000.0 / params.fps + offset_ms;
        if (nominal > horizon_ms) {
            break;
        }
        XrPacket pkt;
        pkt.frame_index = f;
        pkt.arrival_ms = nominal + sample_trunc_gaussian(params.jitter_ms, rng);
        const double kbytes = sample_trunc_gaussian(params.frame_kbytes, rng);
        pkt.size_bits = static_cast<std::uint64_t>(std::llround(kbytes * 8000.0 * params.size_scale));
        pkt.deadline_ms = pkt.arrival_ms + params.pdb_ms;
        packets.push_back(pkt);
    }
    return packets;
}

}  // namespace xrla::sim
