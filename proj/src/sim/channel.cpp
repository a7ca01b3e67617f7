#include "xrla/sim/channel.hpp"

#include "xrla/link_map.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xrla::sim {

double distance(const Position& a, const Position& b)
{
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

void ChannelParams::validate() const
{
    if (prbs == 0) {
        throw std::domain_error("channel.prbs must be positive");
    }
    if (fading_group_prbs == 0) {
        throw std::domain_error("channel.fading_group_prbs must be positive");
    }
    if (!(carrier_ghz > 0.0) || !(scs_khz > 0.0)) {
        throw std::domain_error("channel carrier and subcarrier spacing must be positive");
    }
    if (!(pathloss_exponent > 0.0)) {
        throw std::domain_error("channel.pathloss_exponent must be positive");
    }
    if (shadowing_std_db < 0.0 || ue_speed_kmh < 0.0) {
        throw std::domain_error("channel shadowing and speed must be non-negative");
    }
}

double pathloss_db(double distance_3d_m, double carrier_ghz, double exponent)
{
    const double d = std::max(distance_3d_m, 1.0);
    return 32.4 + 10.0 * exponent * std::log10(d) + 20.0 * std::log10(carrier_ghz);
}

double fading_ar_coefficient(double speed_kmh, double carrier_ghz, double step_s)
{
    const double doppler_hz = speed_kmh / 3.6 * carrier_ghz * 1e9 / 299792458.0;
    return std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * doppler_hz * step_s);
}

double prb_noise_mw(double scs_khz, double noise_figure_db)
{
    const double bw_hz = 12.0 * scs_khz * 1e3;
    return link::db_to_linear(-174.0 + 10.0 * std::log10(bw_hz) + noise_figure_db);
}

double sinr_from_powers(double signal_mw, std::span<const double> interferers_mw, double noise_mw)
{
    double denom = noise_mw;
    for (double i : interferers_mw) {
        denom += i;
    }
    if (!(denom > 0.0)) {
        throw std::domain_error("interference plus noise must be positive");
    }
    return signal_mw / denom;
}

FadingProcess::FadingProcess(std::size_t taps, double ar_coefficient, std::mt19937_64& rng)
    : a_(ar_coefficient), taps_(taps)
{
    if (!(std::abs(a_) <= 1.0)) {
        throw std::domain_error("AR coefficient must lie in [-1, 1]");
    }
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    for (auto& h : taps_) {
        const double re = n(rng);
        h = {re, n(rng)};
    }
}

void FadingProcess::step(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double innov = std::sqrt(std::max(0.0, 1.0 - a_ * a_));
    for (auto& h : taps_) {
        const double re = n(rng);
        const std::complex<double> w{re, n(rng)};
        h = a_ * h + innov * w;
    }
}

Channel::Channel(const ChannelParams& params, std::vector<Position> cells, std::vector<Position> ues,
                 std::span<const double> shadowing_db, std::uint64_t fading_seed, double slot_s)
    : params_(params),
      cells_(std::move(cells)),
      ues_(std::move(ues)),
      serving_(ues_.size(), 0),
      fading_rng_(fading_seed),
      noise_mw_(prb_noise_mw(params.scs_khz, params.noise_figure_db)),
      prb_power_dbm_(params.tx_power_dbm - 10.0 * std::log10(static_cast<double>(params.prbs)))
{
    params_.validate();
    if (cells_.empty()) {
        throw std::domain_error("channel needs at least one cell");
    }
    if (!shadowing_db.empty() && shadowing_db.size() != ues_.size() * cells_.size()) {
        throw std::invalid_argument("shadowing needs one value per UE-cell pair");
    }
    pathloss_shadow_db_.reserve(ues_.size() * cells_.size());
    for (std::size_t u = 0; u < ues_.size(); ++u) {
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            const double sf = shadowing_db.empty() ? 0.0 : shadowing_db[u * cells_.size() + c];
            pathloss_shadow_db_.push_back(
                pathloss_db(distance(ues_[u], cells_[c]), params_.carrier_ghz, params_.pathloss_exponent) + sf);
        }
    }
    const std::size_t groups = (params_.prbs + params_.fading_group_prbs - 1) / params_.fading_group_prbs;
    const double a = params_.fading ? fading_ar_coefficient(params_.ue_speed_kmh, params_.carrier_ghz, slot_s) : 1.0;
    fading_.reserve(ues_.size() * cells_.size());
    for (std::size_t k = 0; k < ues_.size() * cells_.size(); ++k) {
        fading_.emplace_back(groups, a, fading_rng_);
    }
}

double Channel::rsrp_dbm(std::size_t ue, std::size_t cell) const
{
    return prb_power_dbm_ - pathloss_shadow_db_[ue * cells_.size() + cell];
}

void Channel::set_serving(std::size_t ue, std::size_t cell)
{
    if (cell >= cells_.size()) {
        throw std::out_of_range("serving cell index out of range");
    }
    serving_[ue] = cell;
}

void Channel::step()
{
    if (!params_.fading) {
        return;
    }
    for (auto& f : fading_) {
        f.step(fading_rng_);
    }
}

double Channel::gain_mw(std::size_t ue, std::size_t cell) const
{
    const double bf = cell == serving_[ue] ? params_.serving_bf_gain_db : params_.interferer_bf_gain_db;
    return link::db_to_linear(rsrp_dbm(ue, cell) + bf);
}

std::vector<double> Channel::sinr(std::size_t ue, std::span<const std::vector<std::uint8_t>> activity) const
{
    const std::size_t cells = cells_.size();
    const std::size_t own = serving_[ue];
    std::vector<double> gains(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        gains[c] = gain_mw(ue, c);
    }
    std::vector<double> out(params_.prbs);
    for (std::size_t prb = 0; prb < params_.prbs; ++prb) {
        const std::size_t g = prb / params_.fading_group_prbs;
        auto fade = [&](std::size_t c) { return params_.fading ? fading_[ue * cells + c].power(g) : 1.0; };
        double interference = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            if (c != own && c < activity.size() && activity[c][prb] != 0) {
                interference += gains[c] * fade(c);
            }
        }
        out[prb] = gains[own] * fade(own) / (interference + noise_mw_);
    }
    return out;
}

}  // namespace xrla::sim
