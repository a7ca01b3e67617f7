#pragma once

// Simplified indoor downlink channel: distance pathloss, log-normal
// shadowing, fixed beamforming gains and per-PRB-group Rayleigh fading that
// evolves as a first-order autoregressive process.

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace xrla::sim {

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

double distance(const Position& a, const Position& b);

struct ChannelParams {
    double carrier_ghz = 4.0;
    double tx_power_dbm = 24.0;  ///< total over all PRBs
    std::size_t prbs = 51;
    double scs_khz = 30.0;
    double noise_figure_db = 9.0;
    double pathloss_exponent = 3.0;
    double shadowing_std_db = 6.0;
    double serving_bf_gain_db = 15.0;
    double interferer_bf_gain_db = 3.0;
    double ue_speed_kmh = 3.0;
    std::size_t fading_group_prbs = 12;  ///< about the indoor coherence bandwidth
    bool fading = true;
    double gnb_height_m = 3.0;
    double ue_height_m = 1.5;

    void validate() const;
};

/// 32.4 + 10 n log10(d_3D) + 20 log10(f_c[GHz]) dB, with d_3D >= 1 m.
double pathloss_db(double distance_3d_m, double carrier_ghz, double exponent);

/// AR(1) coefficient J0(2 pi f_d T) for the given speed, carrier and step.
double fading_ar_coefficient(double speed_kmh, double carrier_ghz, double step_s);

/// Thermal noise over one PRB (12 subcarriers), in mW.
double prb_noise_mw(double scs_khz, double noise_figure_db);

/// signal / (sum(interferers) + noise), all linear.
double sinr_from_powers(double signal_mw, std::span<const double> interferers_mw, double noise_mw);

/// Unit-power complex Gaussian taps h[k+1] = a h[k] + sqrt(1 - a^2) w[k].
class FadingProcess {
public:
    FadingProcess(std::size_t taps, double ar_coefficient, std::mt19937_64& rng);

    void step(std::mt19937_64& rng);
    std::span<const std::complex<double>> taps() const { return taps_; }
    double power(std::size_t k) const { return std::norm(taps_[k]); }

private:
    double a_;
    std::vector<std::complex<double>> taps_;
};

/// Links from every UE to every cell. Interferers contribute only on PRBs
/// flagged in the activity masks passed to sinr().
class Channel {
public:
    /// shadowing_db holds one value per (ue, cell), ue-major; empty means
    /// none. Fading has its own stream seeded from fading_seed so that it does
    /// not depend on scheduling decisions.
    Channel(const ChannelParams& params, std::vector<Position> cells, std::vector<Position> ues,
            std::span<const double> shadowing_db, std::uint64_t fading_seed, double slot_s);

    const ChannelParams& params() const { return params_; }
    std::size_t cell_count() const { return cells_.size(); }
    std::size_t ue_count() const { return ues_.size(); }

    /// Large-scale received power per PRB before beamforming (dBm).
    double rsrp_dbm(std::size_t ue, std::size_t cell) const;

    void set_serving(std::size_t ue, std::size_t cell);
    std::size_t serving(std::size_t ue) const { return serving_[ue]; }

    /// Advances all fading processes by one slot.
    void step();

    /// Per-PRB linear SINR of ue; activity[c][prb] != 0 marks interfering use.
    std::vector<double> sinr(std::size_t ue, std::span<const std::vector<std::uint8_t>> activity) const;

private:
    double gain_mw(std::size_t ue, std::size_t cell) const;

    ChannelParams params_;
    std::vector<Position> cells_;
    std::vector<Position> ues_;
    std::vector<std::size_t> serving_;
    std::vector<double> pathloss_shadow_db_;  // ue-major, cell-minor
    std::vector<FadingProcess> fading_;       // ue-major, cell-minor
    std::mt19937_64 fading_rng_;
    double noise_mw_;
    double prb_power_dbm_;
};

}  // namespace xrla::sim
