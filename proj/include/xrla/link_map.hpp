#pragma once

// Link-to-system mapping: MCS table, parametric BLER curves, effective SINR
// compression (EESM / MMIB) and per-CB error probabilities.

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace xrla::link {

/// Lower/upper clamp applied to every CB error probability.
inline constexpr double kMinCbErrorProb = 1e-12;
inline constexpr double kMaxCbErrorProb = 1.0 - 1e-12;

/// Maximum LDPC code block size in bits.
inline constexpr std::size_t kMaxCodeBlockBits = 8448;

struct McsEntry {
    std::size_t index = 0;
    int modulation_order = 2;        ///< bits per symbol: 2, 4, 6 or 8
    double code_rate = 0.0;          ///< in (0, 1)
    double spectral_efficiency = 0;  ///< bits per RE
    double bler_midpoint_db = 0.0;   ///< SINR at which BLER = 0.5
    double bler_slope = 2.0;         ///< logistic steepness, 1/dB
};

/// Ordered MCS list. Construction validates ordering and checks over a dB
/// grid that BLER never decreases from one index to the next.
class McsTable {
public:
    explicit McsTable(std::vector<McsEntry> entries);

    /// 28-entry 256QAM table (QPSK 0.12 .. 256QAM 0.93). Midpoints sit at the
    /// Shannon SINR of each spectral efficiency plus gap_db.
    static McsTable nr_256qam(double slope = 2.0, double gap_db = 1.5);

    /// Same modulation/rate ladder with explicit midpoints (one per entry).
    static McsTable nr_256qam_with_midpoints(std::span<const double> midpoints_db, double slope);

    std::size_t size() const { return entries_.size(); }
    const McsEntry& operator[](std::size_t r) const { return entries_[r]; }
    std::span<const McsEntry> entries() const { return entries_; }

    /// Index whose midpoint is nearest to sinr_db (ties go to the lower index).
    std::size_t nearest_by_midpoint(double sinr_db) const;

    /// Information bits carried by one PRB over data_symbols symbols.
    double bits_per_prb(std::size_t r, int data_symbols) const;

private:
    std::vector<McsEntry> entries_;
};

/// Logistic BLER curve: 1 / (1 + exp(slope * (sinr - midpoint))).
double bler(double sinr_db, const McsEntry& entry);

double db_to_linear(double db);
double linear_to_db(double linear);

/// Piecewise-linear, strictly increasing per-bit mutual information curve
/// (SINR in dB -> MI in [0, 1]) for one modulation order.
class MiCurve {
public:
    MiCurve(std::vector<double> sinr_db, std::vector<double> mi);

    double mi(double sinr_linear) const;
    /// Inverse of mi(); saturates at the table ends.
    double sinr_linear(double mi) const;

    std::span<const double> sinr_db_points() const { return sinr_db_; }
    std::span<const double> mi_points() const { return mi_; }

private:
    std::vector<double> sinr_db_;
    std::vector<double> mi_;
};

/// Effective-SINR compression of per-RE SINR samples.
class EffectiveSinrMapper {
public:
    /// EESM with beta taken per MCS (beta = spectral efficiency).
    EffectiveSinrMapper() = default;

    /// EESM with one fixed beta for every MCS.
    static EffectiveSinrMapper eesm(double beta);

    /// MMIB with curves keyed by modulation order; orders without a curve fall
    /// back to EESM.
    static EffectiveSinrMapper mmib(std::map<int, MiCurve> curves);

    /// Compressed SINR (linear) for transmission with the given MCS entry.
    double effective(std::span<const double> sinr_linear, const McsEntry& entry) const;

    /// Weighted variant; weights are RE counts per sample.
    double effective(std::span<const double> sinr_linear, std::span<const double> weights,
                     const McsEntry& entry) const;

    bool uses_mmib() const { return !curves_.empty(); }

private:
    double fixed_beta_ = 0.0;  ///< 0 => per-MCS beta
    std::map<int, MiCurve> curves_;
};

/// EESM: -beta * ln(mean(exp(-gamma_k / beta))). Throws std::domain_error on
/// an empty list, negative SINR or beta <= 0.
double eesm(std::span<const double> sinr_linear, double beta);
double eesm(std::span<const double> sinr_linear, std::span<const double> weights, double beta);

/// MMIB: average per-bit MI through curve, mapped back to SINR.
double mmib(std::span<const double> sinr_linear, const MiCurve& curve);
double mmib(std::span<const double> sinr_linear, std::span<const double> weights, const MiCurve& curve);

/// Partition of C code blocks into M groups: the first (C mod M) groups get
/// ceil(C/M) CBs, the rest floor(C/M), in index order.
class CbgLayout {
public:
    CbgLayout(std::size_t cb_count, std::size_t cbg_count);

    std::size_t cb_count() const { return cb_count_; }
    std::size_t cbg_count() const { return group_sizes_.size(); }
    std::span<const std::size_t> group_sizes() const { return group_sizes_; }
    /// [first, last) CB indices of group m.
    std::pair<std::size_t, std::size_t> group_range(std::size_t m) const;
    std::size_t group_of(std::size_t cb) const;

private:
    std::size_t cb_count_;
    std::vector<std::size_t> group_sizes_;
    std::vector<std::size_t> group_starts_;
};

/// Per-CB effective SINR (dB) plus the CB -> CBG grouping.
struct CbSinrProfile {
    std::vector<double> per_cb_sinr_db;
    CbgLayout layout;

    CbSinrProfile(std::vector<double> sinr_db, CbgLayout cbg_layout);
    /// Evenly grouped profile with cbg_count groups.
    CbSinrProfile(std::vector<double> sinr_db, std::size_t cbg_count);
};

/// BLER per CB, clamped to [kMinCbErrorProb, kMaxCbErrorProb].
std::vector<double> cb_error_probs(const CbSinrProfile& profile, const McsEntry& entry);

/// CBG error probabilities from cb_error_probs() through 1 - prod(1 - p_i),
/// clamped to the same range.
std::vector<double> cbg_error_probs(const CbSinrProfile& profile, const McsEntry& entry);

}  // namespace xrla::link
