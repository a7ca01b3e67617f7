#include "xrla/link_map.hpp"

#include "xrla/probability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace xrla::link {

namespace {

struct RateRow {
    int qm;
    double rate_x1024;
};

// Modulation order and target code rate (x1024) of the 28-entry 256QAM table.
constexpr std::array<RateRow, 28> kNr256QamRows{{
    {2, 120},   {2, 193},   {2, 308},   {2, 449},   {2, 602},   {4, 378},   {4, 434},
    {4, 490},   {4, 553},   {4, 616},   {4, 658},   {6, 466},   {6, 517},   {6, 567},
    {6, 616},   {6, 666},   {6, 719},   {6, 772},   {6, 822},   {6, 873},   {8, 682.5},
    {8, 711},   {8, 754},   {8, 797},   {8, 841},   {8, 885},   {8, 916.5}, {8, 948},
}};

constexpr double kGridLowDb = -30.0;
constexpr double kGridHighDb = 60.0;
constexpr double kGridStepDb = 0.1;

std::vector<McsEntry> ladder_entries()
{
    std::vector<McsEntry> entries;
    entries.reserve(kNr256QamRows.size());
    for (std::size_t r = 0; r < kNr256QamRows.size(); ++r) {
        McsEntry e;
        e.index = r;
        e.modulation_order = kNr256QamRows[r].qm;
        e.code_rate = kNr256QamRows[r].rate_x1024 / 1024.0;
        e.spectral_efficiency = e.modulation_order * e.code_rate;
        entries.push_back(e);
    }
    return entries;
}

void check_weights(std::span<const double> values, std::span<const double> weights)
{
    if (values.empty()) {
        throw std::domain_error("effective SINR needs at least one sample");
    }
    if (values.size() != weights.size()) {
        throw std::domain_error("SINR samples and weights differ in length");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] >= 0.0)) {
            throw std::domain_error("linear SINR samples must be non-negative");
        }
        if (!(weights[k] >= 0.0)) {
            throw std::domain_error("weights must be non-negative");
        }
        total += weights[k];
    }
    if (!(total > 0.0)) {
        throw std::domain_error("weights must not all be zero");
    }
}

double clamp_between_samples(double value, std::span<const double> values)
{
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return std::clamp(value, *lo, *hi);
}

}  // namespace

McsTable::McsTable(std::vector<McsEntry> entries)
    : entries_(std::move(entries))
{
    if (entries_.size() < 2) {
        throw std::domain_error("MCS table needs at least two entries");
    }
    for (std::size_t r = 0; r < entries_.size(); ++r) {
        const McsEntry& e = entries_[r];
        if (e.index != r) {
            throw std::domain_error("MCS indices must be contiguous from 0");
        }
        if (e.modulation_order != 2 && e.modulation_order != 4 && e.modulation_order != 6 &&
            e.modulation_order != 8) {
            throw std::domain_error("MCS " + std::to_string(r) + ": modulation order must be 2, 4, 6 or 8");
        }
        if (!(e.code_rate > 0.0 && e.code_rate < 1.0)) {
            throw std::domain_error("MCS " + std::to_string(r) + ": code rate must lie in (0, 1)");
        }
        if (!(e.bler_slope > 0.0) || !std::isfinite(e.bler_midpoint_db)) {
            throw std::domain_error("MCS " + std::to_string(r) + ": invalid BLER curve parameters");
        }
        if (r > 0) {
            const McsEntry& prev = entries_[r - 1];
            if (!(e.spectral_efficiency > prev.spectral_efficiency)) {
                throw std::domain_error("MCS entries must be strictly ordered by spectral efficiency");
            }
            if (!(e.bler_midpoint_db > prev.bler_midpoint_db)) {
                throw std::domain_error("BLER midpoints must increase strictly with MCS index");
            }
        }
    }
    // With differing slopes adjacent curves may cross; reject that.
    for (std::size_t r = 1; r < entries_.size(); ++r) {
        for (double s = kGridLowDb; s <= kGridHighDb; s += kGridStepDb) {
            if (bler(s, entries_[r - 1]) > bler(s, entries_[r])) {
                throw std::domain_error("BLER of MCS " + std::to_string(r - 1) + " exceeds MCS " +
                                        std::to_string(r) + " at " + std::to_string(s) + " dB");
            }
        }
    }
}

McsTable McsTable::nr_256qam(double slope, double gap_db)
{
    std::vector<McsEntry> entries = ladder_entries();
    for (McsEntry& e : entries) {
        e.bler_midpoint_db = linear_to_db(std::exp2(e.spectral_efficiency) - 1.0) + gap_db;
        e.bler_slope = slope;
    }
    return McsTable(std::move(entries));
}

McsTable McsTable::nr_256qam_with_midpoints(std::span<const double> midpoints_db, double slope)
{
    std::vector<McsEntry> entries = ladder_entries();
    if (midpoints_db.size() != entries.size()) {
        throw std::domain_error("expected " + std::to_string(entries.size()) + " BLER midpoints, got " +
                                std::to_string(midpoints_db.size()));
    }
    for (std::size_t r = 0; r < entries.size(); ++r) {
        entries[r].bler_midpoint_db = midpoints_db[r];
        entries[r].bler_slope = slope;
    }
    return McsTable(std::move(entries));
}

std::size_t McsTable::nearest_by_midpoint(double sinr_db) const
{
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const McsEntry& e : entries_) {
        const double dist = std::abs(e.bler_midpoint_db - sinr_db);
        if (dist < best_dist) {
            best_dist = dist;
            best = e.index;
        }
    }
    return best;
}

double McsTable::bits_per_prb(std::size_t r, int data_symbols) const
{
    constexpr int kSubcarriersPerPrb = 12;
    return kSubcarriersPerPrb * data_symbols * entries_.at(r).spectral_efficiency;
}

double bler(double sinr_db, const McsEntry& entry)
{
    const double x = entry.bler_slope * (sinr_db - entry.bler_midpoint_db);
    // 1 / (1 + e^x) written to stay finite for large |x|.
    if (x >= 0.0) {
        const double t = std::exp(-x);
        return t / (1.0 + t);
    }
    return 1.0 / (1.0 + std::exp(x));
}

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

double linear_to_db(double linear)
{
    return 10.0 * std::log10(linear);
}

MiCurve::MiCurve(std::vector<double> sinr_db, std::vector<double> mi)
    : sinr_db_(std::move(sinr_db)), mi_(std::move(mi))
{
    if (sinr_db_.size() < 2 || sinr_db_.size() != mi_.size()) {
        throw std::domain_error("MI curve needs at least two (SINR, MI) points");
    }
    for (std::size_t k = 0; k < mi_.size(); ++k) {
        if (!(mi_[k] >= 0.0 && mi_[k] <= 1.0)) {
            throw std::domain_error("per-bit MI must lie in [0, 1]");
        }
        if (k > 0 && !(sinr_db_[k] > sinr_db_[k - 1] && mi_[k] > mi_[k - 1])) {
            throw std::domain_error("MI curve must be strictly increasing");
        }
    }
}

double MiCurve::mi(double sinr_linear) const
{
    if (sinr_linear <= 0.0) {
        return mi_.front();
    }
    const double db = linear_to_db(sinr_linear);
    if (db <= sinr_db_.front()) {
        return mi_.front();
    }
    if (db >= sinr_db_.back()) {
        return mi_.back();
    }
    const auto it = std::upper_bound(sinr_db_.begin(), sinr_db_.end(), db);
    const auto k = static_cast<std::size_t>(it - sinr_db_.begin());
    const double t = (db - sinr_db_[k - 1]) / (sinr_db_[k] - sinr_db_[k - 1]);
    return mi_[k - 1] + t * (mi_[k] - mi_[k - 1]);
}

double MiCurve::sinr_linear(double mi) const
{
    if (mi <= mi_.front()) {
        return db_to_linear(sinr_db_.front());
    }
    if (mi >= mi_.back()) {
        return db_to_linear(sinr_db_.back());
    }
    const auto it = std::upper_bound(mi_.begin(), mi_.end(), mi);
    const auto k = static_cast<std::size_t>(it - mi_.begin());
    const double t = (mi - mi_[k - 1]) / (mi_[k] - mi_[k - 1]);
    return db_to_linear(sinr_db_[k - 1] + t * (sinr_db_[k] - sinr_db_[k - 1]));
}

EffectiveSinrMapper EffectiveSinrMapper::eesm(double beta)
{
    if (!(beta > 0.0)) {
        throw std::domain_error("EESM beta must be positive");
    }
    EffectiveSinrMapper m;
    m.fixed_beta_ = beta;
    return m;
}

EffectiveSinrMapper EffectiveSinrMapper::mmib(std::map<int, MiCurve> curves)
{
    EffectiveSinrMapper m;
    m.curves_ = std::move(curves);
    return m;
}

double EffectiveSinrMapper::effective(std::span<const double> sinr_linear, const McsEntry& entry) const
{
    const std::vector<double> ones(sinr_linear.size(), 1.0);
    return effective(sinr_linear, ones, entry);
}

double EffectiveSinrMapper::effective(std::span<const double> sinr_linear, std::span<const double> weights,
                                      const McsEntry& entry) const
{
    if (const auto it = curves_.find(entry.modulation_order); it != curves_.end()) {
        return link::mmib(sinr_linear, weights, it->second);
    }
    const double beta = fixed_beta_ > 0.0 ? fixed_beta_ : entry.spectral_efficiency;
    return link::eesm(sinr_linear, weights, beta);
}

double eesm(std::span<const double> sinr_linear, double beta)
{
    const std::vector<double> ones(sinr_linear.size(), 1.0);
    return eesm(sinr_linear, ones, beta);
}

double eesm(std::span<const double> sinr_linear, std::span<const double> weights, double beta)
{
    check_weights(sinr_linear, weights);
    if (!(beta > 0.0)) {
        throw std::domain_error("EESM beta must be positive");
    }
    // Log-sum-exp keeps large gamma / beta from underflowing.
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sinr_linear.size(); ++k) {
        if (weights[k] > 0.0) {
            top = std::max(top, -sinr_linear[k] / beta);
        }
    }
    double acc = 0.0;
    double total_weight = 0.0;
    for (std::size_t k = 0; k < sinr_linear.size(); ++k) {
        acc += weights[k] * std::exp(-sinr_linear[k] / beta - top);
        total_weight += weights[k];
    }
    const double value = -beta * (top + std::log(acc / total_weight));
    return clamp_between_samples(value, sinr_linear);
}

double mmib(std::span<const double> sinr_linear, const MiCurve& curve)
{
    const std::vector<double> ones(sinr_linear.size(), 1.0);
    return mmib(sinr_linear, ones, curve);
}

double mmib(std::span<const double> sinr_linear, std::span<const double> weights, const MiCurve& curve)
{
    check_weights(sinr_linear, weights);
    double acc = 0.0;
    double total_weight = 0.0;
    for (std::size_t k = 0; k < sinr_linear.size(); ++k) {
        acc += weights[k] * curve.mi(sinr_linear[k]);
        total_weight += weights[k];
    }
    return curve.sinr_linear(acc / total_weight);
}

CbgLayout::CbgLayout(std::size_t cb_count, std::size_t cbg_count)
    : cb_count_(cb_count)
{
    if (cb_count == 0 || cbg_count == 0) {
        throw std::domain_error("CB and CBG counts must be positive");
    }
    if (cbg_count > cb_count) {
        throw std::domain_error("more CBGs than CBs");
    }
    const std::size_t base = cb_count / cbg_count;
    const std::size_t extra = cb_count % cbg_count;
    group_sizes_.resize(cbg_count);
    group_starts_.resize(cbg_count);
    std::size_t start = 0;
    for (std::size_t m = 0; m < cbg_count; ++m) {
        group_sizes_[m] = base + (m < extra ? 1 : 0);
        group_starts_[m] = start;
        start += group_sizes_[m];
    }
}

std::pair<std::size_t, std::size_t> CbgLayout::group_range(std::size_t m) const
{
    return {group_starts_.at(m), group_starts_[m] + group_sizes_[m]};
}

std::size_t CbgLayout::group_of(std::size_t cb) const
{
    if (cb >= cb_count_) {
        throw std::out_of_range("CB index out of range");
    }
    const auto it = std::upper_bound(group_starts_.begin(), group_starts_.end(), cb);
    return static_cast<std::size_t>(it - group_starts_.begin()) - 1;
}

CbSinrProfile::CbSinrProfile(std::vector<double> sinr_db, CbgLayout cbg_layout)
    : per_cb_sinr_db(std::move(sinr_db)), layout(std::move(cbg_layout))
{
    if (per_cb_sinr_db.size() != layout.cb_count()) {
        throw std::domain_error("CB SINR list does not match the CBG layout");
    }
}

CbSinrProfile::CbSinrProfile(std::vector<double> sinr_db, std::size_t cbg_count)
    : CbSinrProfile(sinr_db, CbgLayout(sinr_db.size(), cbg_count))
{
}

std::vector<double> cb_error_probs(const CbSinrProfile& profile, const McsEntry& entry)
{
    std::vector<double> probs;
    probs.reserve(profile.per_cb_sinr_db.size());
    for (double s : profile.per_cb_sinr_db) {
        probs.push_back(std::clamp(bler(s, entry), kMinCbErrorProb, kMaxCbErrorProb));
    }
    return probs;
}

std::vector<double> cbg_error_probs(const CbSinrProfile& profile, const McsEntry& entry)
{
    const std::vector<double> cb = cb_error_probs(profile, entry);
    std::vector<double> cbg(profile.layout.cbg_count());
    for (std::size_t m = 0; m < cbg.size(); ++m) {
        const auto [first, last] = profile.layout.group_range(m);
        const double p = prob::cbg_error_prob_general(std::span<const double>(cb).subspan(first, last - first));
        cbg[m] = std::clamp(p, kMinCbErrorProb, kMaxCbErrorProb);
    }
    return cbg;
}

}  // namespace xrla::link
