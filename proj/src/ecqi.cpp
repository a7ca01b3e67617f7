#include "xrla/ecqi.hpp"

#include "xrla/probability.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xrla::cqi {

void EcqiConfig::validate() const
{
    if (f != 2 && f != 4 && f != 6 && f != 8) {
        throw std::domain_error("ecqi.f: maximum CBGs per TB must be 2, 4, 6 or 8");
    }
    if (m < 1 || m > f) {
        throw std::domain_error("ecqi.m: CBG count must lie in [1, F]");
    }
    if (n > m) {
        throw std::domain_error("ecqi.n: N exceeds M");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("ecqi.p: target probability must lie in (0, 1)");
    }
    if (!(relaxed_delta >= 0.0)) {
        throw std::domain_error("ecqi.relaxed_delta: tolerance must be non-negative");
    }
}

SearchResult search_linear_ascending(const QualityFn& q, std::size_t table_size, double target)
{
    SearchResult res;
    for (std::size_t r = 0; r < table_size; ++r) {
        ++res.evaluations;
        if (q(r) < target) {
            if (r == 0) {
                res.out_of_range = true;
            } else {
                res.index = r - 1;
            }
            return res;
        }
    }
    res.index = table_size - 1;
    return res;
}

SearchResult search_linear_descending(const QualityFn& q, std::size_t table_size, double target)
{
    SearchResult res;
    for (std::size_t r = table_size; r > 0; --r) {
        ++res.evaluations;
        if (q(r - 1) >= target) {
            res.index = r - 1;
            return res;
        }
    }
    res.out_of_range = true;
    return res;
}

SearchResult search_binary(const QualityFn& q, std::size_t table_size, double target)
{
    // Invariant: lo qualified (or is the virtual index -1), hi failed (or is
    // the virtual index I).
    std::ptrdiff_t lo = -1;
    auto hi = static_cast<std::ptrdiff_t>(table_size);
    SearchResult res;
    while (hi - lo > 1) {
        const std::ptrdiff_t mid = lo + (hi - lo) / 2;
        ++res.evaluations;
        if (q(static_cast<std::size_t>(mid)) >= target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (lo < 0) {
        res.out_of_range = true;
    } else {
        res.index = static_cast<std::size_t>(lo);
    }
    return res;
}

SearchResult search_relaxed(const QualityFn& q, std::size_t table_size, double target, double delta)
{
    SearchResult res;
    for (std::size_t r = 0; r < table_size; ++r) {
        ++res.evaluations;
        const double value = q(r);
        if (std::abs(value - target) < delta) {
            res.index = r;
            return res;
        }
        if (value < target) {
            if (r == 0) {
                res.out_of_range = true;
            } else {
                res.index = r - 1;
            }
            return res;
        }
    }
    res.index = table_size - 1;
    return res;
}

std::size_t baseline_cqi(const std::function<double(std::size_t)>& predicted_tbep, std::size_t table_size,
                         double target_tbep)
{
    for (std::size_t r = table_size; r > 0; --r) {
        if (predicted_tbep(r - 1) < target_tbep) {
            return r - 1;
        }
    }
    return 0;
}

std::size_t baseline_cqi(double wideband_sinr_db, const link::McsTable& table, double target_tbep,
                         std::size_t cb_count)
{
    if (cb_count == 0) {
        throw std::domain_error("CB count must be positive");
    }
    return baseline_cqi(
        [&](std::size_t r) {
            return prob::cbg_error_prob_iid(link::bler(wideband_sinr_db, table[r]), cb_count);
        },
        table.size(), target_tbep);
}

double ecqi_quality(const link::CbSinrProfile& profile, const link::McsEntry& entry, const EcqiConfig& cfg,
                    SearchStats& stats)
{
    const std::size_t cbg_count = profile.layout.cbg_count();
    if (cfg.n > cbg_count) {
        throw std::domain_error("N exceeds M");
    }
    const prob::CbgErrorVector probs(link::cbg_error_probs(profile, entry), prob::kMaxEnumerationCbgs);
    prob::OpCounter counter;
    double q = 0.0;

    const bool closed_ok = cfg.eval == EvalMethod::ClosedForm && cfg.n <= prob::kMaxClosedFormN;
    if (closed_ok) {
        const auto odds = prob::OddsVector::from_probabilities(probs);
        if (cfg.mode == EcqiMode::AtMostN) {
            for (double term : prob::closed_form_prefix(odds, cfg.n, &counter)) {
                q += term;
            }
        } else {
            q = prob::closed_form_n_failed(odds, cfg.n, &counter);
        }
    } else if (cfg.eval == EvalMethod::Direct) {
        if (cfg.mode == EcqiMode::AtMostN) {
            for (unsigned i = 0; i <= cfg.n; ++i) {
                q += prob::direct_n_failed(probs, i, &counter);
            }
        } else {
            q = prob::direct_n_failed(probs, cfg.n, &counter);
        }
    } else {
        const auto dist = prob::error_count_distribution(probs, &counter);
        q = cfg.mode == EcqiMode::AtMostN ? dist.at_most(cfg.n) : dist.at(cfg.n);
    }
    stats.multiplications += counter.multiplications;
    ++stats.mcs_evaluations;
    return std::clamp(q, 0.0, 1.0);
}

CqiReport ecqi(const ProfileFn& profile_for, const link::McsTable& table, const EcqiConfig& cfg)
{
    cfg.validate();
    CqiReport report;
    const std::size_t size = table.size();
    std::vector<std::optional<double>> cache(size);
    const QualityFn q = [&](std::size_t r) {
        if (!cache[r]) {
            cache[r] = ecqi_quality(profile_for(r), table[r], cfg, report.stats);
        }
        return *cache[r];
    };

    SearchKind kind = cfg.search;
    if (cfg.validate_monotone && kind == SearchKind::Binary) {
        for (std::size_t r = 1; r < size; ++r) {
            if (q(r) > q(r - 1)) {
                report.monotonicity_violation = true;
                kind = SearchKind::LinearDescending;
                break;
            }
        }
    }

    SearchResult res;
    switch (kind) {
    case SearchKind::LinearAscending:
        res = search_linear_ascending(q, size, cfg.p);
        break;
    case SearchKind::LinearDescending:
        res = search_linear_descending(q, size, cfg.p);
        break;
    case SearchKind::Binary:
        res = search_binary(q, size, cfg.p);
        break;
    case SearchKind::Relaxed:
        res = search_relaxed(q, size, cfg.p, cfg.relaxed_delta);
        break;
    }
    report.index = res.index;
    report.out_of_range = res.out_of_range;
    return report;
}

CqiReport ecqi(const link::CbSinrProfile& profile, const link::McsTable& table, const EcqiConfig& cfg)
{
    return ecqi([&](std::size_t) { return profile; }, table, cfg);
}

std::uint64_t complexity_direct(unsigned m, unsigned n)
{
    if (n > m) {
        throw std::domain_error("N exceeds M");
    }
    std::uint64_t binom = 1;
    for (unsigned k = 1; k <= n; ++k) {
        binom = binom * (m - n + k) / k;
    }
    return static_cast<std::uint64_t>(m) * binom;
}

std::uint64_t complexity_closed(unsigned m, unsigned n)
{
    switch (n) {
    case 1:
        return m;
    case 2:
        return 2ULL * m + 1;
    case 3:
        return 3ULL * m + 3;
    default:
        throw std::domain_error("closed-form counts are defined for N in {1, 2, 3}");
    }
}

std::string_view to_string(SearchKind kind)
{
    switch (kind) {
    case SearchKind::LinearAscending:
        return "linear_asc";
    case SearchKind::LinearDescending:
        return "linear_desc";
    case SearchKind::Binary:
        return "binary";
    case SearchKind::Relaxed:
        return "relaxed";
    }
    return "?";
}

std::string_view to_string(EvalMethod method)
{
    switch (method) {
    case EvalMethod::ClosedForm:
        return "closed";
    case EvalMethod::Direct:
        return "direct";
    case EvalMethod::PoissonBinomial:
        return "dp";
    }
    return "?";
}

std::string_view to_string(EcqiMode mode)
{
    return mode == EcqiMode::AtMostN ? "at_most_n" : "exactly_n";
}

SearchKind parse_search_kind(std::string_view text)
{
    for (SearchKind k : {SearchKind::LinearAscending, SearchKind::LinearDescending, SearchKind::Binary,
                         SearchKind::Relaxed}) {
        if (text == to_string(k)) {
            return k;
        }
    }
    throw std::domain_error("unknown search kind '" + std::string(text) + "'");
}

EvalMethod parse_eval_method(std::string_view text)
{
    for (EvalMethod m : {EvalMethod::ClosedForm, EvalMethod::Direct, EvalMethod::PoissonBinomial}) {
        if (text == to_string(m)) {
            return m;
        }
    }
    throw std::domain_error("unknown evaluation method '" + std::string(text) + "'");
}

EcqiMode parse_ecqi_mode(std::string_view text)
{
    if (text == "at_most_n") {
        return EcqiMode::AtMostN;
    }
    if (text == "exactly_n") {
        return EcqiMode::ExactlyN;
    }
    throw std::domain_error("unknown eCQI mode '" + std::string(text) + "'");
}

}  // namespace xrla::cqi
