#pragma once

// CQI selection: the baseline TBEP-target CQI and the CBG-aware eCQI, which
// reports the highest MCS r with
//
//     Q(r) = P(n_e <= N at r) >= P     (at-most-N mode), or
//     Q(r) = P(n_e == N at r) >= P     (exactly-N mode),
//
// where n_e counts failed CBGs out of M. Q is evaluated from per-CB SINRs
// through the link map and the probability core; the MCS list is walked with
// one of several search strategies.

#include "xrla/link_map.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace xrla::cqi {

enum class EcqiMode { AtMostN, ExactlyN };

enum class SearchKind {
    LinearAscending,
    LinearDescending,
    Binary,
    /// Ascending scan that stops at the first index with |Q - P| < delta.
    Relaxed,
};

/// How P(n_e == i) is evaluated for each candidate MCS.
enum class EvalMethod {
    ClosedForm,       ///< power-sum closed form (N <= 3), convolution above
    Direct,           ///< sum over all N-subsets
    PoissonBinomial,  ///< O(M^2) convolution
};

struct EcqiConfig {
    unsigned n = 4;   ///< tolerated failed CBGs
    unsigned m = 8;   ///< CBGs the UE assumes per TB
    unsigned f = 8;   ///< configured maximum CBGs per TB (2, 4, 6 or 8)
    double p = 0.5;   ///< target probability
    EcqiMode mode = EcqiMode::AtMostN;
    SearchKind search = SearchKind::Binary;
    double relaxed_delta = 0.0;
    EvalMethod eval = EvalMethod::ClosedForm;
    /// Scan Q over the whole table before a binary search; on a monotonicity
    /// violation the linear descending result is used instead.
    bool validate_monotone = false;

    /// Throws std::domain_error naming the offending field.
    void validate() const;
};

struct SearchStats {
    std::uint64_t mcs_evaluations = 0;
    std::uint64_t multiplications = 0;
};

struct SearchResult {
    std::size_t index = 0;
    bool out_of_range = false;  ///< no index qualified; index is 0
    std::uint64_t evaluations = 0;
};

struct CqiReport {
    std::size_t index = 0;
    bool out_of_range = false;
    bool monotonicity_violation = false;
    SearchStats stats;
};

/// Q(r) for a candidate index.
using QualityFn = std::function<double(std::size_t)>;

/// Per-CB SINR profile the UE would see for MCS index r (the CB count of a
/// reference allocation depends on r).
using ProfileFn = std::function<link::CbSinrProfile(std::size_t)>;

// Each search returns the largest r in [0, table_size) with Q(r) >= target
// when Q is non-increasing in r.
SearchResult search_linear_ascending(const QualityFn& q, std::size_t table_size, double target);
SearchResult search_linear_descending(const QualityFn& q, std::size_t table_size, double target);
/// Bisection; at most ceil(log2(I + 1)) evaluations. The returned index was
/// evaluated and qualified, but maximality needs monotone Q.
SearchResult search_binary(const QualityFn& q, std::size_t table_size, double target);
/// Ascending scan, reporting the first r with |Q(r) - target| < delta and
/// otherwise behaving like search_linear_ascending(). delta == 0 is strict.
SearchResult search_relaxed(const QualityFn& q, std::size_t table_size, double target, double delta);

/// Largest index whose predicted TBEP is strictly below target; 0 if none.
std::size_t baseline_cqi(const std::function<double(std::size_t)>& predicted_tbep, std::size_t table_size,
                         double target_tbep = 0.1);

/// Wideband variant: TBEP(r) = 1 - (1 - BLER(sinr, r))^cb_count.
std::size_t baseline_cqi(double wideband_sinr_db, const link::McsTable& table, double target_tbep = 0.1,
                         std::size_t cb_count = 1);

/// Q(r) of one MCS given its CB profile; adds the evaluation's
/// multiplications to stats.
double ecqi_quality(const link::CbSinrProfile& profile, const link::McsEntry& entry, const EcqiConfig& cfg,
                    SearchStats& stats);

CqiReport ecqi(const ProfileFn& profile_for, const link::McsTable& table, const EcqiConfig& cfg);
CqiReport ecqi(const link::CbSinrProfile& profile, const link::McsTable& table, const EcqiConfig& cfg);

/// Multiplications of one direct evaluation: M * C(M, N).
std::uint64_t complexity_direct(unsigned m, unsigned n);

/// Multiplications of one closed-form evaluation: M, 2M + 1, 3M + 3 for
/// N = 1, 2, 3.
std::uint64_t complexity_closed(unsigned m, unsigned n);

std::string_view to_string(SearchKind kind);
std::string_view to_string(EvalMethod method);
std::string_view to_string(EcqiMode mode);
SearchKind parse_search_kind(std::string_view text);
EvalMethod parse_eval_method(std::string_view text);
EcqiMode parse_ecqi_mode(std::string_view text);

}  // namespace xrla::cqi
