#pragma once

// Failed-CBG count distributions for one transport block.
//
// A transport block carries M code block groups (CBGs). Each CBG m fails
// independently with probability p_m (unless the correlated model is used).
// The functions here compute the law of the number of failed CBGs n_e:
//
//   * i.i.d. groups        -> binomial terms
//   * non-identical groups -> Poisson-binomial terms (DP, closed form, direct)
//   * correlated groups    -> binomial / two-point mixture
//
// brute_force_n_failed() enumerates all 2^M ACK/NACK outcomes and is kept
// independent of every other evaluation path so it can serve as an oracle.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace xrla::prob {

/// Default upper bound on CBGs per transport block (PDSCH allows 2..8).
inline constexpr std::size_t kDefaultMaxCbgs = 8;

/// Largest M the enumeration oracle accepts.
inline constexpr std::size_t kMaxEnumerationCbgs = 20;

/// Highest N with a power-sum closed form.
inline constexpr unsigned kMaxClosedFormN = 3;

/// Multiplication tally for complexity instrumentation. Pass a pointer to
/// any evaluation routine that accepts one; nullptr disables counting.
struct OpCounter {
    std::uint64_t multiplications = 0;
};

/// Per-CBG error probabilities of one TB at one MCS.
class CbgErrorVector {
public:
    /// Throws std::domain_error on an empty vector, a size above max_cbgs, or
    /// any entry outside [0, 1].
    explicit CbgErrorVector(std::vector<double> probs, std::size_t max_cbgs = kDefaultMaxCbgs);

    std::span<const double> probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t m) const { return probs_[m]; }

private:
    std::vector<double> probs_;
};

/// Odds ratios O_m = p_m / (1 - p_m) of a CbgErrorVector.
class OddsVector {
public:
    /// Throws std::domain_error if any p_m == 1.
    static OddsVector from_probabilities(const CbgErrorVector& probs);

    /// Throws std::domain_error on negative or non-finite odds.
    explicit OddsVector(std::vector<double> odds);

    std::span<const double> odds() const { return odds_; }
    std::size_t size() const { return odds_.size(); }
    double operator[](std::size_t m) const { return odds_[m]; }

    /// p_m = O_m / (1 + O_m).
    std::vector<double> to_probabilities() const;

private:
    std::vector<double> odds_;
};

/// pmf of the failed-CBG count, indexed by n_e in [0, M].
class ErrorCountDistribution {
public:
    explicit ErrorCountDistribution(std::vector<double> pmf);

    std::span<const double> pmf() const { return pmf_; }
    std::size_t max_count() const { return pmf_.size() - 1; }
    double at(std::size_t n) const;
    /// P(n_e <= n).
    double at_most(std::size_t n) const;

private:
    std::vector<double> pmf_;
};

/// Common-probability correlated CBG model: a (1 - rho) / rho mixture of a
/// binomial law and an all-or-nothing law.
struct CorrelatedModel {
    double p = 0.0;
    double rho = 0.0;
    std::size_t cbg_count = 1;

    void validate() const;
};

// --- i.i.d. relations -----------------------------------------------------

/// CBG failure probability when each of group_size CBs fails w.p. p_cb.
double cbg_error_prob_iid(double p_cb, std::size_t group_size);

/// TB failure probability from a common CBG failure probability.
double tbep_from_cbgep(double p_cbg, std::size_t cbg_count);

/// Inverse of tbep_from_cbgep().
double cbgep_from_tbep(double p_tb, std::size_t cbg_count);

/// Binomial pmf term C(M, n) p^n (1 - p)^(M - n).
double binomial_pmf(double p, std::size_t cbg_count, std::size_t n);

/// P(n_e <= N) for M i.i.d. CBGs.
double at_most_n_failed_iid(double p_cbg, std::size_t cbg_count, std::size_t n_max);

// --- non-identical CBGs -----------------------------------------------------

/// CBG failure probability from the (possibly uneven) error probabilities of
/// its CBs: 1 - prod(1 - p_i).
double cbg_error_prob_general(std::span<const double> cb_probs);

/// Full Poisson-binomial law of n_e (O(M^2) convolution).
ErrorCountDistribution error_count_distribution(const CbgErrorVector& probs,
                                                OpCounter* counter = nullptr);

/// P(n_e == N) via the Poisson-binomial convolution.
double exact_n_failed(const CbgErrorVector& probs, std::size_t n);

/// P(n_e == N) by enumerating all 2^M outcomes. Throws std::length_error
/// when M exceeds kMaxEnumerationCbgs.
double brute_force_n_failed(std::span<const double> probs, std::size_t n);
double brute_force_n_failed(const CbgErrorVector& probs, std::size_t n);

/// P(n_e == N) by summing, over every N-subset of failed CBGs, the product of
/// the M per-CBG factors. Counts M multiplications per subset.
double direct_n_failed(const CbgErrorVector& probs, std::size_t n, OpCounter* counter = nullptr);

/// Odds ratio p / (1 - p). Throws std::domain_error for p outside [0, 1).
double odds(double p);

/// P(n_e == N) = Pi * e_N(O) for N <= 3, where Pi = prod 1/(1 + O_m) and the
/// elementary symmetric polynomial e_N is built from power sums by Newton's
/// identities. Throws std::invalid_argument for N > 3 and std::domain_error
/// for N > M.
double closed_form_n_failed(const OddsVector& odds, unsigned n, OpCounter* counter = nullptr);

/// The terms P(n_e == 0), ..., P(n_e == n_max) from one pass of the closed
/// form. Power sums are shared, so the multiplication count equals that of
/// closed_form_n_failed(odds, n_max).
std::vector<double> closed_form_prefix(const OddsVector& odds, unsigned n_max,
                                       OpCounter* counter = nullptr);

// --- correlated CBGs --------------------------------------------------------

double correlated_pmf(const CorrelatedModel& model, std::size_t n);
ErrorCountDistribution correlated_distribution(const CorrelatedModel& model);

}  // namespace xrla::prob
