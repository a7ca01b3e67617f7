#include "xrla/probability.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace xrla::prob {

namespace {

void require_probability(double p, const char* what)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
    }
}

void require_count(std::size_t count, const char* what)
{
    if (count == 0) {
        throw std::domain_error(std::string(what) + " must be at least 1");
    }
}

double log_binomial(std::size_t n, std::size_t k)
{
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Unevaluated sum hi + lo built from error-free transformations; roughly
// 106 bits of significand.
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    DoubleDouble() = default;
    DoubleDouble(double x)  // NOLINT(google-explicit-constructor)
        : hi(x)
    {
    }
    DoubleDouble(double h, double l)
        : hi(h), lo(l)
    {
    }

    double value() const { return hi + lo; }

    static DoubleDouble two_sum(double a, double b)
    {
        const double s = a + b;
        const double bb = s - a;
        const double err = (a - (s - bb)) + (b - bb);
        return {s, err};
    }

    static DoubleDouble quick_two_sum(double a, double b)
    {
        const double s = a + b;
        return {s, b - (s - a)};
    }

    friend DoubleDouble operator+(DoubleDouble a, DoubleDouble b)
    {
        DoubleDouble s = two_sum(a.hi, b.hi);
        const DoubleDouble t = two_sum(a.lo, b.lo);
        s.lo += t.hi;
        s = quick_two_sum(s.hi, s.lo);
        s.lo += t.lo;
        return quick_two_sum(s.hi, s.lo);
    }

    friend DoubleDouble operator-(DoubleDouble a, DoubleDouble b) { return a + DoubleDouble(-b.hi, -b.lo); }

    friend DoubleDouble operator*(DoubleDouble a, DoubleDouble b)
    {
        const double p = a.hi * b.hi;
        const double err = std::fma(a.hi, b.hi, -p);
        return quick_two_sum(p, err + (a.hi * b.lo + a.lo * b.hi));
    }
};

}  // namespace

CbgErrorVector::CbgErrorVector(std::vector<double> probs, std::size_t max_cbgs)
    : probs_(std::move(probs))
{
    if (probs_.empty()) {
        throw std::domain_error("CBG error vector must hold at least one CBG");
    }
    if (probs_.size() > max_cbgs) {
        throw std::domain_error("CBG error vector holds " + std::to_string(probs_.size()) +
                                " CBGs, limit is " + std::to_string(max_cbgs));
    }
    for (double p : probs_) {
        require_probability(p, "CBG error probability");
    }
}

OddsVector OddsVector::from_probabilities(const CbgErrorVector& probs)
{
    std::vector<double> o;
    o.reserve(probs.size());
    for (double p : probs.probs()) {
        o.push_back(prob::odds(p));
    }
    return OddsVector(std::move(o));
}

OddsVector::OddsVector(std::vector<double> odds)
    : odds_(std::move(odds))
{
    if (odds_.empty()) {
        throw std::domain_error("odds vector must hold at least one entry");
    }
    for (double o : odds_) {
        if (!(o >= 0.0) || !std::isfinite(o)) {
            throw std::domain_error("odds must be finite and non-negative");
        }
    }
}

std::vector<double> OddsVector::to_probabilities() const
{
    std::vector<double> p;
    p.reserve(odds_.size());
    for (double o : odds_) {
        p.push_back(o / (1.0 + o));
    }
    return p;
}

ErrorCountDistribution::ErrorCountDistribution(std::vector<double> pmf)
    : pmf_(std::move(pmf))
{
    if (pmf_.empty()) {
        throw std::domain_error("error count pmf must be non-empty");
    }
}

double ErrorCountDistribution::at(std::size_t n) const
{
    if (n >= pmf_.size()) {
        throw std::domain_error("failed-CBG count out of range");
    }
    return pmf_[n];
}

double ErrorCountDistribution::at_most(std::size_t n) const
{
    if (n >= pmf_.size()) {
        throw std::domain_error("failed-CBG count out of range");
    }
    return std::accumulate(pmf_.begin(), pmf_.begin() + static_cast<std::ptrdiff_t>(n) + 1, 0.0);
}

void CorrelatedModel::validate() const
{
    require_probability(p, "correlated model p");
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw std::domain_error("correlation coefficient must lie in [0, 1]");
    }
    require_count(cbg_count, "CBG count");
}

double cbg_error_prob_iid(double p_cb, std::size_t group_size)
{
    require_probability(p_cb, "CB error probability");
    require_count(group_size, "CBG size");
    return -std::expm1(static_cast<double>(group_size) * std::log1p(-p_cb));
}

double tbep_from_cbgep(double p_cbg, std::size_t cbg_count)
{
    require_probability(p_cbg, "CBG error probability");
    require_count(cbg_count, "CBG count");
    return -std::expm1(static_cast<double>(cbg_count) * std::log1p(-p_cbg));
}

double cbgep_from_tbep(double p_tb, std::size_t cbg_count)
{
    require_probability(p_tb, "TB error probability");
    require_count(cbg_count, "CBG count");
    return -std::expm1(std::log1p(-p_tb) / static_cast<double>(cbg_count));
}

double binomial_pmf(double p, std::size_t cbg_count, std::size_t n)
{
    require_probability(p, "CBG error probability");
    if (n > cbg_count) {
        throw std::domain_error("failed-CBG count exceeds CBG count");
    }
    const auto failures = static_cast<double>(n);
    const auto successes = static_cast<double>(cbg_count - n);
    // Degenerate endpoints are exact; avoid log(0).
    if (p == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    if (p == 1.0) {
        return n == cbg_count ? 1.0 : 0.0;
    }
    return std::exp(log_binomial(cbg_count, n) + failures * std::log(p) + successes * std::log1p(-p));
}

double at_most_n_failed_iid(double p_cbg, std::size_t cbg_count, std::size_t n_max)
{
    require_count(cbg_count, "CBG count");
    if (n_max > cbg_count) {
        throw std::domain_error("N exceeds M");
    }
    if (n_max == cbg_count) {
        require_probability(p_cbg, "CBG error probability");
        return 1.0;
    }
    double sum = 0.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        sum += binomial_pmf(p_cbg, cbg_count, n);
    }
    return std::min(sum, 1.0);
}

double cbg_error_prob_general(std::span<const double> cb_probs)
{
    if (cb_probs.empty()) {
        throw std::domain_error("a CBG holds at least one CB");
    }
    double log_success = 0.0;
    for (double p : cb_probs) {
        require_probability(p, "CB error probability");
        log_success += std::log1p(-p);
    }
    return -std::expm1(log_success);
}

ErrorCountDistribution error_count_distribution(const CbgErrorVector& probs, OpCounter* counter)
{
    const std::size_t m_count = probs.size();
    std::vector<double> pmf(m_count + 1, 0.0);
    pmf[0] = 1.0;
    for (std::size_t m = 0; m < m_count; ++m) {
        const double p = probs[m];
        const double q = 1.0 - p;
        // Walk downwards so pmf[k - 1] still holds the previous stage.
        for (std::size_t k = m + 1; k > 0; --k) {
            pmf[k] = pmf[k] * q + pmf[k - 1] * p;
        }
        pmf[0] *= q;
        if (counter != nullptr) {
            counter->multiplications += 2 * (m + 1) + 1;
        }
    }
    return ErrorCountDistribution(std::move(pmf));
}

double exact_n_failed(const CbgErrorVector& probs, std::size_t n)
{
    if (n > probs.size()) {
        throw std::domain_error("failed-CBG count exceeds CBG count");
    }
    return error_count_distribution(probs).at(n);
}

double brute_force_n_failed(std::span<const double> probs, std::size_t n)
{
    const std::size_t m_count = probs.size();
    if (m_count > kMaxEnumerationCbgs) {
        throw std::length_error("enumeration oracle supports at most " +
                                std::to_string(kMaxEnumerationCbgs) + " CBGs");
    }
    if (n > m_count) {
        throw std::domain_error("failed-CBG count exceeds CBG count");
    }
    const std::uint32_t outcomes = 1U << m_count;
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < outcomes; ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != n) {
            continue;
        }
        double prob = 1.0;
        for (std::size_t m = 0; m < m_count; ++m) {
            prob *= ((mask >> m) & 1U) != 0 ? probs[m] : 1.0 - probs[m];
        }
        total += prob;
    }
    return total;
}

double brute_force_n_failed(const CbgErrorVector& probs, std::size_t n)
{
    return brute_force_n_failed(probs.probs(), n);
}

double direct_n_failed(const CbgErrorVector& probs, std::size_t n, OpCounter* counter)
{
    const std::size_t m_count = probs.size();
    if (n > m_count) {
        throw std::domain_error("failed-CBG count exceeds CBG count");
    }
    // Lexicographic walk over N-subsets of {0, ..., M-1}.
    std::vector<std::size_t> subset(n);
    std::iota(subset.begin(), subset.end(), std::size_t{0});
    std::vector<char> failed(m_count, 0);
    double total = 0.0;
    while (true) {
        std::fill(failed.begin(), failed.end(), 0);
        for (std::size_t idx : subset) {
            failed[idx] = 1;
        }
        double prob = 1.0;
        for (std::size_t m = 0; m < m_count; ++m) {
            prob *= failed[m] != 0 ? probs[m] : 1.0 - probs[m];
        }
        if (counter != nullptr) {
            counter->multiplications += m_count;
        }
        total += prob;

        // Advance to the next subset.
        std::size_t pos = n;
        while (pos > 0 && subset[pos - 1] == m_count - n + pos - 1) {
            --pos;
        }
        if (pos == 0) {
            break;
        }
        ++subset[pos - 1];
        for (std::size_t j = pos; j < n; ++j) {
            subset[j] = subset[j - 1] + 1;
        }
    }
    return total;
}

double odds(double p)
{
    require_probability(p, "probability");
    if (p == 1.0) {
        throw std::domain_error("odds ratio is infinite at p = 1");
    }
    return p / (1.0 - p);
}

std::vector<double> closed_form_prefix(const OddsVector& odds, unsigned n_max, OpCounter* counter)
{
    if (n_max > kMaxClosedFormN) {
        throw std::invalid_argument("closed forms are available for N <= 3 only");
    }
    const std::size_t m_count = odds.size();
    if (n_max > m_count) {
        throw std::domain_error("failed-CBG count exceeds CBG count");
    }

    // Newton's identities subtract power sums of similar magnitude when one
    // odds ratio dominates, so the sums are carried in double-double.
    std::uint64_t mults = 0;

    double pi = 1.0;
    for (double o : odds.odds()) {
        pi *= 1.0 / (1.0 + o);
    }
    mults += m_count;

    DoubleDouble s1;
    DoubleDouble s2;
    DoubleDouble s3;
    for (double o : odds.odds()) {
        s1 = s1 + o;
        if (n_max >= 2) {
            const DoubleDouble sq = DoubleDouble(o) * o;
            s2 = s2 + sq;
            if (n_max >= 3) {
                s3 = s3 + sq * o;
            }
        }
    }

    std::vector<double> terms;
    terms.reserve(n_max + 1);
    terms.push_back(pi);
    if (n_max >= 1) {
        terms.push_back(pi * s1.value());
    }
    if (n_max >= 2) {
        mults += m_count;  // s2
        const DoubleDouble s1_sq = s1 * s1;
        mults += 1;
        terms.push_back(pi * (s1_sq - s2).value() / 2.0);
        if (n_max >= 3) {
            mults += m_count;  // s3 reuses the squares
            const DoubleDouble s1_cube = s1_sq * s1;
            const DoubleDouble s1_s2 = s1 * s2;
            mults += 2;
            const DoubleDouble e3 = s1_cube - s1_s2 * 3.0 + s3 * 2.0;
            terms.push_back(pi * e3.value() / 6.0);
        }
    }
    // Constant scalings and the final weighting by Pi are not tallied.
    if (counter != nullptr) {
        counter->multiplications += mults;
    }
    return terms;
}

double closed_form_n_failed(const OddsVector& odds, unsigned n, OpCounter* counter)
{
    return closed_form_prefix(odds, n, counter).back();
}

double correlated_pmf(const CorrelatedModel& model, std::size_t n)
{
    model.validate();
    const std::size_t m_count = model.cbg_count;
    if (n > m_count) {
        throw std::domain_error("failed-CBG count exceeds CBG count");
    }
    double value = (1.0 - model.rho) * binomial_pmf(model.p, m_count, n);
    if (n == 0) {
        value += model.rho * (1.0 - model.p);
    } else if (n == m_count) {
        value += model.rho * model.p;
    }
    return value;
}

ErrorCountDistribution correlated_distribution(const CorrelatedModel& model)
{
    model.validate();
    std::vector<double> pmf(model.cbg_count + 1);
    for (std::size_t n = 0; n <= model.cbg_count; ++n) {
        pmf[n] = correlated_pmf(model, n);
    }
    return ErrorCountDistribution(std::move(pmf));
}

}  // namespace xrla::prob
