#include "xrla/ecqi.hpp"
#include "xrla/probability.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace xrla;
using namespace xrla::cqi;

namespace {

/// Non-increasing random Q over `size` indices.
std::vector<double> random_monotone(std::mt19937_64& rng, std::size_t size)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> q(size);
    for (auto& x : q) {
        x = u(rng);
    }
    std::sort(q.begin(), q.end(), std::greater<>());
    return q;
}

QualityFn from_vector(const std::vector<double>& q, std::uint64_t* calls = nullptr)
{
    return [&q, calls](std::size_t r) {
        if (calls != nullptr) {
            ++*calls;
        }
        return q.at(r);
    };
}

}  // namespace

TEST_CASE("search on small tables")
{
    const std::vector<double> q{0.95, 0.40};
    CHECK(search_linear_ascending(from_vector(q), 2, 0.5).index == 0);
    CHECK(search_linear_descending(from_vector(q), 2, 0.5).index == 0);
    CHECK(search_binary(from_vector(q), 2, 0.5).index == 0);
    CHECK(search_relaxed(from_vector(q), 2, 0.5, 0.0).index == 0);

    const std::vector<double> none(28, 0.1);
    const std::vector<double> all(28, 0.9);
    for (auto res : {search_linear_ascending(from_vector(none), 28, 0.5), search_binary(from_vector(none), 28, 0.5),
                     search_linear_descending(from_vector(none), 28, 0.5)}) {
        CHECK(res.out_of_range);
        CHECK(res.index == 0);
    }
    for (auto res : {search_linear_ascending(from_vector(all), 28, 0.5), search_binary(from_vector(all), 28, 0.5),
                     search_linear_descending(from_vector(all), 28, 0.5)}) {
        CHECK_FALSE(res.out_of_range);
        CHECK(res.index == 27);
    }
}

TEST_CASE("binary search matches exhaustive scan on monotone profiles")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::uint64_t bound = static_cast<std::uint64_t>(std::ceil(std::log2(28.0))) + 1;
    for (int k = 0; k < 1000; ++k) {
        const auto q = random_monotone(rng, 28);
        const double p = u(rng);
        const auto lin = search_linear_ascending(from_vector(q), 28, p);
        std::uint64_t calls = 0;
        const auto bin = search_binary(from_vector(q, &calls), 28, p);
        CHECK(bin.index == lin.index);
        CHECK(bin.out_of_range == lin.out_of_range);
        CHECK(calls <= bound);
        CHECK(bin.evaluations == calls);
        CHECK(lin.evaluations <= 28);
        CHECK(search_linear_descending(from_vector(q), 28, p).index == lin.index);
        CHECK(search_relaxed(from_vector(q), 28, p, 0.0).index == lin.index);
    }
}

TEST_CASE("relaxed search stops early with a wide band")
{
    std::uint64_t calls = 0;
    const std::vector<double> q{0.6, 0.55, 0.52, 0.3};
    const auto res = search_relaxed(from_vector(q, &calls), 4, 0.5, 1.0);
    CHECK(res.index == 0);
    CHECK(calls == 1);
}

TEST_CASE("baseline cqi")
{
    const auto t = link::McsTable::nr_256qam();
    CHECK(baseline_cqi(-40.0, t) == 0);
    CHECK(baseline_cqi(60.0, t) == 27);
    for (std::size_t k = 1; k < t.size(); ++k) {
        CHECK(baseline_cqi(t[k].bler_midpoint_db, t) < k);
    }
}

TEST_CASE("complexity formulas")
{
    CHECK(complexity_direct(8, 2) == 224);
    CHECK(complexity_direct(8, 0) == 8);
    CHECK(complexity_direct(8, 1) == 64);
    CHECK(complexity_direct(8, 3) == 448);
    CHECK(complexity_closed(8, 1) == 8);
    CHECK(complexity_closed(8, 2) == 17);
    CHECK(complexity_closed(8, 3) == 27);
    CHECK_THROWS_AS(complexity_closed(8, 4), std::domain_error);
    CHECK_THROWS_AS(complexity_direct(2, 3), std::domain_error);
}

TEST_CASE("eCQI configuration validation")
{
    EcqiConfig c;
    CHECK_NOTHROW(c.validate());
    c.n = 9;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("N exceeds M"), std::domain_error);
    c = {};
    c.f = 5;
    CHECK_THROWS_AS(c.validate(), std::domain_error);
    c = {};
    c.p = 1.0;
    CHECK_THROWS_AS(c.validate(), std::domain_error);
    CHECK(parse_search_kind(to_string(SearchKind::Relaxed)) == SearchKind::Relaxed);
    CHECK(parse_eval_method(to_string(EvalMethod::Direct)) == EvalMethod::Direct);
    CHECK(parse_ecqi_mode(to_string(EcqiMode::ExactlyN)) == EcqiMode::ExactlyN);
    CHECK_THROWS_AS(parse_search_kind("bogus"), std::domain_error);
}

TEST_CASE("eCQI over a link-level profile")
{
    const auto t = link::McsTable::nr_256qam();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(15.0, 6.0);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> sinr(8);
        for (auto& s : sinr) {
            s = g(rng);
        }
        const link::CbSinrProfile profile(sinr, 8);
        for (unsigned n : {1u, 2u, 3u}) {
            EcqiConfig c;
            c.n = n;
            c.p = 0.9;
            c.search = SearchKind::LinearAscending;
            c.eval = EvalMethod::PoissonBinomial;
            const auto ref = ecqi(profile, t, c);
            for (auto search : {SearchKind::Binary, SearchKind::LinearDescending, SearchKind::Relaxed}) {
                for (auto eval : {EvalMethod::ClosedForm, EvalMethod::Direct}) {
                    EcqiConfig d = c;
                    d.search = search;
                    d.eval = eval;
                    const auto rep = ecqi(profile, t, d);
                    CHECK(rep.index == ref.index);
                    CHECK(rep.out_of_range == ref.out_of_range);
                }
            }
        }
    }
}

TEST_CASE("eCQI multiplication counts per evaluation")
{
    const auto t = link::McsTable::nr_256qam();
    const link::CbSinrProfile profile(std::vector<double>(8, 12.0), 8);
    for (unsigned n = 1; n <= 3; ++n) {
        EcqiConfig c;
        c.n = n;
        c.mode = EcqiMode::ExactlyN;
        SearchStats s;
        ecqi_quality(profile, t[5], c, s);
        CHECK(s.multiplications == complexity_closed(8, n));
        c.eval = EvalMethod::Direct;
        SearchStats sd;
        ecqi_quality(profile, t[5], c, sd);
        CHECK(sd.multiplications == complexity_direct(8, n));
    }
}

TEST_CASE("eCQI is at least the TBEP-based choice when N = 0 and P = 0.9")
{
    // With N = 0 and P = 1 - target, Q(r) = 1 - TBEP(r): eCQI reduces to the
    // baseline rule (up to the strict/inclusive boundary).
    const auto t = link::McsTable::nr_256qam();
    for (double s = -5.0; s <= 35.0; s += 0.7) {
        const link::CbSinrProfile profile(std::vector<double>(4, s), 4);
        EcqiConfig c;
        c.n = 0;
        c.m = 4;
        c.p = 0.9;
        const auto rep = ecqi(profile, t, c);
        CHECK(rep.index == baseline_cqi(s, t, 0.1, 4));
    }
}

TEST_CASE("monotonicity check falls back to a linear scan")
{
    const auto t = link::McsTable::nr_256qam();
    // Profile depends on r, making Q non-monotone on purpose.
    const ProfileFn profile_for = [&](std::size_t r) {
        const double s = r == 20 ? t[r].bler_midpoint_db + 30.0 : t[r].bler_midpoint_db - 10.0;
        return link::CbSinrProfile(std::vector<double>(8, s), 8);
    };
    EcqiConfig c;
    c.validate_monotone = true;
    const auto rep = ecqi(profile_for, t, c);
    CHECK(rep.monotonicity_violation);
    CHECK(rep.index == 20);
}
