#include "xrla/link_map.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

using namespace xrla::link;

TEST_CASE("mcs table ladder")
{
    const auto t = McsTable::nr_256qam();
    REQUIRE(t.size() == 28);
    CHECK(t[0].modulation_order == 2);
    CHECK(t[27].modulation_order == 8);
    for (std::size_t r = 1; r < t.size(); ++r) {
        CHECK(t[r].spectral_efficiency > t[r - 1].spectral_efficiency);
        CHECK(t[r].bler_midpoint_db > t[r - 1].bler_midpoint_db);
    }
    // Midpoint is the Shannon SINR of the spectral efficiency plus the gap.
    const double se = t[10].spectral_efficiency;
    CHECK(t[10].bler_midpoint_db == doctest::Approx(10.0 * std::log10(std::exp2(se) - 1.0) + 1.5));
    CHECK(t.nearest_by_midpoint(t[5].bler_midpoint_db) == 5);
    CHECK(t.nearest_by_midpoint(-100.0) == 0);
    CHECK(t.nearest_by_midpoint(100.0) == 27);
}

TEST_CASE("mcs table rejects a non-monotone ladder")
{
    std::vector<double> mid(28);
    std::iota(mid.begin(), mid.end(), -5.0);
    CHECK_NOTHROW(McsTable::nr_256qam_with_midpoints(mid, 2.0));
    std::swap(mid[3], mid[4]);
    CHECK_THROWS(McsTable::nr_256qam_with_midpoints(mid, 2.0));
    CHECK_THROWS(McsTable::nr_256qam_with_midpoints(std::vector<double>(5, 0.0), 2.0));
}

TEST_CASE("logistic bler")
{
    McsEntry e;
    e.bler_midpoint_db = 7.0;
    e.bler_slope = 2.0;
    CHECK(bler(7.0, e) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(bler(7.0 + std::log(9.0) / 2.0, e) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(bler(7.0 + std::log(9.0), e) == doctest::Approx(0.012195121951219512195).epsilon(1e-14));
    CHECK(bler(200.0, e) < 1e-100);
    CHECK(bler(-200.0, e) == doctest::Approx(1.0));
    double prev = 1.0;
    for (double s = -20.0; s <= 40.0; s += 0.25) {
        const double b = bler(s, e);
        CHECK(b <= prev);
        prev = b;
    }
}

TEST_CASE("eesm")
{
    const std::vector<double> flat{3.0, 3.0, 3.0};
    CHECK(eesm(flat, 1.7) == doctest::Approx(3.0).epsilon(1e-14));
    const std::vector<double> two{1.0, 10.0};
    CHECK(std::abs(eesm(two, 1.0) - 1.6930237783702220506) < 1e-12);
    CHECK_THROWS_AS(eesm(std::vector<double>{}, 1.0), std::domain_error);
    CHECK_THROWS_AS(eesm(two, 0.0), std::domain_error);
    CHECK_THROWS_AS(eesm(std::vector<double>{-1.0}, 1.0), std::domain_error);

    // Large beta tends to the arithmetic mean.
    const std::vector<double> spread{0.5, 2.0, 8.0, 30.0};
    CHECK(eesm(spread, 1e6) == doctest::Approx(10.125).epsilon(0.01));

    // Permutation invariance and bounds.
    std::mt19937_64 rng(3);
    std::exponential_distribution<double> ex(0.1);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> g(6);
        for (auto& x : g) {
            x = ex(rng);
        }
        const double a = eesm(g, 2.5);
        std::shuffle(g.begin(), g.end(), rng);
        CHECK(eesm(g, 2.5) == doctest::Approx(a).epsilon(1e-12));
        CHECK(a >= *std::min_element(g.begin(), g.end()) - 1e-12);
        CHECK(a <= *std::max_element(g.begin(), g.end()) + 1e-12);
    }

    const std::vector<double> w{1.0, 1.0};
    CHECK(eesm(two, w, 1.0) == doctest::Approx(eesm(two, 1.0)).epsilon(1e-14));
}

TEST_CASE("mmib")
{
    const MiCurve curve({-10.0, 0.0, 10.0, 20.0}, {0.05, 0.5, 0.9, 1.0});
    CHECK(curve.mi(1.0) == doctest::Approx(0.5));
    CHECK(curve.sinr_linear(0.5) == doctest::Approx(1.0));
    const std::vector<double> flat{10.0, 10.0};
    CHECK(mmib(flat, curve) == doctest::Approx(10.0).epsilon(1e-12));
    const std::vector<double> spread{1.0, 100.0};
    const double m = mmib(spread, curve);
    CHECK(m > 1.0);
    CHECK(m < 100.0);
    CHECK_THROWS(MiCurve({0.0, 1.0}, {0.5, 0.4}));

    const auto mapper = EffectiveSinrMapper::mmib({{2, curve}});
    CHECK(mapper.uses_mmib());
    McsEntry qpsk;
    qpsk.modulation_order = 2;
    qpsk.spectral_efficiency = 1.0;
    CHECK(mapper.effective(spread, qpsk) == doctest::Approx(m));
    // Orders without a curve fall back to per-MCS EESM.
    McsEntry qam16 = qpsk;
    qam16.modulation_order = 4;
    CHECK(mapper.effective(spread, qam16) == doctest::Approx(eesm(spread, 1.0)));
}

TEST_CASE("cbg layout")
{
    const CbgLayout l(12, 8);
    const std::vector<std::size_t> sizes(l.group_sizes().begin(), l.group_sizes().end());
    CHECK(sizes == std::vector<std::size_t>{2, 2, 2, 2, 1, 1, 1, 1});
    CHECK(l.group_range(3) == std::pair<std::size_t, std::size_t>{6, 8});
    CHECK(l.group_of(8) == 4);
    CHECK(l.group_of(11) == 7);
    CHECK(CbgLayout(3, 3).cbg_count() == 3);
    CHECK_THROWS(CbgLayout(3, 8));
}

TEST_CASE("per-cb and per-cbg error probabilities")
{
    const auto t = McsTable::nr_256qam();
    const auto& e = t[12];
    const CbSinrProfile at_mid(std::vector<double>(4, e.bler_midpoint_db), 4);
    for (double p : cb_error_probs(at_mid, e)) {
        CHECK(p == doctest::Approx(0.5));
    }
    const CbSinrProfile ramp({20.0, 15.0, 10.0, 5.0, 0.0, -5.0}, 3);
    const auto cb = cb_error_probs(ramp, e);
    for (std::size_t k = 1; k < cb.size(); ++k) {
        CHECK(cb[k] >= cb[k - 1]);
    }
    const CbSinrProfile huge({1e6, e.bler_midpoint_db}, 2);
    CHECK(cb_error_probs(huge, e)[0] == kMinCbErrorProb);
    const CbSinrProfile tiny({-1e6}, 1);
    CHECK(cb_error_probs(tiny, e)[0] == kMaxCbErrorProb);

    const auto g = cbg_error_probs(ramp, e);
    REQUIRE(g.size() == 3);
    CHECK(g[0] == doctest::Approx(1.0 - (1.0 - cb[0]) * (1.0 - cb[1])));
}
