#include "xrla/probability.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace xrla::prob;

namespace {

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t m)
{
    // Mix of tiny, moderate and near-one probabilities.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(m);
    for (auto& x : p) {
        const double r = u(rng);
        if (r < 0.2) {
            x = std::pow(10.0, -12.0 * u(rng));
        } else if (r < 0.3) {
            x = 1.0 - std::pow(10.0, -1.0 - 5.0 * u(rng));
        } else {
            x = u(rng) * 0.999;
        }
    }
    return p;
}

}  // namespace

TEST_CASE("cbg error probability of i.i.d. code blocks")
{
    CHECK(cbg_error_prob_iid(0.0, 4) == 0.0);
    CHECK(cbg_error_prob_iid(1.0, 3) == 1.0);
    CHECK(cbg_error_prob_iid(0.01, 4) == doctest::Approx(0.03940399).epsilon(1e-14));
    CHECK_THROWS_AS(cbg_error_prob_iid(-0.1, 4), std::domain_error);
    CHECK_THROWS_AS(cbg_error_prob_iid(1.1, 4), std::domain_error);
}

TEST_CASE("tbep and cbgep are inverse")
{
    CHECK(tbep_from_cbgep(0.0, 8) == 0.0);
    CHECK(tbep_from_cbgep(1.0, 8) == 1.0);
    CHECK(cbgep_from_tbep(0.0, 8) == 0.0);
    CHECK(cbgep_from_tbep(0.1, 1) == doctest::Approx(0.1).epsilon(1e-15));
    const double p = cbgep_from_tbep(0.1, 8);
    CHECK(std::abs(p - 0.013083718633998436748) < 1e-15);
    CHECK(std::abs(tbep_from_cbgep(p, 8) - 0.1) < 1e-12);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double t = u(rng);
        const std::size_t m = 1 + k % 8;
        CHECK(std::abs(tbep_from_cbgep(cbgep_from_tbep(t, m), m) - t) < 1e-12);
    }
}

TEST_CASE("binomial terms")
{
    const double p = cbgep_from_tbep(0.1, 8);
    CHECK(std::abs(binomial_pmf(p, 8, 1) - 0.095451636520173382779) < 1e-15);
    CHECK(std::abs(at_most_n_failed_iid(p, 8, 0) - 0.9) < 1e-14);
    CHECK(std::abs(at_most_n_failed_iid(p, 8, 2) - 0.99988060210355220773) < 1e-14);
    CHECK(at_most_n_failed_iid(0.37, 6, 6) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(at_most_n_failed_iid(0.1, 4, 5), std::domain_error);
    CHECK_THROWS_AS(binomial_pmf(0.1, 4, 5), std::domain_error);
}

TEST_CASE("general cbg error probability")
{
    const std::vector<double> zeros{0.0, 0.0};
    const std::vector<double> half{0.5};
    const std::vector<double> two{0.1, 0.2};
    CHECK(cbg_error_prob_general(zeros) == 0.0);
    CHECK(cbg_error_prob_general(half) == 0.5);
    CHECK(cbg_error_prob_general(two) == doctest::Approx(0.28).epsilon(1e-15));
    CHECK_THROWS_AS(cbg_error_prob_general(std::vector<double>{}), std::domain_error);
}

TEST_CASE("exact and enumerated failed-cbg counts")
{
    const CbgErrorVector v({0.1, 0.2, 0.3});
    CHECK(std::abs(exact_n_failed(v, 0) - 0.504) < 1e-15);
    CHECK(std::abs(exact_n_failed(v, 2) - 0.092) < 1e-15);
    CHECK(std::abs(brute_force_n_failed(v, 2) - 0.092) < 1e-15);
    CHECK(std::abs(exact_n_failed(CbgErrorVector({0.5, 0.5, 0.5}), 1) - 0.375) < 1e-15);
    CHECK_THROWS_AS(exact_n_failed(v, 4), std::domain_error);

    const double p = cbgep_from_tbep(0.1, 8);
    const std::vector<double> same(8, p);
    CHECK(std::abs(brute_force_n_failed(same, 1) - binomial_pmf(p, 8, 1)) < 1e-12);
    CHECK(std::abs(brute_force_n_failed(same, 0) + brute_force_n_failed(same, 1) + brute_force_n_failed(same, 2) -
                   0.99988060210355220773) < 1e-12);

    CHECK_THROWS_AS(brute_force_n_failed(std::vector<double>(kMaxEnumerationCbgs + 1, 0.1), 0), std::length_error);
}

TEST_CASE("cbg error vector validation")
{
    CHECK_THROWS_AS(CbgErrorVector({}), std::domain_error);
    CHECK_THROWS_AS(CbgErrorVector(std::vector<double>(9, 0.1)), std::domain_error);
    CHECK_THROWS_AS(CbgErrorVector({0.1, 1.5}), std::domain_error);
    CHECK_THROWS_AS(CbgErrorVector({-0.1}), std::domain_error);
    CHECK_NOTHROW(CbgErrorVector(std::vector<double>(12, 0.1), 16));
}

TEST_CASE("odds")
{
    CHECK(odds(0.0) == 0.0);
    CHECK(odds(0.5) == 1.0);
    CHECK(odds(0.1) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK_THROWS_AS(odds(1.0), std::domain_error);
    CHECK_THROWS_AS(odds(-0.1), std::domain_error);
    CHECK_THROWS_AS(OddsVector::from_probabilities(CbgErrorVector({0.2, 1.0})), std::domain_error);
    CHECK_THROWS_AS(OddsVector({-1.0}), std::domain_error);

    const auto o = OddsVector::from_probabilities(CbgErrorVector({0.1, 0.2, 0.3}));
    const auto back = o.to_probabilities();
    CHECK(back[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(back[2] == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("closed form examples")
{
    const auto o2 = OddsVector::from_probabilities(CbgErrorVector({0.1, 0.2}));
    CHECK(std::abs(closed_form_n_failed(o2, 1) - 0.26) < 1e-15);
    CHECK(std::abs(closed_form_n_failed(o2, 0) - 0.72) < 1e-15);
    const auto o3 = OddsVector::from_probabilities(CbgErrorVector({0.1, 0.2, 0.3}));
    CHECK(std::abs(closed_form_n_failed(o3, 2) - 0.092) < 1e-15);
    CHECK(std::abs(closed_form_n_failed(o3, 3) - 0.006) < 1e-15);
    CHECK_THROWS_AS(closed_form_n_failed(o2, 3), std::domain_error);
    CHECK_THROWS_AS(closed_form_n_failed(OddsVector(std::vector<double>(8, 0.1)), 4), std::invalid_argument);
}

TEST_CASE("closed form, convolution and direct sum agree with enumeration")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 2 + static_cast<std::size_t>(trial % 7);
        const auto probs = random_probs(rng, m);
        const CbgErrorVector v(probs);
        const auto o = OddsVector::from_probabilities(v);
        const auto prefix = closed_form_prefix(o, static_cast<unsigned>(std::min<std::size_t>(3, m)));
        double total = 0.0;
        for (std::size_t n = 0; n <= m; ++n) {
            const double truth = brute_force_n_failed(v, n);
            total += truth;
            CHECK(std::abs(exact_n_failed(v, n) - truth) < 1e-12);
            CHECK(std::abs(direct_n_failed(v, n) - truth) < 1e-12);
            if (n <= 3) {
                CHECK(std::abs(closed_form_n_failed(o, static_cast<unsigned>(n)) - truth) < 1e-12);
                CHECK(std::abs(prefix[n] - truth) < 1e-12);
            }
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("distribution accessors")
{
    const auto d = error_count_distribution(CbgErrorVector({0.1, 0.2, 0.3}));
    CHECK(d.max_count() == 3);
    CHECK(d.at(0) == doctest::Approx(0.504));
    CHECK(d.at_most(3) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.at_most(1) == doctest::Approx(0.504 + 0.398));
}

TEST_CASE("multiplication counts")
{
    const CbgErrorVector v(std::vector<double>(8, 0.05));
    const auto o = OddsVector::from_probabilities(v);
    const std::uint64_t closed[] = {0, 8, 17, 27};
    for (unsigned n = 1; n <= 3; ++n) {
        OpCounter c;
        closed_form_n_failed(o, n, &c);
        CHECK(c.multiplications == closed[n]);
        OpCounter cp;
        closed_form_prefix(o, n, &cp);
        CHECK(cp.multiplications == closed[n]);
    }
    OpCounter d;
    direct_n_failed(v, 2, &d);
    CHECK(d.multiplications == 224);
}

TEST_CASE("correlated model")
{
    CHECK(correlated_pmf({0.3, 1.0, 8}, 8) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(correlated_pmf({0.3, 1.0, 8}, 0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(correlated_pmf({0.3, 1.0, 8}, 3) == 0.0);
    CHECK(std::abs(correlated_pmf({0.2, 0.7, 4}, 0) - 0.68288) < 1e-15);
    for (std::size_t n = 0; n <= 8; ++n) {
        CHECK(std::abs(correlated_pmf({0.04, 0.0, 8}, n) - binomial_pmf(0.04, 8, n)) < 1e-12);
    }
    double total = 0.0;
    const auto dist = correlated_distribution({0.013, 0.7, 8});
    for (double x : dist.pmf()) {
        total += x;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
    CHECK_THROWS_AS(correlated_pmf({0.1, 1.5, 8}, 0), std::domain_error);
    CHECK_THROWS_AS(correlated_pmf({0.1, 0.5, 8}, 9), std::domain_error);
}
