#include "xrla/sim/channel.hpp"
#include "xrla/sim/event_log.hpp"
#include "xrla/sim/harq.hpp"
#include "xrla/sim/olla.hpp"
#include "xrla/sim/scheduler.hpp"
#include "xrla/sim/simulator.hpp"
#include "xrla/sim/traffic.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

using namespace xrla;
using namespace xrla::sim;

TEST_CASE("truncated gaussian")
{
    const TruncGaussianParams frame{93.0, 10.0, 46.0, 140.0};
    CHECK(trunc_gaussian_mean(frame) == doctest::Approx(93.0).epsilon(1e-12));
    const TruncGaussianParams skew{1.0, 2.0, -4.0, 4.0};
    CHECK(std::abs(trunc_gaussian_mean(skew) - 0.75837900143680231191) < 1e-12);
    CHECK_THROWS_AS(TruncGaussianParams({0.0, 1.0, 2.0, 1.0}).validate(), std::domain_error);
    CHECK_THROWS_AS(TruncGaussianParams({0.0, 0.0, -1.0, 1.0}).validate(), std::domain_error);

    std::mt19937_64 rng(42);
    const int n = 100000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double x = sample_trunc_gaussian(skew, rng);
        REQUIRE(x >= -4.0);
        REQUIRE(x <= 4.0);
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - trunc_gaussian_mean(skew)) < 3.0 * se);

    const TruncGaussianParams narrow{2.5, 1e-9, -4.0, 4.0};
    CHECK(sample_trunc_gaussian(narrow, rng) == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("xr traffic")
{
    std::mt19937_64 rng(1);
    TrafficParams p;
    const auto pkts = generate_traffic(p, 10000.0, rng);
    CHECK(pkts.size() == 600);
    for (const auto& k : pkts) {
        const double nominal = static_cast<double>(k.frame_index) * 1000.0 / 60.0;
        CHECK(k.arrival_ms >= nominal - 4.0 - 1e-9);
        CHECK(k.arrival_ms <= nominal + 4.0 + 1e-9);
        CHECK(k.size_bits >= 46 * 8000);
        CHECK(k.size_bits <= 140 * 8000);
        CHECK(k.deadline_ms == doctest::Approx(k.arrival_ms + 10.0));
    }

    TrafficParams still = p;
    still.jitter_ms = {0.0, 1e-12, -4.0, 4.0};
    const auto s = generate_traffic(still, 50.0, rng);
    REQUIRE(s.size() == 3);
    CHECK(s[0].arrival_ms == doctest::Approx(16.6667).epsilon(1e-4));
    CHECK(s[1].arrival_ms == doctest::Approx(33.3333).epsilon(1e-4));
    CHECK(s[2].arrival_ms == doctest::Approx(50.0).epsilon(1e-9));
}

TEST_CASE("tb segmentation")
{
    const auto a = segment_tb(8448, 8);
    CHECK(a.cb_count == 1);
    CHECK(a.cbg_count == 1);
    const auto b = segment_tb(100000, 8);
    CHECK(b.cb_count == 12);
    CHECK(b.cbg_count == 8);
    const std::vector<std::size_t> sizes(b.layout.group_sizes().begin(), b.layout.group_sizes().end());
    CHECK(sizes == std::vector<std::size_t>{2, 2, 2, 2, 1, 1, 1, 1});
    const auto c = segment_tb(20000, 2);
    CHECK(c.cb_count == 3);
    CHECK(c.cbg_count == 2);
    CHECK_THROWS_AS(segment_tb(0, 8), std::domain_error);
    CHECK_THROWS_AS(segment_tb(1000, 3), std::domain_error);
}

TEST_CASE("harq process with chase combining")
{
    const auto t = link::McsTable::nr_256qam();
    const auto& e = t[15];
    const auto seg = segment_tb(100000, 8);
    HarqProcess h(0, 100000, seg.layout, 15, 4);
    std::mt19937_64 rng(9);
    // SINR far below the midpoint: every attempt fails.
    const double low = link::db_to_linear(e.bler_midpoint_db - 40.0);
    std::vector<double> prev(seg.cb_count, 0.0);
    while (!h.exhausted()) {
        const auto cbs = h.cbs_to_send();
        const auto fb = h.transmit(std::vector<double>(cbs.size(), low), e, rng);
        CHECK(fb.ack.size() == 8);
        const auto acc = h.accumulated_sinr();
        for (std::size_t k = 0; k < acc.size(); ++k) {
            CHECK(acc[k] >= prev[k]);
            prev[k] = acc[k];
        }
    }
    CHECK(h.attempts() == 4);
    CHECK_FALSE(h.complete());

    // Very high SINR: first attempt decodes everything.
    HarqProcess g(1, 100000, seg.layout, 15, 4);
    const auto fb = g.transmit(std::vector<double>(seg.cb_count, 1e12), e, rng);
    CHECK(fb.all_acked());
    CHECK(g.complete());
    CHECK(g.cbs_to_send().empty());
}

TEST_CASE("cbg retransmission resends only the failed groups")
{
    const auto t = link::McsTable::nr_256qam();
    const auto& e = t[10];
    const auto seg = segment_tb(8 * 8448, 8);
    HarqProcess h(0, 8 * 8448, seg.layout, 10, 4);
    std::mt19937_64 rng(3);
    std::vector<double> sinr(8, 1e12);
    sinr[2] = 1e-9;
    sinr[5] = 1e-9;
    const auto fb = h.transmit(sinr, e, rng);
    CHECK(fb.nack_count() == 2);
    CHECK(h.cbs_to_send() == std::vector<std::size_t>{2, 5});
    CHECK(h.bits_to_send() == 2 * 8448);
}

TEST_CASE("olla")
{
    OllaParams p;
    p.initial_db = 0.0;
    Olla tb(OllaMode::TbOlla, p);
    CbgFeedback ack{0, {true, true, true}, 0};
    CbgFeedback nack{0, {true, false, true}, 0};
    tb.update(ack);
    CHECK(tb.offset_db() == doctest::Approx(-p.step_down_db()));
    CHECK(p.step_up_db / p.step_down_db() == doctest::Approx(0.9 / 0.1));

    p.initial_db = 15.0;
    Olla top(OllaMode::TbOlla, p);
    top.update(nack);
    CHECK(top.offset_db() == 15.0);

    p.initial_db = -25.0;
    Olla bottom(OllaMode::TbOlla, p);
    bottom.update(ack);
    CHECK(bottom.offset_db() == -25.0);

    p.initial_db = 0.0;
    Olla cbg(OllaMode::CbgEolla, p);
    cbg.update(nack);
    CHECK(cbg.offset_db() == doctest::Approx((p.step_up_db - 2.0 * p.step_down_db()) / 3.0));

    OllaParams bad;
    bad.target = 1.0;
    CHECK_THROWS_AS(Olla(OllaMode::TbOlla, bad), std::domain_error);
}

TEST_CASE("pf selection")
{
    const std::vector<PfCandidate> two{{0, 10.0, 1.0, false}, {1, 20.0, 1.0, false}};
    CHECK(pf_select(two) == 1u);
    const std::vector<PfCandidate> tie{{3, 10.0, 2.0, false}, {1, 10.0, 2.0, false}, {2, 5.0, 1.0, false}};
    CHECK(pf_select(tie) == 1u);
    const std::vector<PfCandidate> retx{{0, 50.0, 1.0, false}, {4, 1.0, 9.0, true}};
    CHECK(pf_select(retx) == 4u);
    CHECK_FALSE(pf_select(std::vector<PfCandidate>{}).has_value());
    CHECK(pf_average_update(10.0, 20.0, 0.1) == doctest::Approx(11.0));
}

TEST_CASE("channel constants")
{
    CHECK(std::abs(pathloss_db(10.0, 4.0, 3.0) - 74.441199826559246387) < 1e-10);
    CHECK(pathloss_db(0.2, 4.0, 3.0) == doctest::Approx(pathloss_db(1.0, 4.0, 3.0)));
    CHECK(std::abs(fading_ar_coefficient(3.0, 4.0, 0.5e-3) - 0.99969498393117930518) < 1e-12);
    CHECK(std::abs(10.0 * std::log10(prb_noise_mw(30.0, 9.0)) - (-109.43697499232712735)) < 1e-9);
    const std::vector<double> none;
    CHECK(sinr_from_powers(2.0, none, 0.5) == doctest::Approx(4.0));
    const std::vector<double> one{1.5};
    CHECK(sinr_from_powers(2.0, one, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("single cell without fading sees tx power over noise")
{
    ChannelParams p;
    p.fading = false;
    const std::vector<Position> cells{{0.0, 0.0, p.gnb_height_m}};
    const std::vector<Position> ues{{6.0, 8.0, p.ue_height_m}};
    Channel ch(p, cells, ues, {}, 1, 0.5e-3);
    ch.set_serving(0, 0);
    const std::vector<std::vector<std::uint8_t>> activity{std::vector<std::uint8_t>(p.prbs, 1)};
    const auto s = ch.sinr(0, activity);
    REQUIRE(s.size() == p.prbs);
    const double expected_db =
        ch.rsrp_dbm(0, 0) + p.serving_bf_gain_db - 10.0 * std::log10(prb_noise_mw(p.scs_khz, p.noise_figure_db));
    CHECK(10.0 * std::log10(s[0]) == doctest::Approx(expected_db).epsilon(1e-12));
    CHECK(s[7] == doctest::Approx(s[0]));
}

TEST_CASE("fading lag-1 autocorrelation")
{
    std::mt19937_64 rng(17);
    const double a = 0.9;
    FadingProcess f(1, a, rng);
    const int n = 200000;
    std::complex<double> prev = f.taps()[0];
    std::complex<double> corr = 0.0;
    double power = 0.0;
    for (int k = 0; k < n; ++k) {
        f.step(rng);
        const auto cur = f.taps()[0];
        corr += cur * std::conj(prev);
        power += std::norm(cur);
        prev = cur;
    }
    CHECK(power / n == doctest::Approx(1.0).epsilon(0.03));
    CHECK(corr.real() / power == doctest::Approx(a).epsilon(0.01));
}

TEST_CASE("frame pattern")
{
    FrameParams f;
    CHECK(f.slot_type(4) == 'U');
    CHECK(f.slot_type(9) == 'U');
    CHECK(f.slot_type(3) == 'S');
    CHECK(f.data_symbols(4) == 0);
    CHECK(f.data_symbols(0) == 13);
    CHECK(f.data_symbols(3) == 9);
}

namespace {

SimParams small_params(Scheme scheme)
{
    SimParams p;
    p.scheme = scheme;
    p.topology.ues_per_cell = 2;
    p.horizon_s = 1.0;
    p.traffic.size_scale = 0.06;
    p.seed = 5;
    return p;
}

std::string log_text(const EventLog& log)
{
    std::ostringstream out;
    write_event_log(out, log);
    return out.str();
}

}  // namespace

TEST_CASE("simulation is deterministic and respects the frame")
{
    for (auto scheme : {Scheme::BaselineTb, Scheme::BaselineCbg, Scheme::EcqiCbg}) {
        const auto a = simulate(small_params(scheme));
        const auto b = simulate(small_params(scheme));
        CHECK(log_text(a.log) == log_text(b.log));
        FrameParams f;
        for (const auto& tx : a.log.tx) {
            CHECK(f.slot_type(tx.slot) != 'U');
            CHECK(tx.attempt >= 1);
            CHECK(tx.attempt <= 4);
            CHECK(tx.acks.size() == tx.cbgs);
            if (scheme == Scheme::BaselineTb && tx.attempt > 1) {
                CHECK(tx.bits > 0);
            }
        }
        for (const auto& r : a.log.prb) {
            CHECK(r.used <= r.total);
        }
    }
    auto other = small_params(Scheme::EcqiCbg);
    other.seed = 6;
    CHECK(log_text(simulate(other).log) != log_text(simulate(small_params(Scheme::EcqiCbg)).log));
}

TEST_CASE("olla offsets stay within bounds")
{
    auto p = small_params(Scheme::EcqiCbg);
    Simulator s(p);
    for (int k = 0; k < 400; ++k) {
        s.step_slot();
        for (std::size_t u = 0; u < s.ue_count(); ++u) {
            REQUIRE(s.olla_offset_db(u) >= -25.0);
            REQUIRE(s.olla_offset_db(u) <= 15.0);
        }
    }
}

TEST_CASE("high sinr decodes every first transmission")
{
    auto p = small_params(Scheme::BaselineCbg);
    p.topology.cells = 1;
    p.topology.ues_per_cell = 1;
    p.channel.tx_power_dbm = 60.0;
    p.channel.fading = false;
    p.channel.shadowing_std_db = 0.0;
    const auto r = simulate(p);
    REQUIRE(r.stats.first_tx_tbs > 0);
    CHECK(r.stats.first_tx_tb_errors == 0);
}

TEST_CASE("event log round trip")
{
    const auto r = simulate(small_params(Scheme::EcqiCbg));
    const auto text = log_text(r.log);
    std::istringstream in(text);
    const auto back = read_event_log(in);
    CHECK(log_text(back) == text);
    CHECK(back.tx.size() == r.log.tx.size());
    CHECK(back.packets.size() == r.log.packets.size());
    CHECK(text.rfind("# xrla-events v1\n", 0) == 0);

    std::istringstream bad("# xrla-events v1\nRUN scheme=x\nBOGUS 1 2\n");
    CHECK_THROWS_AS(read_event_log(bad), std::runtime_error);
    CHECK(parse_packet_status(to_string(PacketStatus::Late)) == PacketStatus::Late);
}
