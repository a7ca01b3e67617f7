#include "xrla/campaign.hpp"
#include "xrla/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace xrla;
using namespace xrla::cli;

namespace fs = std::filesystem;

namespace {

SimConfig from_text(const std::string& text)
{
    SimConfig cfg;
    std::istringstream in(text);
    apply_text(cfg, in);
    return cfg;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path scratch_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("xrla_test_" + name);
    fs::remove_all(dir);
    return dir;
}

SimConfig tiny_campaign()
{
    auto cfg = from_text("sim.horizon_s = 1\ncampaign.loads = 1, 2\ncampaign.seeds = 2\n");
    cfg.validate();
    return cfg;
}

}  // namespace

TEST_CASE("defaults validate")
{
    const auto cfg = from_text("");
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.sim.frame.pattern == "DDDSU");
    CHECK(cfg.campaign.loads.back() == cfg.sim.topology.ues_per_cell);
    CHECK(config_hash(cfg).size() == 16);
}

TEST_CASE("keys, comments and errors")
{
    auto cfg = from_text("# header\necqi.n = 2   # trailing\nframe.pattern = DDDSU\ncampaign.loads = 2, 3\n");
    CHECK(cfg.sim.ecqi.n == 2);
    CHECK(cfg.campaign.loads == std::vector<std::uint32_t>{2, 3});
    CHECK_NOTHROW(cfg.validate());

    CHECK_THROWS_WITH_AS(set_key(cfg, "no.such.key", "1"), doctest::Contains("unknown key"), ConfigError);
    CHECK_THROWS_AS(set_key(cfg, "ecqi.n", "two"), ConfigError);
    CHECK_THROWS_WITH_AS(from_text("ecqi.n = 1\nbogus = 3\n"), doctest::Contains("line 2"), ConfigError);

    auto bad = from_text("ecqi.n = 9\n");
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("N exceeds M"), ConfigError);
}

TEST_CASE("dump round trip preserves the hash")
{
    auto cfg = from_text("ecqi.p = 0.37\nchannel.tx_power_dbm = 17.25\nla.scheme = baseline_tb\n");
    const auto again = from_text(dump_text(cfg));
    CHECK(dump_text(again) == dump_text(cfg));
    CHECK(config_hash(again) == config_hash(cfg));
    auto changed = cfg;
    set_key(changed, "ecqi.p", "0.38");
    CHECK(config_hash(changed) != config_hash(cfg));
}

TEST_CASE("overrides")
{
    SimConfig cfg;
    apply_overrides(cfg, {"ecqi.n=3", "sim.seed=9"});
    CHECK(cfg.sim.ecqi.n == 3);
    CHECK(cfg.sim.seed == 9);
    CHECK_THROWS_AS(apply_overrides(cfg, {"ecqi.n"}), ConfigError);
}

TEST_CASE("run expansion matches seeds across schemes")
{
    const auto cfg = tiny_campaign();
    const auto runs = expand_runs(cfg);
    REQUIRE(runs.size() == 3 * 2 * 2);
    CHECK(runs[0].name() == "baseline_tb_load1_seed1");
    CHECK(runs[1].seed == 2);
    CHECK(runs[4].scheme == sim::Scheme::BaselineCbg);
    CHECK(runs[4].seed == runs[0].seed);
}

TEST_CASE("campaign outputs, re-analysis and manifest rerun")
{
    const auto cfg = tiny_campaign();
    const auto dir = scratch_dir("campaign");
    const auto result = run_campaign(cfg, dir);
    CHECK(result.failures() == 0);
    const char* files[] = {"satisfaction.csv", "prb_utilization.csv", "delay.csv", "mcs_cdf.csv", "capacity.csv"};
    std::vector<std::string> first;
    for (const char* f : files) {
        REQUIRE(fs::exists(dir / f));
        first.push_back(read_file(dir / f));
    }
    CHECK(fs::exists(dir / "runs" / "ecqi_cbg_load2_seed2" / "events.log"));

    const auto recorded = read_manifest(dir / "manifest.txt");
    CHECK(config_hash(recorded) == config_hash(cfg));

    const auto dir2 = scratch_dir("campaign_rerun");
    run_campaign(recorded, dir2);
    for (std::size_t k = 0; k < first.size(); ++k) {
        CHECK(read_file(dir2 / files[k]) == first[k]);
    }

    for (const char* f : files) {
        fs::remove(dir / f);
    }
    CHECK(analyze_campaign(dir).failures() == 0);
    for (std::size_t k = 0; k < first.size(); ++k) {
        CHECK(read_file(dir / files[k]) == first[k]);
    }

    // A tampered manifest is rejected.
    auto text = read_file(dir / "manifest.txt");
    const auto at = text.find("ecqi.p = ");
    REQUIRE(at != std::string::npos);
    text.replace(at, 9, "ecqi.p = 0.1");
    std::ofstream(dir / "manifest.txt", std::ios::binary) << text;
    CHECK_THROWS_AS(read_manifest(dir / "manifest.txt"), ConfigError);

    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("a failing run does not abort the campaign")
{
    auto cfg = tiny_campaign();
    cfg.campaign.loads = {0, 1};
    const auto dir = scratch_dir("failing");
    const auto result = run_campaign(cfg, dir);
    CHECK(result.failures() == 6);
    CHECK(result.runs.size() == 12);
    CHECK(read_file(dir / "manifest.txt").find("status=error") != std::string::npos);
    fs::remove_all(dir);
}
