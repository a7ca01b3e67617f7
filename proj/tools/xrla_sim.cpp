// xrla_sim: configuration check, single runs, sweeps and KPI re-analysis.
//
//   xrla_sim validate [-c FILE] [--set key=value ...] [--dump]
//   xrla_sim run      [-c FILE] -o DIR [--set ...]
//   xrla_sim sweep    [-c FILE] -o DIR [--set ...] [--from-manifest FILE]
//   xrla_sim analyze  -o DIR
//
// Any config key may also be given as --key=value (e.g. --ecqi.n=2).

#include "xrla/campaign.hpp"
#include "xrla/config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using xrla::cli::SimConfig;

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("-c,--config", c.config_path, "configuration file (defaults when omitted)");
    app->add_option("--set", c.overrides, "override a key: --set key=value")->take_all();
    app->allow_extras();
}

/// Turns leftover "--key=value" arguments into overrides.
std::vector<std::string> extras_to_overrides(const std::vector<std::string>& extras)
{
    std::vector<std::string> out;
    for (const auto& e : extras) {
        if (e.rfind("--", 0) != 0 || e.find('=') == std::string::npos) {
            throw xrla::cli::ConfigError("unrecognized argument '" + e + "'");
        }
        out.push_back(e.substr(2));
    }
    return out;
}

SimConfig build_config(const Common& c, const CLI::App* app)
{
    SimConfig cfg = c.config_path.empty() ? SimConfig{} : xrla::cli::load_config(c.config_path);
    xrla::cli::apply_overrides(cfg, c.overrides);
    xrla::cli::apply_overrides(cfg, extras_to_overrides(app->remaining()));
    cfg.validate();
    return cfg;
}

void print_summary(const xrla::cli::CampaignResult& result)
{
    for (const auto& r : result.runs) {
        if (!r.ok) {
            continue;
        }
        std::printf("%-34s satisfied %zu/%zu  first-tx TBER %.4f  new PRBs %llu  retx PRBs %llu\n",
                    r.spec.name().c_str(), r.satisfied_ues, r.resolved_ues, r.stats.first_tx_tber(),
                    static_cast<unsigned long long>(r.stats.new_tx_prbs),
                    static_cast<unsigned long long>(r.stats.retx_prbs));
    }
    if (result.failures() > 0) {
        std::fprintf(stderr, "%zu of %zu runs failed\n", result.failures(), result.runs.size());
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"XR link-adaptation simulator"};
    app.require_subcommand(1);

    Common vc;
    bool dump = false;
    auto* validate = app.add_subcommand("validate", "check a configuration");
    add_common(validate, vc);
    validate->add_flag("--dump", dump, "print the resolved configuration");

    Common rc;
    std::string run_out;
    auto* run = app.add_subcommand("run", "run one simulation (la.scheme, topology.ues_per_cell, sim.seed)");
    add_common(run, rc);
    run->add_option("-o,--out", run_out, "output directory")->required();

    Common sc;
    std::string sweep_out;
    std::string manifest;
    auto* sweep = app.add_subcommand("sweep", "run the campaign sweep");
    add_common(sweep, sc);
    sweep->add_option("-o,--out", sweep_out, "output directory")->required();
    sweep->add_option("--from-manifest", manifest, "rerun the configuration recorded in a manifest");

    std::string analyze_dir;
    auto* analyze = app.add_subcommand("analyze", "recompute KPI CSVs from the event logs of a campaign");
    analyze->add_option("-o,--out,dir", analyze_dir, "campaign directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            const auto cfg = build_config(vc, validate);
            if (dump) {
                std::cout << xrla::cli::dump_text(cfg);
            }
            std::cout << "ok " << xrla::cli::config_hash(cfg) << '\n';
            return 0;
        }
        if (*run) {
            auto cfg = build_config(rc, run);
            cfg.campaign.schemes = {cfg.sim.scheme};
            cfg.campaign.loads = {static_cast<std::uint32_t>(cfg.sim.topology.ues_per_cell)};
            cfg.campaign.seeds = 1;
            const auto result = xrla::cli::run_campaign(cfg, run_out, &std::cerr);
            print_summary(result);
            return result.failures() == 0 ? 0 : 1;
        }
        if (*sweep) {
            SimConfig cfg;
            if (!manifest.empty()) {
                if (!sc.config_path.empty() || !sc.overrides.empty() || !sweep->remaining().empty()) {
                    throw xrla::cli::ConfigError("--from-manifest cannot be combined with other configuration");
                }
                cfg = xrla::cli::read_manifest(manifest);
            } else {
                cfg = build_config(sc, sweep);
            }
            const auto result = xrla::cli::run_campaign(cfg, sweep_out, &std::cerr);
            print_summary(result);
            return result.failures() == 0 ? 0 : 1;
        }
        if (*analyze) {
            const auto result = xrla::cli::analyze_campaign(analyze_dir, &std::cerr);
            return result.failures() == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
