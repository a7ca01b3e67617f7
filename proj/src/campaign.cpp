#include "xrla/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace xrla::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestHeader = "# xrla-manifest v1";

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

std::string csv_text(const std::vector<kpi::KpiRow>& rows)
{
    std::ostringstream out;
    kpi::write_csv(out, rows);
    return out.str();
}

fs::path log_path(const fs::path& out_dir, const RunSpec& spec)
{
    return out_dir / "runs" / spec.name() / "events.log";
}

void report(std::ostream* progress, std::mutex& mu, const std::string& line)
{
    if (progress != nullptr) {
        std::lock_guard lock(mu);
        *progress << line << '\n' << std::flush;
    }
}

std::string status_line(const RunOutcome& r)
{
    if (r.ok) {
        return r.spec.name() + " ok";
    }
    return r.spec.name() + " error: " + r.error;
}

/// Runs `work(k)` for k in [0, count) on up to `threads` workers.
template <typename Work>
void parallel_for(std::size_t count, unsigned threads, Work work)
{
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            work(k);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
}

}  // namespace

std::string RunSpec::name() const
{
    return std::string(sim::to_string(scheme)) + "_load" + std::to_string(load) + "_seed" + std::to_string(seed);
}

std::size_t CampaignResult::failures() const
{
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const RunOutcome& r) { return !r.ok; }));
}

std::vector<RunSpec> expand_runs(const SimConfig& cfg)
{
    std::vector<RunSpec> out;
    for (auto scheme : cfg.campaign.schemes) {
        for (auto load : cfg.campaign.loads) {
            for (std::uint32_t k = 0; k < cfg.campaign.seeds; ++k) {
                out.push_back({scheme, load, cfg.sim.seed + k});
            }
        }
    }
    return out;
}

sim::SimParams run_params(const SimConfig& cfg, const RunSpec& spec)
{
    auto p = cfg.sim;
    p.scheme = spec.scheme;
    p.topology.ues_per_cell = spec.load;
    p.seed = spec.seed;
    p.record_events = true;
    return p;
}

RunOutcome evaluate_log(const RunSpec& spec, const sim::EventLog& log, const KpiParams& kpi)
{
    RunOutcome r;
    r.spec = spec;
    r.kpis = kpi::run_kpis(log, kpi.x);
    if (!r.kpis.satisfaction.empty()) {
        const auto sat = kpi::satisfaction(log, log.header.pdb_ms, kpi.x);
        r.resolved_ues = sat.ues.size();
        r.satisfied_ues = static_cast<std::size_t>(std::count_if(
            sat.ues.begin(), sat.ues.end(), [](const kpi::UeSatisfaction& u) { return u.satisfied; }));
    }
    r.ok = true;
    return r;
}

void write_kpi_csvs(const SimConfig& cfg, const CampaignResult& result, const fs::path& out_dir)
{
    std::vector<kpi::KpiRow> sat;
    std::vector<kpi::KpiRow> prb;
    std::vector<kpi::KpiRow> delay;
    std::vector<kpi::KpiRow> mcs;
    // Satisfied UEs pooled over seeds, per scheme and load.
    std::map<std::pair<std::string, std::uint32_t>, std::pair<std::size_t, std::size_t>> pooled;
    for (const auto& r : result.runs) {
        if (!r.ok) {
            continue;
        }
        sat.insert(sat.end(), r.kpis.satisfaction.begin(), r.kpis.satisfaction.end());
        prb.insert(prb.end(), r.kpis.prb.begin(), r.kpis.prb.end());
        delay.insert(delay.end(), r.kpis.delay.begin(), r.kpis.delay.end());
        mcs.insert(mcs.end(), r.kpis.mcs.begin(), r.kpis.mcs.end());
        auto& p = pooled[{std::string(sim::to_string(r.spec.scheme)), r.spec.load}];
        p.first += r.satisfied_ues;
        p.second += r.resolved_ues;
    }

    std::ostringstream cap;
    cap << "scheme,load,seed,cell,metric,value\n";
    for (auto scheme : cfg.campaign.schemes) {
        const std::string name(sim::to_string(scheme));
        std::vector<kpi::CapacityPoint> points;
        for (auto load : cfg.campaign.loads) {
            const auto it = pooled.find({name, load});
            if (it == pooled.end() || it->second.second == 0) {
                continue;
            }
            const double frac = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
            points.push_back({load, frac});
            cap << name << ',' << load << ",all,all,satisfied_fraction," << kpi::format_value(frac) << '\n';
        }
        const auto c = kpi::capacity(points, cfg.kpi.y);
        cap << name << ",all,all,all,capacity," << c.capacity << '\n';
        cap << name << ",all,all,all,monotone," << (c.monotone ? 1 : 0) << '\n';
    }

    write_file(out_dir / "satisfaction.csv", csv_text(sat));
    write_file(out_dir / "prb_utilization.csv", csv_text(prb));
    write_file(out_dir / "delay.csv", csv_text(delay));
    write_file(out_dir / "mcs_cdf.csv", csv_text(mcs));
    write_file(out_dir / "capacity.csv", cap.str());
}

void write_manifest(std::ostream& out, const SimConfig& cfg, const CampaignResult& result)
{
    out << kManifestHeader << '\n';
    out << "config_hash = " << config_hash(cfg) << '\n';
    out << "version = " << kVersion << '\n';
    out << "[config]\n" << dump_text(cfg);
    out << "[runs]\n";
    for (const auto& r : result.runs) {
        out << r.spec.name() << " scheme=" << sim::to_string(r.spec.scheme) << " load=" << r.spec.load
            << " seed=" << r.spec.seed << " status=" << (r.ok ? "ok" : "error") << '\n';
    }
}

SimConfig read_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open manifest '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != kManifestHeader) {
        throw ConfigError("'" + path.string() + "' is not a manifest");
    }
    std::string recorded_hash;
    std::ostringstream config_text;
    enum class Section { Preamble, Config, Runs } section = Section::Preamble;
    while (std::getline(in, line)) {
        if (line == "[config]") {
            section = Section::Config;
        } else if (line == "[runs]") {
            section = Section::Runs;
        } else if (section == Section::Config) {
            config_text << line << '\n';
        } else if (section == Section::Preamble && line.rfind("config_hash = ", 0) == 0) {
            recorded_hash = line.substr(14);
        }
    }
    SimConfig cfg;
    std::istringstream text(config_text.str());
    apply_text(cfg, text);
    cfg.validate();
    if (config_hash(cfg) != recorded_hash) {
        throw ConfigError("manifest config hash mismatch: recorded " + recorded_hash + ", computed " +
                          config_hash(cfg));
    }
    return cfg;
}

CampaignResult run_campaign(const SimConfig& cfg, const fs::path& out_dir, std::ostream* progress)
{
    cfg.validate();
    const auto specs = expand_runs(cfg);
    fs::create_directories(out_dir);
    CampaignResult result;
    result.runs.resize(specs.size());
    std::mutex mu;

    parallel_for(specs.size(), cfg.campaign.parallelism, [&](std::size_t k) {
        const auto& spec = specs[k];
        auto& out = result.runs[k];
        try {
            auto sim_result = sim::simulate(run_params(cfg, spec));
            // KPIs come from the serialized log so that analyze reproduces them.
            std::ostringstream text;
            sim::write_event_log(text, sim_result.log);
            std::istringstream back(text.str());
            out = evaluate_log(spec, sim::read_event_log(back), cfg.kpi);
            out.stats = sim_result.stats;
            if (cfg.campaign.write_events) {
                const auto path = log_path(out_dir, spec);
                fs::create_directories(path.parent_path());
                write_file(path, text.str());
            }
        } catch (const std::exception& e) {
            out = RunOutcome{};
            out.spec = spec;
            out.error = e.what();
        }
        report(progress, mu, status_line(out));
    });

    write_kpi_csvs(cfg, result, out_dir);
    std::ostringstream manifest;
    write_manifest(manifest, cfg, result);
    write_file(out_dir / "manifest.txt", manifest.str());
    return result;
}

CampaignResult analyze_campaign(const fs::path& out_dir, std::ostream* progress)
{
    const auto cfg = read_manifest(out_dir / "manifest.txt");
    const auto specs = expand_runs(cfg);
    CampaignResult result;
    result.runs.resize(specs.size());
    std::mutex mu;
    parallel_for(specs.size(), cfg.campaign.parallelism, [&](std::size_t k) {
        const auto& spec = specs[k];
        auto& out = result.runs[k];
        try {
            const auto path = log_path(out_dir, spec);
            std::ifstream in(path);
            if (!in) {
                throw std::runtime_error("missing event log '" + path.string() + "'");
            }
            out = evaluate_log(spec, sim::read_event_log(in), cfg.kpi);
        } catch (const std::exception& e) {
            out = RunOutcome{};
            out.spec = spec;
            out.error = e.what();
        }
        report(progress, mu, status_line(out));
    });
    write_kpi_csvs(cfg, result, out_dir);
    return result;
}

}  // namespace xrla::cli
