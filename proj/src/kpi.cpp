#include "xrla/kpi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace xrla::kpi {

namespace {

constexpr int kCdfSteps = 100;

bool delivered(const sim::PacketRecord& p)
{
    return p.status == sim::PacketStatus::InTime || p.status == sim::PacketStatus::Late;
}

bool cell_matches(std::uint32_t cell, int wanted)
{
    return wanted < 0 || cell == static_cast<std::uint32_t>(wanted);
}

std::string cell_label(int cell)
{
    return cell < 0 ? std::string() : std::to_string(cell);
}

}  // namespace

SatisfactionReport satisfaction(const sim::EventLog& log, double pdb_ms, double x)
{
    std::map<std::uint32_t, UeSatisfaction> per_ue;
    for (const auto& p : log.packets) {
        if (p.status == sim::PacketStatus::InFlight) {
            continue;
        }
        auto& u = per_ue[p.ue];
        u.ue = p.ue;
        u.cell = p.cell;
        ++u.packets;
        if (delivered(p) && p.delivery_ms - p.arrival_ms <= pdb_ms + 1e-9) {
            ++u.in_time;
        }
    }
    if (per_ue.empty()) {
        throw std::domain_error("satisfaction needs at least one resolved packet");
    }
    SatisfactionReport rep;
    std::map<std::uint32_t, std::pair<std::size_t, std::size_t>> cells;  // satisfied, total
    std::size_t satisfied = 0;
    for (auto& [id, u] : per_ue) {
        u.fraction = static_cast<double>(u.in_time) / static_cast<double>(u.packets);
        // Integer comparison keeps the boundary exact: in_time >= x * packets.
        u.satisfied = static_cast<double>(u.in_time) >= x * static_cast<double>(u.packets) - 1e-9;
        auto& c = cells[u.cell];
        c.second += 1;
        if (u.satisfied) {
            c.first += 1;
            ++satisfied;
        }
        rep.ues.push_back(u);
    }
    for (const auto& [cell, c] : cells) {
        rep.cell_fraction[cell] = static_cast<double>(c.first) / static_cast<double>(c.second);
    }
    rep.satisfied_fraction = static_cast<double>(satisfied) / static_cast<double>(per_ue.size());
    return rep;
}

CapacityResult capacity(std::span<const CapacityPoint> sweep, double y)
{
    std::vector<CapacityPoint> points(sweep.begin(), sweep.end());
    std::sort(points.begin(), points.end(),
              [](const CapacityPoint& a, const CapacityPoint& b) { return a.load < b.load; });
    CapacityResult res;
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (k > 0 && points[k].satisfied_fraction > points[k - 1].satisfied_fraction) {
            res.monotone = false;
        }
        if (points[k].satisfied_fraction >= y) {
            res.capacity = points[k].load;
        }
    }
    return res;
}

std::vector<double> prb_utilization(const sim::EventLog& log, int cell)
{
    std::vector<double> out;
    for (const auto& r : log.prb) {
        if (cell_matches(r.cell, cell)) {
            out.push_back(static_cast<double>(r.used) / static_cast<double>(r.total));
        }
    }
    return out;
}

Cdf prb_utilization_cdf(const sim::EventLog& log, int cell)
{
    const auto samples = prb_utilization(log, cell);
    Cdf cdf;
    if (samples.empty()) {
        return cdf;
    }
    // Count samples per 1% bucket (ceiling, so 0 stays at 0 and 1 at 1).
    std::vector<std::size_t> hist(kCdfSteps + 1, 0);
    for (double u : samples) {
        const auto k = static_cast<int>(std::ceil(u * kCdfSteps - 1e-9));
        ++hist[static_cast<std::size_t>(std::clamp(k, 0, kCdfSteps))];
    }
    std::size_t acc = 0;
    for (int k = 0; k <= kCdfSteps; ++k) {
        acc += hist[static_cast<std::size_t>(k)];
        cdf.x.push_back(static_cast<double>(k) / kCdfSteps);
        cdf.f.push_back(static_cast<double>(acc) / static_cast<double>(samples.size()));
    }
    return cdf;
}

double percentile_nearest_rank(std::vector<double> values, double q)
{
    if (values.empty()) {
        throw std::domain_error("percentile of an empty sample");
    }
    if (!(q > 0.0 && q <= 100.0)) {
        throw std::domain_error("percentile must lie in (0, 100]");
    }
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

std::vector<double> packet_delays(const sim::EventLog& log, int cell)
{
    std::vector<double> out;
    for (const auto& p : log.packets) {
        if (delivered(p) && cell_matches(p.cell, cell)) {
            out.push_back(p.delivery_ms - p.arrival_ms);
        }
    }
    return out;
}

double delay_percentile(const sim::EventLog& log, double q, int cell)
{
    auto delays = packet_delays(log, cell);
    if (delays.empty()) {
        throw std::domain_error("no delivered packets");
    }
    return percentile_nearest_rank(std::move(delays), q);
}

std::vector<double> mcs_cdf(const sim::EventLog& log, std::size_t table_size)
{
    std::vector<double> counts(table_size, 0.0);
    double total = 0.0;
    for (const auto& t : log.tx) {
        if (t.attempt != 1) {
            continue;
        }
        if (t.mcs >= table_size) {
            throw std::domain_error("MCS index beyond the table size");
        }
        counts[t.mcs] += 1.0;
        total += 1.0;
    }
    if (total == 0.0) {
        throw std::domain_error("no first transmissions in the log");
    }
    double acc = 0.0;
    for (auto& c : counts) {
        acc += c;
        c = acc / total;
    }
    counts.back() = 1.0;
    return counts;
}

bool at_or_right_of(std::span<const double> cdf_a, std::span<const double> cdf_b, double tol)
{
    if (cdf_a.size() != cdf_b.size()) {
        throw std::invalid_argument("CDFs differ in support");
    }
    for (std::size_t k = 0; k < cdf_a.size(); ++k) {
        if (cdf_a[k] > cdf_b[k] + tol) {
            return false;
        }
    }
    return true;
}

std::string format_value(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

KpiTables run_kpis(const sim::EventLog& log, double x, std::size_t table_size)
{
    const auto& h = log.header;
    KpiTables out;
    const std::string seed = std::to_string(h.seed);
    auto row = [&](int cell, std::string metric, double value) {
        return KpiRow{h.scheme, h.load, seed, cell_label(cell), std::move(metric), value};
    };

    std::vector<int> cells{-1};
    for (std::uint32_t c = 0; c < h.cells; ++c) {
        cells.push_back(static_cast<int>(c));
    }

    // Full-buffer runs carry no packets.
    const bool resolved = std::any_of(log.packets.begin(), log.packets.end(), [](const sim::PacketRecord& p) {
        return p.status != sim::PacketStatus::InFlight;
    });
    if (resolved) {
        const auto sat = satisfaction(log, h.pdb_ms, x);
        out.satisfaction.push_back(row(-1, "satisfied_fraction", sat.satisfied_fraction));
        for (const auto& [cell, frac] : sat.cell_fraction) {
            out.satisfaction.push_back(row(static_cast<int>(cell), "satisfied_fraction", frac));
        }
        for (const auto& u : sat.ues) {
            out.satisfaction.push_back(
                row(static_cast<int>(u.cell), "ue" + std::to_string(u.ue) + "_in_time_fraction", u.fraction));
        }
    }

    for (int c : cells) {
        const auto util = prb_utilization(log, c);
        if (util.empty()) {
            continue;
        }
        double mean = 0.0;
        for (double u : util) {
            mean += u;
        }
        mean /= static_cast<double>(util.size());
        out.prb.push_back(row(c, "mean_utilization", mean));
        out.prb.push_back(row(c, "median_utilization", percentile_nearest_rank(util, 50.0)));
        if (c < 0) {
            const auto cdf = prb_utilization_cdf(log, c);
            for (std::size_t k = 0; k < cdf.x.size(); ++k) {
                out.prb.push_back(row(c, "cdf_at_" + format_value(cdf.x[k]), cdf.f[k]));
            }
        }
    }

    for (int c : cells) {
        auto delays = packet_delays(log, c);
        if (delays.empty()) {
            continue;
        }
        out.delay.push_back(row(c, "p50_delay_ms", percentile_nearest_rank(delays, 50.0)));
        out.delay.push_back(row(c, "p99_delay_ms", percentile_nearest_rank(std::move(delays), 99.0)));
    }

    if (log.tx.empty()) {
        return out;
    }
    const auto cdf = mcs_cdf(log, table_size);
    for (std::size_t r = 0; r < cdf.size(); ++r) {
        out.mcs.push_back(row(-1, "cdf_at_" + std::to_string(r), cdf[r]));
    }
    return out;
}

void write_csv(std::ostream& out, std::span<const KpiRow> rows)
{
    out << "scheme,load,seed,cell,metric,value\n";
    for (const auto& r : rows) {
        out << r.scheme << ',' << r.load << ',' << (r.seed.empty() ? "all" : r.seed) << ','
            << (r.cell.empty() ? "all" : r.cell) << ',' << r.metric << ',' << format_value(r.value) << '\n';
    }
}

}  // namespace xrla::kpi
