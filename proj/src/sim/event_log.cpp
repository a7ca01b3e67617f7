#include "xrla/sim/event_log.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace xrla::sim {

namespace {

constexpr const char* kMagic = "# xrla-events v1";

std::string fmt_ms(double ms)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", ms);
    return buf;
}

[[noreturn]] void fail(std::size_t line, const std::string& what)
{
    throw std::runtime_error("event log line " + std::to_string(line) + ": " + what);
}

template <typename T>
T take(std::istringstream& in, std::size_t line, const char* field)
{
    T value{};
    if (!(in >> value)) {
        fail(line, std::string("bad or missing field '") + field + "'");
    }
    return value;
}

double parse_double(const std::string& text, std::size_t line, const char* field)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        fail(line, std::string("bad number for '") + field + "'");
    }
    if (used != text.size()) {
        fail(line, std::string("bad number for '") + field + "'");
    }
    return v;
}

}  // namespace

double quantize_ms(double ms)
{
    return std::round(ms * 1e6) / 1e6;
}

std::string to_string(PacketStatus status)
{
    switch (status) {
    case PacketStatus::InTime:
        return "in_time";
    case PacketStatus::Late:
        return "late";
    case PacketStatus::Dropped:
        return "dropped";
    case PacketStatus::InFlight:
        return "in_flight";
    }
    return "?";
}

PacketStatus parse_packet_status(const std::string& text)
{
    for (auto s : {PacketStatus::InTime, PacketStatus::Late, PacketStatus::Dropped, PacketStatus::InFlight}) {
        if (text == to_string(s)) {
            return s;
        }
    }
    throw std::invalid_argument("unknown packet status '" + text + "'");
}

void write_event_log(std::ostream& out, const EventLog& log)
{
    const auto& h = log.header;
    out << kMagic << '\n';
    out << "RUN scheme=" << h.scheme << " load=" << h.load << " seed=" << h.seed << " cells=" << h.cells
        << " prbs=" << h.prbs << " slot_ms=" << fmt_ms(h.slot_ms) << " pdb_ms=" << fmt_ms(h.pdb_ms)
        << " slots=" << h.slots << '\n';
    for (const auto& t : log.tx) {
        out << "TX " << t.slot << ' ' << t.cell << ' ' << t.ue << ' ' << t.harq << ' ' << t.attempt << ' ' << t.mcs
            << ' ' << t.prbs << ' ' << t.bits << ' ' << t.cbs << ' ' << t.cbgs << ' ' << t.acks << '\n';
    }
    for (const auto& p : log.prb) {
        out << "PRB " << p.slot << ' ' << p.cell << ' ' << p.used << ' ' << p.total << '\n';
    }
    for (const auto& p : log.packets) {
        out << "PKT " << p.ue << ' ' << p.cell << ' ' << p.frame << ' ' << fmt_ms(p.arrival_ms) << ' ' << p.size_bits
            << ' ' << to_string(p.status) << ' ' << (p.delivery_ms < 0.0 ? std::string("-") : fmt_ms(p.delivery_ms))
            << '\n';
    }
}

EventLog read_event_log(std::istream& in)
{
    EventLog log;
    std::string text;
    std::size_t line = 0;
    if (!std::getline(in, text) || text != kMagic) {
        fail(1, "missing '# xrla-events v1' header");
    }
    ++line;
    bool have_run = false;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty() || text[0] == '#') {
            continue;
        }
        std::istringstream ls(text);
        std::string tag;
        ls >> tag;
        if (tag == "RUN") {
            std::map<std::string, std::string> kv;
            std::string item;
            while (ls >> item) {
                const auto eq = item.find('=');
                if (eq == std::string::npos) {
                    fail(line, "RUN field without '='");
                }
                kv[item.substr(0, eq)] = item.substr(eq + 1);
            }
            for (const char* key : {"scheme", "load", "seed", "cells", "prbs", "slot_ms", "pdb_ms", "slots"}) {
                if (!kv.count(key)) {
                    fail(line, std::string("RUN lacks '") + key + "'");
                }
            }
            auto& h = log.header;
            h.scheme = kv["scheme"];
            h.load = static_cast<std::uint32_t>(std::stoul(kv["load"]));
            h.seed = std::stoull(kv["seed"]);
            h.cells = static_cast<std::uint32_t>(std::stoul(kv["cells"]));
            h.prbs = static_cast<std::uint32_t>(std::stoul(kv["prbs"]));
            h.slot_ms = parse_double(kv["slot_ms"], line, "slot_ms");
            h.pdb_ms = parse_double(kv["pdb_ms"], line, "pdb_ms");
            h.slots = std::stoull(kv["slots"]);
            have_run = true;
        } else if (tag == "TX") {
            TxRecord t;
            t.slot = take<std::uint64_t>(ls, line, "slot");
            t.cell = take<std::uint32_t>(ls, line, "cell");
            t.ue = take<std::uint32_t>(ls, line, "ue");
            t.harq = take<std::uint32_t>(ls, line, "harq");
            t.attempt = take<std::uint32_t>(ls, line, "attempt");
            t.mcs = take<std::uint32_t>(ls, line, "mcs");
            t.prbs = take<std::uint32_t>(ls, line, "prbs");
            t.bits = take<std::uint64_t>(ls, line, "bits");
            t.cbs = take<std::uint32_t>(ls, line, "cbs");
            t.cbgs = take<std::uint32_t>(ls, line, "cbgs");
            t.acks = take<std::string>(ls, line, "acks");
            if (t.acks.size() != t.cbgs || t.acks.find_first_not_of("01") != std::string::npos) {
                fail(line, "CBG ACK string does not match the CBG count");
            }
            log.tx.push_back(std::move(t));
        } else if (tag == "PRB") {
            PrbRecord p;
            p.slot = take<std::uint64_t>(ls, line, "slot");
            p.cell = take<std::uint32_t>(ls, line, "cell");
            p.used = take<std::uint32_t>(ls, line, "used");
            p.total = take<std::uint32_t>(ls, line, "total");
            if (p.used > p.total || p.total == 0) {
                fail(line, "PRB usage exceeds the PRB total");
            }
            log.prb.push_back(p);
        } else if (tag == "PKT") {
            PacketRecord p;
            p.ue = take<std::uint32_t>(ls, line, "ue");
            p.cell = take<std::uint32_t>(ls, line, "cell");
            p.frame = take<std::uint64_t>(ls, line, "frame");
            p.arrival_ms = parse_double(take<std::string>(ls, line, "arrival_ms"), line, "arrival_ms");
            p.size_bits = take<std::uint64_t>(ls, line, "size_bits");
            try {
                p.status = parse_packet_status(take<std::string>(ls, line, "status"));
            } catch (const std::invalid_argument& e) {
                fail(line, e.what());
            }
            const auto delivery = take<std::string>(ls, line, "delivery_ms");
            p.delivery_ms = delivery == "-" ? -1.0 : parse_double(delivery, line, "delivery_ms");
            log.packets.push_back(p);
        } else {
            fail(line, "unknown record '" + tag + "'");
        }
        std::string extra;
        if (ls >> extra) {
            fail(line, "trailing field '" + extra + "'");
        }
    }
    if (!have_run) {
        fail(line, "no RUN record");
    }
    return log;
}

}  // namespace xrla::sim
