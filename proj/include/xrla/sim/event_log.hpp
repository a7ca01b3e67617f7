#pragma once

// Line-delimited event log of one simulation run.
//
//   # xrla-events v1
//   RUN scheme=<s> load=<n> seed=<n> cells=<n> prbs=<n> slot_ms=<x> pdb_ms=<x> slots=<n>
//   TX  <slot> <cell> <ue> <harq> <attempt> <mcs> <prbs> <bits> <cbs> <cbgs> <cbg-acks>
//   PRB <slot> <cell> <used> <total>
//   PKT <ue> <cell> <frame> <arrival_ms> <size_bits> <status> <delivery_ms|->
//
// <cbg-acks> holds one character per CBG after the attempt ('1' ACK, '0'
// NACK). <status> is in_time, late, dropped or in_flight. PRB records cover
// every downlink-capable slot of every cell. Times carry six decimals.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace xrla::sim {

struct RunHeader {
    std::string scheme;
    std::uint32_t load = 0;
    std::uint64_t seed = 0;
    std::uint32_t cells = 0;
    std::uint32_t prbs = 0;
    double slot_ms = 0.5;
    double pdb_ms = 10.0;
    std::uint64_t slots = 0;
};

struct TxRecord {
    std::uint64_t slot = 0;
    std::uint32_t cell = 0;
    std::uint32_t ue = 0;
    std::uint32_t harq = 0;
    std::uint32_t attempt = 1;
    std::uint32_t mcs = 0;
    std::uint32_t prbs = 0;
    std::uint64_t bits = 0;
    std::uint32_t cbs = 0;
    std::uint32_t cbgs = 0;
    std::string acks;
};

struct PrbRecord {
    std::uint64_t slot = 0;
    std::uint32_t cell = 0;
    std::uint32_t used = 0;
    std::uint32_t total = 0;
};

enum class PacketStatus { InTime, Late, Dropped, InFlight };

struct PacketRecord {
    std::uint32_t ue = 0;
    std::uint32_t cell = 0;
    std::uint64_t frame = 0;
    double arrival_ms = 0.0;
    std::uint64_t size_bits = 0;
    PacketStatus status = PacketStatus::InFlight;
    double delivery_ms = -1.0;  ///< negative when never delivered
};

struct EventLog {
    RunHeader header;
    std::vector<TxRecord> tx;
    std::vector<PrbRecord> prb;
    std::vector<PacketRecord> packets;
};

/// Rounds a time to the log's six-decimal resolution so values survive a
/// write/read round trip unchanged.
double quantize_ms(double ms);

std::string to_string(PacketStatus status);
PacketStatus parse_packet_status(const std::string& text);

void write_event_log(std::ostream& out, const EventLog& log);

/// Throws std::runtime_error naming the offending line.
EventLog read_event_log(std::istream& in);

}  // namespace xrla::sim
