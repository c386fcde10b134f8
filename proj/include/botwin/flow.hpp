#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace botwin {

enum class Protocol { TCP, UDP, ICMP, Other };

/// Four-way label taxonomy of the CTU-13 captures.
enum class Tag { Normal, Background, Botnet, CandC };

inline bool is_attack(Tag t) { return t == Tag::Botnet || t == Tag::CandC; }

std::string_view to_string(Protocol p);
std::string_view to_string(Tag t);

/// One bidirectional netflow record. Times are seconds relative to the
/// earliest start time of the file it was parsed from.
struct FlowRecord {
    double start_time = 0.0;
    double duration = 0.0;
    Protocol proto = Protocol::Other;
    std::string proto_raw;  // original spelling, kept for round-tripping
    std::string src_addr;
    std::optional<int> src_port;
    std::string direction;
    std::string dst_addr;
    std::optional<int> dst_port;
    std::string state;
    std::optional<int> stos;
    std::optional<int> dtos;
    std::int64_t tot_pkts = 0;
    std::int64_t tot_bytes = 0;
    std::int64_t src_bytes = 0;
    std::string label;  // raw label text
    Tag tag = Tag::Background;
    int scenario_id = 1;

    double end_time() const { return start_time + duration; }

    bool operator==(const FlowRecord&) const = default;
};

struct ParseStats {
    std::size_t total = 0;
    std::size_t kept = 0;
    std::size_t skipped = 0;
    /// Absolute start time of the earliest record, microseconds since 1970-01-01
    /// (timestamps are read as naive time; no timezone is applied).
    std::int64_t epoch_us = 0;
};

struct ParsedFlows {
    std::vector<FlowRecord> flows;
    ParseStats stats;
};

/// Maps a free-text CTU-13 label to a tag: a botnet label carrying a "CC"
/// token is CandC, otherwise "Botnet" wins, then "Normal", else Background.
Tag classify_label(std::string_view raw_label);

Protocol parse_protocol(std::string_view s);

/// Port fields are decimal, hex with a 0x prefix, or empty.
std::optional<int> parse_port(std::string_view s);

/// Reads a binetflow CSV stream. Malformed lines are counted and skipped;
/// throws FormatError on a bad header, CorruptInputError when more than half
/// of the data lines are malformed, IngestError when the stream fails.
ParsedFlows parse_binetflow(std::istream& in, int scenario_id = 1);
ParsedFlows parse_binetflow_file(const std::string& path, int scenario_id = 1);

inline constexpr std::string_view kBinetflowHeader =
    "StartTime,Dur,Proto,SrcAddr,Sport,Dir,DstAddr,Dport,State,sTos,dTos,TotPkts,TotBytes,SrcBytes,Label";

/// Formats microseconds since 1970 as `YYYY/MM/DD HH:MM:SS.ffffff`.
std::string format_timestamp(std::int64_t epoch_us);
/// Inverse of format_timestamp; nullopt when the text is not a timestamp.
std::optional<std::int64_t> parse_timestamp(std::string_view s);

/// Writes one record as a binetflow line; `epoch_us` restores absolute time.
std::string to_binetflow_line(const FlowRecord& r, std::int64_t epoch_us);
void write_binetflow(std::ostream& out, const std::vector<FlowRecord>& flows, std::int64_t epoch_us);

/// Debug dump: start_time,duration,proto,src_addr,src_port,dir,dst_addr,
/// dst_port,state,stos,tot_pkts,tot_bytes,src_bytes,tag,scenario_id with
/// start_time in relative seconds.
void write_normalized_csv(std::ostream& out, const std::vector<FlowRecord>& flows);

}  // namespace botwin
