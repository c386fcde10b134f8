#include "botwin/flow.hpp"

#include "botwin/error.hpp"
#include "botwin/text.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace botwin {

std::string_view to_string(Protocol p) {
    switch (p) {
    case Protocol::TCP: return "tcp";
    case Protocol::UDP: return "udp";
    case Protocol::ICMP: return "icmp";
    case Protocol::Other: return "other";
    }
    return "other";
}

std::string_view to_string(Tag t) {
    switch (t) {
    case Tag::Normal: return "Normal";
    case Tag::Background: return "Background";
    case Tag::Botnet: return "Botnet";
    case Tag::CandC: return "CandC";
    }
    return "Background";
}

namespace {

bool is_cc_token(std::string_view tok) {
    if (tok.size() < 2 || text::to_lower(tok.substr(0, 2)) != "cc") return false;
    return std::all_of(tok.begin() + 2, tok.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

Tag classify_label(std::string_view raw_label) {
    const std::string lower = text::to_lower(raw_label);
    if (lower.find("botnet") != std::string::npos) {
        std::size_t begin = 0;
        while (begin <= raw_label.size()) {
            std::size_t end = raw_label.find_first_of("-=_ ", begin);
            if (end == std::string_view::npos) end = raw_label.size();
            if (is_cc_token(raw_label.substr(begin, end - begin))) return Tag::CandC;
            begin = end + 1;
        }
        return Tag::Botnet;
    }
    if (lower.find("normal") != std::string::npos) return Tag::Normal;
    return Tag::Background;
}

Protocol parse_protocol(std::string_view s) {
    const std::string lower = text::to_lower(text::trim(s));
    if (lower == "tcp") return Protocol::TCP;
    if (lower == "udp") return Protocol::UDP;
    if (lower == "icmp") return Protocol::ICMP;
    return Protocol::Other;
}

std::optional<int> parse_port(std::string_view s) {
    s = text::trim(s);
    if (s.empty()) return std::nullopt;
    std::optional<long long> v;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X'))
        v = text::parse_int(s.substr(2), 16);
    else
        v = text::parse_int(s, 10);
    if (!v || *v < 0 || *v > 65535) return std::nullopt;
    return static_cast<int>(*v);
}

std::string format_timestamp(std::int64_t epoch_us) {
    using namespace std::chrono;
    const std::int64_t day_us = 86'400'000'000LL;
    std::int64_t days = epoch_us / day_us;
    std::int64_t rem = epoch_us % day_us;
    if (rem < 0) {
        rem += day_us;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    const std::int64_t secs = rem / 1'000'000;
    const std::int64_t micros = rem % 1'000'000;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d/%02u/%02u %02lld:%02lld:%02lld.%06lld", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                  static_cast<long long>(secs % 60), static_cast<long long>(micros));
    return buf;
}

std::optional<std::int64_t> parse_timestamp(std::string_view s) {
    using namespace std::chrono;
    s = text::trim(s);
    // YYYY/MM/DD HH:MM:SS[.ffffff]
    if (s.size() < 19 || s[4] != '/' || s[7] != '/' || s[10] != ' ' || s[13] != ':' || s[16] != ':')
        return std::nullopt;
    const auto y = text::parse_int(s.substr(0, 4));
    const auto mo = text::parse_int(s.substr(5, 2));
    const auto d = text::parse_int(s.substr(8, 2));
    const auto h = text::parse_int(s.substr(11, 2));
    const auto mi = text::parse_int(s.substr(14, 2));
    const auto se = text::parse_int(s.substr(17, 2));
    if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
    if (*h > 23 || *mi > 59 || *se > 60) return std::nullopt;
    const year_month_day ymd{year{static_cast<int>(*y)}, month{static_cast<unsigned>(*mo)},
                             day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;

    std::int64_t micros = 0;
    if (s.size() > 19) {
        if (s[19] != '.') return std::nullopt;
        std::string_view frac = s.substr(20);
        if (frac.empty() || frac.size() > 9) return std::nullopt;
        if (!std::all_of(frac.begin(), frac.end(), [](char c) { return c >= '0' && c <= '9'; }))
            return std::nullopt;
        // Digits beyond microsecond resolution are truncated.
        std::string digits(frac.substr(0, std::min<std::size_t>(6, frac.size())));
        digits.resize(6, '0');
        micros = *text::parse_int(digits);
    }
    const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
    return ((days * 86400 + *h * 3600 + *mi * 60 + *se) * 1'000'000) + micros;
}

namespace {

enum Column { kStart, kDur, kProto, kSrcAddr, kSport, kDir, kDstAddr, kDport, kState, kSTos, kDTos,
              kTotPkts, kTotBytes, kSrcBytes, kLabel, kColumnCount };

constexpr std::array<std::string_view, kColumnCount> kColumnNames = {
    "starttime", "dur", "proto", "srcaddr", "sport", "dir", "dstaddr", "dport",
    "state", "stos", "dtos", "totpkts", "totbytes", "srcbytes", "label"};

struct Layout {
    std::array<int, kColumnCount> pos{};
    std::size_t width = 0;
};

Layout read_header(std::string_view line) {
    const auto cols = text::split(text::trim(line), ',');
    if (cols.empty() || text::to_lower(text::trim(cols[0])).rfind("starttime", 0) != 0)
        throw FormatError("binetflow: header must begin with a StartTime column");
    Layout layout;
    layout.pos.fill(-1);
    layout.width = cols.size();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const std::string name = text::to_lower(text::trim(cols[i]));
        for (std::size_t c = 0; c < kColumnCount; ++c)
            if (name == kColumnNames[c] && layout.pos[c] < 0) layout.pos[c] = static_cast<int>(i);
    }
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        if (c == kSTos || c == kDTos) continue;
        if (layout.pos[c] < 0)
            throw FormatError("binetflow: header is missing column '" + std::string(kColumnNames[c]) + "'");
    }
    return layout;
}

std::optional<std::int64_t> parse_count(std::string_view s) {
    const auto v = text::parse_int(text::trim(s));
    if (!v || *v < 0) return std::nullopt;
    return *v;
}

std::optional<int> parse_optional_int(std::string_view s) {
    s = text::trim(s);
    if (s.empty()) return std::nullopt;
    const auto v = text::parse_int(s);
    if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) return std::nullopt;
    return static_cast<int>(*v);
}

struct RawRecord {
    std::int64_t start_us;
    FlowRecord rec;
};

std::optional<RawRecord> parse_line(std::string_view line, const Layout& layout, int scenario_id) {
    auto fields = text::split(line, ',');
    if (fields.size() < layout.width) return std::nullopt;
    // Labels occasionally carry commas; everything past the last fixed column belongs to them.
    if (fields.size() > layout.width) {
        if (layout.pos[kLabel] != static_cast<int>(layout.width) - 1) return std::nullopt;
        std::string_view first = fields[layout.width - 1];
        const std::size_t offset = static_cast<std::size_t>(first.data() - line.data());
        fields[layout.width - 1] = line.substr(offset);
        fields.resize(layout.width);
    }
    auto field = [&](Column c) { return fields[static_cast<std::size_t>(layout.pos[c])]; };

    RawRecord out{};
    const auto start = parse_timestamp(field(kStart));
    if (!start) return std::nullopt;
    out.start_us = *start;

    FlowRecord& r = out.rec;
    const auto dur = text::parse_double(text::trim(field(kDur)));
    if (!dur || !std::isfinite(*dur) || *dur < 0.0) return std::nullopt;
    r.duration = *dur;
    r.proto_raw = std::string(text::trim(field(kProto)));
    r.proto = parse_protocol(r.proto_raw);
    r.src_addr = std::string(text::trim(field(kSrcAddr)));
    r.src_port = parse_port(field(kSport));
    r.direction = std::string(text::trim(field(kDir)));
    r.dst_addr = std::string(text::trim(field(kDstAddr)));
    r.dst_port = parse_port(field(kDport));
    r.state = std::string(text::trim(field(kState)));
    if (layout.pos[kSTos] >= 0) r.stos = parse_optional_int(field(kSTos));
    if (layout.pos[kDTos] >= 0) r.dtos = parse_optional_int(field(kDTos));

    const auto pkts = parse_count(field(kTotPkts));
    const auto bytes = parse_count(field(kTotBytes));
    const auto sbytes = parse_count(field(kSrcBytes));
    if (!pkts || !bytes || !sbytes) return std::nullopt;
    if (*sbytes > *bytes) return std::nullopt;
    if (*bytes > 0 && *pkts < 1) return std::nullopt;
    r.tot_pkts = *pkts;
    r.tot_bytes = *bytes;
    r.src_bytes = *sbytes;

    r.label = std::string(text::trim(field(kLabel)));
    r.tag = classify_label(r.label);
    r.scenario_id = scenario_id;
    return out;
}

}  // namespace

ParsedFlows parse_binetflow(std::istream& in, int scenario_id) {
    if (!in) throw IngestError("binetflow: input stream is not readable");
    std::string line;
    if (!std::getline(in, line)) {
        if (in.bad()) throw IngestError("binetflow: failed reading header");
        throw FormatError("binetflow: missing header line");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const Layout layout = read_header(line);

    ParsedFlows result;
    std::vector<RawRecord> raw;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        ++result.stats.total;
        if (auto rec = parse_line(line, layout, scenario_id)) {
            raw.push_back(std::move(*rec));
        } else {
            ++result.stats.skipped;
        }
    }
    if (in.bad()) throw IngestError("binetflow: read error");
    result.stats.kept = raw.size();
    if (result.stats.skipped * 2 > result.stats.total)
        throw CorruptInputError("binetflow: " + std::to_string(result.stats.skipped) + " of " +
                                std::to_string(result.stats.total) + " lines are malformed");

    if (!raw.empty()) {
        const auto earliest = std::min_element(raw.begin(), raw.end(), [](const RawRecord& a, const RawRecord& b) {
            return a.start_us < b.start_us;
        });
        result.stats.epoch_us = earliest->start_us;
    }
    result.flows.reserve(raw.size());
    for (auto& r : raw) {
        r.rec.start_time = static_cast<double>(r.start_us - result.stats.epoch_us) / 1e6;
        result.flows.push_back(std::move(r.rec));
    }
    return result;
}

ParsedFlows parse_binetflow_file(const std::string& path, int scenario_id) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");
    return parse_binetflow(in, scenario_id);
}

namespace {

std::string port_field(const std::optional<int>& p) { return p ? std::to_string(*p) : std::string(); }

std::string opt_field(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

}  // namespace

std::string to_binetflow_line(const FlowRecord& r, std::int64_t epoch_us) {
    const std::int64_t start_us = epoch_us + std::llround(r.start_time * 1e6);
    std::ostringstream os;
    os << format_timestamp(start_us) << ',' << text::format_double(r.duration) << ','
       << (r.proto_raw.empty() ? std::string(to_string(r.proto)) : r.proto_raw) << ',' << r.src_addr << ','
       << port_field(r.src_port) << ',' << r.direction << ',' << r.dst_addr << ',' << port_field(r.dst_port)
       << ',' << r.state << ',' << opt_field(r.stos) << ',' << opt_field(r.dtos) << ',' << r.tot_pkts << ','
       << r.tot_bytes << ',' << r.src_bytes << ',' << r.label;
    return os.str();
}

void write_binetflow(std::ostream& out, const std::vector<FlowRecord>& flows, std::int64_t epoch_us) {
    out << kBinetflowHeader << '\n';
    for (const auto& r : flows) out << to_binetflow_line(r, epoch_us) << '\n';
}

void write_normalized_csv(std::ostream& out, const std::vector<FlowRecord>& flows) {
    out << "start_time,duration,proto,src_addr,src_port,dir,dst_addr,dst_port,state,stos,tot_pkts,tot_bytes,"
           "src_bytes,tag,scenario_id\n";
    for (const auto& r : flows) {
        out << text::format_double(r.start_time) << ',' << text::format_double(r.duration) << ','
            << to_string(r.proto) << ',' << r.src_addr << ',' << port_field(r.src_port) << ',' << r.direction
            << ',' << r.dst_addr << ',' << port_field(r.dst_port) << ',' << r.state << ',' << opt_field(r.stos)
            << ',' << r.tot_pkts << ',' << r.tot_bytes << ',' << r.src_bytes << ',' << to_string(r.tag) << ','
            << r.scenario_id << '\n';
    }
}

}  // namespace botwin
