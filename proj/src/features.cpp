#include "botwin/features.hpp"

#include "botwin/parallel.hpp"
#include "botwin/text.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <tuple>

namespace botwin {

namespace {

using enum FeatureCategory;
using enum FeatureGroup;

constexpr std::array<FeatureDescriptor, kFeatureCount> kSchema = {{
    {1, "N_conn", Extracted, Connection},
    {2, "N_normal_flow", Extracted, Connection},
    {3, "N_back_flow", Extracted, Connection},
    {4, "W_duration", Extracted, Connection},
    {5, "N_s_a_p_address", Extracted, IpAddress},
    {6, "N_s_b_p_add", Extracted, IpAddress},
    {7, "N_s_c_p_add", Extracted, IpAddress},
    {8, "N_s_na_p_add", Extracted, IpAddress},
    {9, "N_d_a_p_add", Extracted, IpAddress},
    {10, "N_d_b_p_add", Extracted, IpAddress},
    {11, "N_d_c_p_add", Extracted, IpAddress},
    {12, "N_d_na_p_add", Extracted, IpAddress},
    {13, "N_sports>1024", Extracted, Port},
    {14, "N_sports<1024", Extracted, Port},
    {15, "N_dports>1024", Extracted, Port},
    {16, "N_dports<1024", Extracted, Port},
    {17, "N_icmp", Extracted, Protocol},
    {18, "N_tcp", Extracted, Protocol},
    {19, "N_udp", Extracted, Protocol},
    {20, "S_packets", Analyzed, Connection},
    {21, "S_srcbytes", Analyzed, Connection},
    {22, "S_bytes", Analyzed, Connection},
    {23, "S_state", Analyzed, Connection},
    {24, "S_time", Analyzed, Connection},
    {25, "sigma_time", Analyzed, Connection},
    {26, "sigma_packets", Analyzed, Connection},
    {27, "sigma_bytes", Analyzed, Connection},
    {28, "sigma_srcbytes", Analyzed, Connection},
    {29, "S_srcip", Analyzed, IpAddress},
    {30, "S_dstip", Analyzed, IpAddress},
    {31, "S_src_a_ip", Analyzed, IpAddress},
    {32, "S_src_b_ip", Analyzed, IpAddress},
    {33, "S_src_c_ip", Analyzed, IpAddress},
    {34, "S_src_na_ip", Analyzed, IpAddress},
    {35, "S_dst_a_ip", Analyzed, IpAddress},
    {36, "S_dst_b_ip", Analyzed, IpAddress},
    {37, "S_dst_c_ip", Analyzed, IpAddress},
    {38, "S_dst_ns_ip", Analyzed, IpAddress},
    {39, "S_src_to_dst", Analyzed, IpAddress},
    {40, "S_srcport", Analyzed, Port},
    {41, "S_dstport", Analyzed, Port},
    {42, "S_sports>1024", Analyzed, Port},
    {43, "S_sports<1024", Analyzed, Port},
    {44, "S_dports>1024", Analyzed, Port},
    {45, "S_dports<1024", Analyzed, Port},
}};

constexpr int kWellKnownPortLimit = 1024;

}  // namespace

const std::array<FeatureDescriptor, kFeatureCount>& feature_schema() { return kSchema; }

std::string_view feature_name(int id) {
    if (id < 1 || id > kFeatureCount) throw ContractError("feature id out of range");
    return kSchema[static_cast<std::size_t>(id - 1)].name;
}

IpClass ip_class(std::string_view addr) {
    const auto parts = text::split(text::trim(addr), '.');
    if (parts.size() != 4) return IpClass::NA;
    long long first = -1;
    for (std::size_t i = 0; i < 4; ++i) {
        if (parts[i].empty() || parts[i].size() > 3) return IpClass::NA;
        const auto v = text::parse_int(parts[i]);
        if (!v || *v < 0 || *v > 255 || parts[i].front() == '+') return IpClass::NA;
        if (i == 0) first = *v;
    }
    if (first >= 1 && first <= 126) return IpClass::A;
    if (first >= 128 && first <= 191) return IpClass::B;
    if (first >= 192 && first <= 223) return IpClass::C;
    return IpClass::NA;
}

namespace {

double sorted_mean(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double d : v) sum += d;
    return sum / static_cast<double>(v.size());
}

double sorted_stddev(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return population_stddev(std::span<const double>(v));
}

}  // namespace

FeatureVector extract_features(const WindowAggregate& window) {
    if (window.flows.empty()) throw ContractError("extract_features: window has no member flows");

    FeatureVector fv;
    fv.scenario_id = window.scenario_id;
    fv.window_index = window.index;
    fv.y = window.label;
    auto& x = fv.x;
    auto set = [&x](int id, double v) { x(id - 1) = v; };

    const std::size_t n = window.flows.size();
    std::vector<double> durations, pkts, bytes, src_bytes;
    std::vector<std::string> states, src_addrs, dst_addrs;
    std::array<std::vector<std::string>, 4> src_by_class, dst_by_class;
    std::vector<std::tuple<std::string, std::string, double, std::int64_t>> pairs;
    std::vector<int> sports, dports, sports_high, sports_low, dports_high, dports_low;
    durations.reserve(n);
    pkts.reserve(n);
    bytes.reserve(n);
    src_bytes.reserve(n);

    double normal = 0, background = 0, icmp = 0, tcp = 0, udp = 0;
    std::array<double, 4> src_class_count{}, dst_class_count{};

    for (const FlowRecord* f : window.flows) {
        if (f->tag == Tag::Normal) ++normal;
        if (f->tag == Tag::Background) ++background;
        switch (f->proto) {
        case Protocol::ICMP: ++icmp; break;
        case Protocol::TCP: ++tcp; break;
        case Protocol::UDP: ++udp; break;
        case Protocol::Other: break;
        }
        durations.push_back(f->duration);
        pkts.push_back(static_cast<double>(f->tot_pkts));
        bytes.push_back(static_cast<double>(f->tot_bytes));
        src_bytes.push_back(static_cast<double>(f->src_bytes));
        states.push_back(f->state);
        src_addrs.push_back(f->src_addr);
        dst_addrs.push_back(f->dst_addr);

        const auto sc = static_cast<std::size_t>(ip_class(f->src_addr));
        const auto dc = static_cast<std::size_t>(ip_class(f->dst_addr));
        ++src_class_count[sc];
        ++dst_class_count[dc];
        src_by_class[sc].push_back(f->src_addr);
        dst_by_class[dc].push_back(f->dst_addr);
        pairs.emplace_back(f->src_addr, f->dst_addr, f->duration, f->tot_bytes);

        if (f->src_port) {
            sports.push_back(*f->src_port);
            (*f->src_port >= kWellKnownPortLimit ? sports_high : sports_low).push_back(*f->src_port);
        }
        if (f->dst_port) {
            dports.push_back(*f->dst_port);
            (*f->dst_port >= kWellKnownPortLimit ? dports_high : dports_low).push_back(*f->dst_port);
        }
    }

    set(1, static_cast<double>(n));
    set(2, normal);
    set(3, background);
    set(4, sorted_mean(durations));
    for (int c = 0; c < 4; ++c) {
        set(5 + c, src_class_count[static_cast<std::size_t>(c)]);
        set(9 + c, dst_class_count[static_cast<std::size_t>(c)]);
    }
    set(13, static_cast<double>(sports_high.size()));
    set(14, static_cast<double>(sports_low.size()));
    set(15, static_cast<double>(dports_high.size()));
    set(16, static_cast<double>(dports_low.size()));
    set(17, icmp);
    set(18, tcp);
    set(19, udp);

    set(20, value_entropy(pkts));
    set(21, value_entropy(src_bytes));
    set(22, value_entropy(bytes));
    set(23, value_entropy(states));
    set(24, value_entropy(durations));
    set(25, sorted_stddev(durations));
    set(26, sorted_stddev(pkts));
    set(27, sorted_stddev(bytes));
    set(28, sorted_stddev(src_bytes));

    set(29, value_entropy(src_addrs));
    set(30, value_entropy(dst_addrs));
    for (int c = 0; c < 4; ++c) {
        set(31 + c, value_entropy(src_by_class[static_cast<std::size_t>(c)]));
        set(35 + c, value_entropy(dst_by_class[static_cast<std::size_t>(c)]));
    }
    set(39, value_entropy(pairs));

    set(40, value_entropy(sports));
    set(41, value_entropy(dports));
    set(42, value_entropy(sports_high));
    set(43, value_entropy(sports_low));
    set(44, value_entropy(dports_high));
    set(45, value_entropy(dports_low));
    return fv;
}

std::vector<FeatureVector> extract_all(std::span<const WindowAggregate> windows, unsigned jobs) {
    std::vector<FeatureVector> out(windows.size());
    parallel_for(windows.size(), jobs, [&](std::size_t i) { out[i] = extract_features(windows[i]); });
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    out.window_index.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = static_cast<Eigen::Index>(rows[r]);
        if (src < 0 || src >= X.rows()) throw ContractError("Dataset::subset: row out of range");
        out.X.row(static_cast<Eigen::Index>(r)) = X.row(src);
        out.y(static_cast<Eigen::Index>(r)) = y(src);
        out.window_index.push_back(window_index.empty() ? src : window_index[rows[r]]);
    }
    return out;
}

Dataset Dataset::from_vectors(std::span<const FeatureVector> vectors) {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(vectors.size()), kFeatureCount);
    out.y.resize(static_cast<Eigen::Index>(vectors.size()));
    out.window_index.reserve(vectors.size());
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        out.X.row(static_cast<Eigen::Index>(r)) = vectors[r].x.transpose();
        out.y(static_cast<Eigen::Index>(r)) = vectors[r].y;
        out.window_index.push_back(vectors[r].window_index);
    }
    return out;
}

namespace {

void write_header(std::ostream& out) {
    out << "window_index";
    for (const auto& d : kSchema) out << ',' << d.name;
    out << ",label\n";
}

template <class Row>
void write_row(std::ostream& out, std::int64_t index, const Row& x, int y) {
    out << index;
    for (Eigen::Index c = 0; c < kFeatureCount; ++c) out << ',' << text::format_double17(x(c));
    out << ',' << y << '\n';
}

}  // namespace

void write_feature_csv(std::ostream& out, std::span<const FeatureVector> vectors) {
    write_header(out);
    for (const auto& v : vectors) write_row(out, v.window_index, v.x, v.y);
}

void write_feature_csv(std::ostream& out, const Dataset& data) {
    write_header(out);
    for (Eigen::Index r = 0; r < data.rows(); ++r)
        write_row(out, data.window_index.empty() ? r : data.window_index[static_cast<std::size_t>(r)],
                  data.X.row(r), data.y(r));
}

Dataset read_feature_csv(std::istream& in) {
    if (!in) throw IngestError("feature CSV: stream is not readable");
    std::string line;
    if (!std::getline(in, line)) throw FormatError("feature CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = text::split(line, ',');
    if (header.size() != kFeatureCount + 2 || text::trim(header.front()) != "window_index" ||
        text::trim(header.back()) != "label")
        throw FormatError("feature CSV: expected header window_index,<45 features>,label");
    for (int c = 0; c < kFeatureCount; ++c)
        if (text::trim(header[static_cast<std::size_t>(c + 1)]) != kSchema[static_cast<std::size_t>(c)].name)
            throw FormatError("feature CSV: column " + std::to_string(c + 2) + " should be '" +
                              std::string(kSchema[static_cast<std::size_t>(c)].name) + "'");

    std::vector<FeatureVector> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(line, ',');
        auto fail = [&](const std::string& what) {
            throw FormatError("feature CSV line " + std::to_string(line_no) + ": " + what);
        };
        if (fields.size() != kFeatureCount + 2) fail("wrong number of columns");
        FeatureVector fv;
        const auto idx = text::parse_int(text::trim(fields.front()));
        if (!idx) fail("bad window_index");
        fv.window_index = *idx;
        for (int c = 0; c < kFeatureCount; ++c) {
            const auto v = text::parse_double(text::trim(fields[static_cast<std::size_t>(c + 1)]));
            if (!v || !std::isfinite(*v)) fail("bad value in column " + std::to_string(c + 2));
            fv.x(c) = *v;
        }
        const auto y = text::parse_int(text::trim(fields.back()));
        if (!y || (*y != 0 && *y != 1)) fail("label must be 0 or 1");
        fv.y = static_cast<int>(*y);
        rows.push_back(fv);
    }
    if (in.bad()) throw IngestError("feature CSV: read error");
    return Dataset::from_vectors(rows);
}

Dataset read_feature_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");
    return read_feature_csv(in);
}

}  // namespace botwin
