#include "botwin/harness.hpp"

#include "botwin/parallel.hpp"
#include "botwin/random.hpp"
#include "botwin/text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

namespace botwin {

// ---------------------------------------------------------------- scenarios

ScenarioGroup scenario_group(std::string_view name) {
    const std::string lower = text::to_lower(text::trim(name));
    if (lower == "ddos") return {"DDoS", {4, 7, 8}};
    if (lower == "spam") return {"SPAM", {1, 2, 5, 6, 9}};
    if (lower == "irc") return {"IRC", {1, 2, 3, 4, 6, 7, 8}};
    if (lower == "all") return {"ALL", {1, 2, 3, 4, 5, 6, 7, 8, 9}};
    throw ConfigError("unknown scenario group '" + std::string(name) + "' (expected DDoS|SPAM|IRC|ALL)");
}

bool is_registered_scenario(int id) { return id >= 1 && id <= 9; }

std::vector<FlowRecord> merge_scenarios(const std::map<int, std::vector<FlowRecord>>& per_scenario,
                                        const ScenarioGroup& group) {
    std::vector<FlowRecord> merged;
    for (int id : group.scenario_ids) {
        const auto it = per_scenario.find(id);
        if (it == per_scenario.end())
            throw ConfigError("group " + group.name + " needs scenario " + std::to_string(id) + ", which was not supplied");
        for (FlowRecord r : it->second) {
            r.scenario_id = id;
            merged.push_back(std::move(r));
        }
    }
    return merged;
}

std::map<int, std::string> read_manifest(std::istream& in, const std::string& base_dir) {
    std::map<int, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string_view rest = text::trim(line);
        if (rest.empty()) continue;
        const std::size_t sep = rest.find_first_of(" \t=:");
        if (sep == std::string_view::npos) throw ConfigError("manifest line " + std::to_string(line_no) + ": expected '<id> <path>'");
        const auto id = text::parse_int(rest.substr(0, sep));
        std::string_view path = text::trim(rest.substr(sep + 1));
        if (!path.empty() && (path.front() == '=' || path.front() == ':')) path = text::trim(path.substr(1));
        if (!id || path.empty()) throw ConfigError("manifest line " + std::to_string(line_no) + ": expected '<id> <path>'");
        std::filesystem::path p{std::string(path)};
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        if (!out.emplace(static_cast<int>(*id), p.string()).second)
            throw ConfigError("manifest: scenario " + std::to_string(*id) + " listed twice");
    }
    return out;
}

// ---------------------------------------------------------------- models

ModelKind parse_model_kind(std::string_view s) {
    const std::string lower = text::to_lower(text::trim(s));
    if (lower == "forest" || lower == "rf") return ModelKind::Forest;
    if (lower == "mlp") return ModelKind::Mlp;
    throw ConfigError("unknown model '" + std::string(s) + "' (expected forest|mlp)");
}

std::string_view to_string(ModelKind m) { return m == ModelKind::Forest ? "forest" : "mlp"; }

std::vector<double> train_and_score(ModelKind kind, const Dataset& train, const Dataset& test,
                                    const ForestConfig& forest, const MlpConfig& mlp, std::uint64_t seed) {
    if (kind == ModelKind::Forest) {
        ForestConfig cfg = forest;
        cfg.seed = seed;
        return train_forest(train, cfg).predict_proba(test);
    }
    MlpConfig cfg = mlp;
    cfg.seed = seed;
    cfg.batch_size = std::min<int>(cfg.batch_size, static_cast<int>(train.size()));
    return predict_proba(train_mlp(train, cfg).model, test);
}

// ---------------------------------------------------------------- sweep config

namespace {

template <class T, class Parse>
std::vector<T> parse_list(std::string_view s, Parse parse) {
    std::vector<T> out;
    for (auto item : text::split(s, ',')) {
        item = text::trim(item);
        if (!item.empty()) out.push_back(parse(item));
    }
    return out;
}

double parse_positive(std::string_view s, const char* what) {
    const auto v = text::parse_double(text::trim(s));
    if (!v || !(*v > 0.0) || !std::isfinite(*v)) throw ConfigError(std::string(what) + ": expected a positive number, got '" + std::string(s) + "'");
    return *v;
}

long long parse_integer(std::string_view s, const char* what) {
    const auto v = text::parse_int(text::trim(s));
    if (!v) throw ConfigError(std::string(what) + ": expected an integer, got '" + std::string(s) + "'");
    return *v;
}

std::string join_sizes(const std::vector<double>& v) {
    std::string out;
    for (double d : v) out += (out.empty() ? "" : ",") + text::format_double(d);
    return out;
}

}  // namespace

SweepConfig read_sweep_config(std::istream& in) {
    SweepConfig c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string_view body = text::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = text::to_lower(text::trim(body.substr(0, eq)));
        const std::string_view value = text::trim(body.substr(eq + 1));

        if (key == "group") {
            c.group = scenario_group(value).name;
        } else if (key == "sizes" || key == "window_sizes") {
            c.window_sizes = parse_list<double>(value, [](std::string_view s) { return parse_positive(s, "sizes"); });
        } else if (key == "models") {
            c.models = parse_list<ModelKind>(value, parse_model_kind);
        } else if (key == "seed") {
            c.seed = static_cast<std::uint64_t>(parse_integer(value, "seed"));
        } else if (key == "background") {
            c.background = parse_background_mode(value);
        } else if (key == "threshold") {
            const auto v = text::parse_double(value);
            if (!v || *v < 0.0 || *v > 1.0) throw ConfigError("threshold must be in [0, 1]");
            c.threshold = *v;
        } else if (key == "repetitions") {
            c.repetitions = static_cast<int>(parse_integer(value, "repetitions"));
        } else if (key == "estimators") {
            c.forest.n_estimators = static_cast<int>(parse_integer(value, "estimators"));
        } else if (key == "max_features") {
            c.forest.max_features = static_cast<int>(parse_integer(value, "max_features"));
        } else if (key == "max_depth") {
            if (text::to_lower(value) == "none") c.forest.max_depth.reset();
            else c.forest.max_depth = static_cast<int>(parse_integer(value, "max_depth"));
        } else if (key == "min_samples_split") {
            c.forest.min_samples_split = static_cast<int>(parse_integer(value, "min_samples_split"));
        } else if (key == "hidden") {
            c.mlp.hidden_sizes = parse_list<int>(value, [](std::string_view s) { return static_cast<int>(parse_integer(s, "hidden")); });
        } else if (key == "activation") {
            c.mlp.activation = parse_activation(value);
        } else if (key == "epochs") {
            c.mlp.epochs = static_cast<int>(parse_integer(value, "epochs"));
        } else if (key == "batch_size") {
            c.mlp.batch_size = static_cast<int>(parse_integer(value, "batch_size"));
        } else if (key == "learning_rate") {
            c.mlp.learning_rate = parse_positive(value, "learning_rate");
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (c.window_sizes.empty()) throw ConfigError("config: no window sizes");
    if (c.models.empty()) throw ConfigError("config: no models");
    if (c.repetitions < 1) throw ConfigError("config: repetitions must be >= 1");
    c.forest.validate();
    c.mlp.validate();
    return c;
}

void write_sweep_config(std::ostream& out, const SweepConfig& c) {
    std::string models;
    for (ModelKind m : c.models) models += (models.empty() ? "" : ",") + std::string(to_string(m));
    std::string hidden;
    for (int h : c.mlp.hidden_sizes) hidden += (hidden.empty() ? "" : ",") + std::to_string(h);
    out << "group = " << c.group << '\n'
        << "sizes = " << join_sizes(c.window_sizes) << '\n'
        << "models = " << models << '\n'
        << "seed = " << c.seed << '\n'
        << "background = " << to_string(c.background) << '\n'
        << "threshold = " << text::format_double(c.threshold) << '\n'
        << "repetitions = " << c.repetitions << '\n'
        << "estimators = " << c.forest.n_estimators << '\n'
        << "max_features = " << c.forest.max_features << '\n'
        << "max_depth = " << (c.forest.max_depth ? std::to_string(*c.forest.max_depth) : std::string("none")) << '\n'
        << "min_samples_split = " << c.forest.min_samples_split << '\n'
        << "hidden = " << hidden << '\n'
        << "activation = " << to_string(c.mlp.activation) << '\n'
        << "epochs = " << c.mlp.epochs << '\n'
        << "batch_size = " << c.mlp.batch_size << '\n'
        << "learning_rate = " << text::format_double(c.mlp.learning_rate) << '\n';
}

// ---------------------------------------------------------------- sweep

namespace {

EvalReport mean_report(const std::vector<EvalReport>& runs, double threshold) {
    EvalReport m;
    m.threshold = threshold;
    const auto n = static_cast<double>(runs.size());
    for (const auto& r : runs) {
        m.confusion.tp += r.confusion.tp;
        m.confusion.fp += r.confusion.fp;
        m.confusion.fn += r.confusion.fn;
        m.confusion.tn += r.confusion.tn;
        m.accuracy += r.accuracy / n;
        m.precision += r.precision / n;
        m.recall += r.recall / n;
        m.f1 += r.f1 / n;
        m.precision_undefined |= r.precision_undefined;
        m.recall_undefined |= r.recall_undefined;
        m.f1_undefined |= r.f1_undefined;
    }
    return m;
}

}  // namespace

SweepResult run_sweep(const std::vector<FlowRecord>& flows, const SweepConfig& config, unsigned jobs) {
    SweepResult result;
    result.group = config.group;

    struct SizeData {
        std::optional<Dataset> data;
        std::string error;
    };
    std::vector<SizeData> per_size(config.window_sizes.size());
    parallel_for(per_size.size(), jobs, [&](std::size_t s) {
        try {
            const auto windows = build_windows(flows, {config.window_sizes[s], config.background});
            const auto vectors = extract_all(windows);
            per_size[s].data = Dataset::from_vectors(vectors);
        } catch (const std::exception& e) {
            per_size[s].error = e.what();
        }
    });

    const std::size_t n_models = config.models.size();
    result.rows.resize(config.window_sizes.size() * n_models);
    parallel_for(result.rows.size(), jobs, [&](std::size_t cell) {
        const std::size_t s = cell / n_models;
        const std::size_t m = cell % n_models;
        SweepRow& row = result.rows[cell];
        row.window_size = config.window_sizes[s];
        row.model = config.models[m];
        if (!per_size[s].data) {
            row.error = per_size[s].error;
            return;
        }
        const Dataset& data = *per_size[s].data;
        row.windows = data.size();
        try {
            for (int rep = 0; rep < config.repetitions; ++rep) {
                const auto r = static_cast<std::uint64_t>(rep);
                const auto [train, test] = split_train_test(data, 0.7, derive_seed(config.seed, {s, r, 0x5917ULL}));
                const auto probas = train_and_score(row.model, train, test, config.forest, config.mlp,
                                                    derive_seed(config.seed, {s, m, r}));
                row.runs.push_back(evaluate(probas, std::span<const int>(test.y.data(), test.size()), config.threshold));
            }
            row.mean = mean_report(row.runs, config.threshold);
        } catch (const std::exception& e) {
            row.runs.clear();
            row.error = e.what();
        }
    });
    return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    out << "group,window_size,model,windows,runs,accuracy,precision,recall,f1,status\n";
    for (const auto& row : result.rows) {
        out << result.group << ',' << text::format_double(row.window_size) << ',' << to_string(row.model) << ','
            << row.windows << ',' << row.runs.size() << ',';
        if (row.mean) {
            out << text::format_double17(row.mean->accuracy) << ',' << text::format_double17(row.mean->precision) << ','
                << text::format_double17(row.mean->recall) << ',' << text::format_double17(row.mean->f1) << ",ok\n";
        } else {
            std::string reason = row.error;
            std::replace(reason.begin(), reason.end(), ',', ';');
            std::replace(reason.begin(), reason.end(), '\n', ' ');
            out << ",,,,missing: " << reason << '\n';
        }
    }
}

// ---------------------------------------------------------------- importance

ImportanceReport importance_report(const ForestModel& model, int top_k) {
    if (top_k < 1) throw ContractError("importance_report: top_k must be >= 1");
    ImportanceReport report;
    const Eigen::VectorXd& imp = model.importances;
    std::vector<int> order(static_cast<std::size_t>(imp.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return imp(a) > imp(b); });
    for (int f : order) {
        if (static_cast<int>(report.entries.size()) >= top_k) break;
        if (!(imp(f) > 0.0)) break;
        const int id = f + 1;
        const std::string name = id <= kFeatureCount && model.n_features == kFeatureCount ? std::string(feature_name(id))
                                                                                            : "x" + std::to_string(id);
        report.entries.push_back({id, name, imp(f)});
    }
    report.all_zero = report.entries.empty();
    return report;
}

void write_importance_csv(std::ostream& out, const ImportanceReport& report) {
    out << "rank,feature_id,name,score\n";
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const auto& e = report.entries[i];
        out << i + 1 << ',' << e.feature_id << ',' << e.name << ',' << text::format_double17(e.score) << '\n';
    }
}

// ---------------------------------------------------------------- synthetic traces

AttackKind parse_attack_kind(std::string_view s) {
    const std::string lower = text::to_lower(text::trim(s));
    if (lower == "ddos" || lower == "ddoslike") return AttackKind::DDoSLike;
    if (lower == "spam" || lower == "spamlike") return AttackKind::SpamLike;
    if (lower == "irc" || lower == "irclike") return AttackKind::IrcLike;
    throw ConfigError("unknown attack kind '" + std::string(s) + "' (expected ddos|spam|irc)");
}

std::string_view to_string(AttackKind k) {
    switch (k) {
    case AttackKind::DDoSLike: return "ddos";
    case AttackKind::SpamLike: return "spam";
    case AttackKind::IrcLike: return "irc";
    }
    return "ddos";
}

namespace {

// 2011/08/10 09:46:53 (naive time), the start of a typical capture day.
constexpr std::int64_t kSyntheticEpochUs = 1312969613LL * 1'000'000LL;

class TraceBuilder {
public:
    explicit TraceBuilder(const SynthSpec& spec)
        : spec_(spec), rng_(derive_seed(spec.seed, {0x7ace})) {
        // Fixed address pools: campus clients in a class-B network, servers spread over classes A, B, C.
        for (int i = 0; i < 60; ++i) clients_.push_back("147.32.84." + std::to_string(10 + i));
        for (int i = 0; i < 120; ++i) {
            const int kind = i % 4;
            if (kind == 0) servers_.push_back(std::to_string(20 + i % 90) + "." + std::to_string(i) + ".10." + std::to_string(1 + i % 200));
            else if (kind == 1) servers_.push_back("158." + std::to_string(100 + i % 50) + ".7." + std::to_string(i));
            else if (kind == 2) servers_.push_back("195.113." + std::to_string(i) + "." + std::to_string(3 + i % 100));
            else servers_.push_back("209.85." + std::to_string(i % 200) + ".99");
        }
    }

    SyntheticTrace build() {
        const auto minutes = static_cast<std::size_t>(std::ceil(spec_.trace_seconds / 60.0));
        std::vector<double> weights(minutes);
        std::lognormal_distribution<double> drift(0.0, spec_.rate_variability);
        for (auto& w : weights) w = drift(rng_);
        std::discrete_distribution<std::size_t> minute(weights.begin(), weights.end());
        for (std::size_t i = 0; i < spec_.n_background_flows; ++i) {
            const double t = std::min(spec_.trace_seconds, (static_cast<double>(minute(rng_)) + uniform(0.0, 1.0)) * 60.0);
            background_flow(std::min(t, std::nextafter(spec_.trace_seconds, 0.0)));
        }
        for (std::size_t b = 0; b < spec_.decoy_bursts; ++b) decoy_burst();
        for (std::size_t b = 0; b < spec_.attack_bursts; ++b) attack_burst(b);
        std::stable_sort(flows_.begin(), flows_.end(),
                         [](const FlowRecord& a, const FlowRecord& b) { return a.start_time < b.start_time; });
        // Re-anchor so the earliest record sits at relative time 0, as the parser would report.
        SyntheticTrace trace;
        trace.epoch_us = kSyntheticEpochUs;
        if (!flows_.empty()) {
            const std::int64_t first_us = std::llround(flows_.front().start_time * 1e6);
            trace.epoch_us += first_us;
            for (auto& f : flows_) f.start_time = static_cast<double>(std::llround(f.start_time * 1e6) - first_us) / 1e6;
        }
        trace.flows = std::move(flows_);
        return trace;
    }

private:
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }
    double exponential(double mean) { return std::exponential_distribution<double>(1.0 / mean)(rng_); }
    template <class T>
    const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(uniform_int(0, static_cast<int>(v.size()) - 1))]; }

    static double micros(double seconds) { return static_cast<double>(std::llround(seconds * 1e6)) / 1e6; }

    void add(FlowRecord f) {
        f.start_time = micros(f.start_time);
        f.duration = micros(f.duration);
        f.scenario_id = spec_.scenario_id;
        f.tag = classify_label(f.label);
        if (f.proto_raw.empty()) f.proto_raw = std::string(to_string(f.proto));
        flows_.push_back(std::move(f));
    }

    void fill_volume(FlowRecord& f, std::int64_t pkts, double bytes_per_pkt, double src_share) {
        f.tot_pkts = std::max<std::int64_t>(1, pkts);
        f.tot_bytes = static_cast<std::int64_t>(std::llround(static_cast<double>(f.tot_pkts) * bytes_per_pkt));
        f.src_bytes = std::min(f.tot_bytes, static_cast<std::int64_t>(std::llround(static_cast<double>(f.tot_bytes) * src_share)));
    }

    void background_flow(double start) {
        FlowRecord f;
        f.start_time = start;
        const bool normal = chance(spec_.normal_fraction);
        const std::string who = normal ? "flow=To-Normal-V42-" : "flow=Background-";
        const bool outbound = chance(0.8);
        const std::string client = pick(clients_);
        const std::string server = pick(servers_);
        f.src_addr = outbound ? client : server;
        f.dst_addr = outbound ? server : client;
        f.direction = chance(0.7) ? "<->" : "->";

        const double r = uniform(0.0, 1.0);
        if (r < 0.55) {
            f.proto = Protocol::TCP;
            static const std::array<int, 5> kTcpPorts = {80, 443, 25, 22, 110};
            f.src_port = uniform_int(1024, 65535);
            f.dst_port = chance(0.15) ? uniform_int(1024, 65535) : kTcpPorts[static_cast<std::size_t>(uniform_int(0, 4))];
            f.duration = chance(0.6) ? uniform(0.0, 0.05) : exponential(0.4);
            static const std::array<const char*, 4> kStates = {"FSPA_FSPA", "S_RA", "SRPA_SPA", "S_"};
            f.state = kStates[static_cast<std::size_t>(uniform_int(0, 3))];
            fill_volume(f, 3 + static_cast<std::int64_t>(exponential(12.0)), uniform(60.0, 1400.0), uniform(0.1, 0.6));
            f.label = who + (normal ? "TCP-Established" : "TCP-Established");
        } else if (r < 0.88) {
            f.proto = Protocol::UDP;
            f.src_port = uniform_int(1024, 65535);
            const double p = uniform(0.0, 1.0);
            f.dst_port = p < 0.6 ? 53 : (p < 0.75 ? 123 : uniform_int(1024, 65535));
            f.duration = chance(0.5) ? 0.0 : exponential(0.1);
            f.state = "CON";
            fill_volume(f, 1 + static_cast<std::int64_t>(exponential(1.5)), uniform(60.0, 600.0), uniform(0.3, 0.6));
            f.label = who + "UDP-Attempt";
        } else {
            f.proto = Protocol::ICMP;
            f.src_port = 8;  // echo request type, written as decimal
            f.dst_port = 0;
            f.duration = chance(0.6) ? 0.0 : exponential(0.2);
            f.state = chance(0.8) ? "ECO" : "URP";
            fill_volume(f, 1 + static_cast<std::int64_t>(exponential(2.0)), uniform(64.0, 128.0), 0.5);
            f.label = who + "ICMP";
        }
        add(std::move(f));
    }

    // Same shape as a DDoS burst (one source, one target, short ICMP/UDP) but
    // ordinary ping-sized payloads.
    void decoy_burst() {
        const double span = spec_.burst_seconds;
        const double begin = uniform(0.0, std::max(0.0, spec_.trace_seconds - span));
        const std::string source = pick(clients_);
        const std::string target = pick(servers_);
        for (std::size_t i = 0; i < spec_.flows_per_burst; ++i) {
            FlowRecord f;
            f.start_time = begin + uniform(0.0, span);
            f.src_addr = source;
            f.dst_addr = target;
            f.direction = "->";
            f.duration = uniform(0.0, 0.05);
            if (chance(0.6)) {
                f.proto = Protocol::ICMP;
                f.src_port = 8;
                f.dst_port = 0;
                f.state = "ECO";
                fill_volume(f, uniform_int(1, 2), uniform(64.0, 128.0), 1.0);
                f.label = "flow=To-Normal-V42-ICMP";
            } else {
                f.proto = Protocol::UDP;
                f.src_port = uniform_int(1024, 65535);
                f.dst_port = uniform_int(1024, 65535);
                f.state = "INT";
                fill_volume(f, 1, uniform(64.0, 200.0), 1.0);
                f.label = "flow=To-Normal-V42-UDP-Attempt";
            }
            add(std::move(f));
        }
    }

    void attack_burst(std::size_t burst) {
        const double span = spec_.burst_seconds;
        const double begin = uniform(0.0, std::max(0.0, spec_.trace_seconds - span));
        switch (spec_.attack) {
        case AttackKind::DDoSLike: {
            const std::string bot = "147.32.84.165";
            const std::string target = servers_[burst % servers_.size()];
            for (std::size_t i = 0; i < spec_.flows_per_burst; ++i) {
                FlowRecord f;
                f.start_time = begin + uniform(0.0, span);
                f.src_addr = bot;
                f.dst_addr = target;
                f.direction = "->";
                f.duration = uniform(0.0, 0.0099) * spec_.duration_scale;
                if (chance(0.6)) {
                    f.proto = Protocol::ICMP;
                    f.src_port = 8;
                    f.dst_port = 0;
                    f.state = "ECO";
                    fill_volume(f, uniform_int(1, 2), 1066.0, 1.0);
                    f.label = "flow=From-Botnet-V44-ICMP-Attack";
                } else {
                    f.proto = Protocol::UDP;
                    f.src_port = uniform_int(1024, 65535);
                    f.dst_port = uniform_int(1024, 65535);
                    f.state = "INT";
                    fill_volume(f, 1, 1066.0, 1.0);
                    f.label = "flow=From-Botnet-V44-UDP-Attack";
                }
                add(std::move(f));
            }
            break;
        }
        case AttackKind::SpamLike: {
            const std::string bot = "147.32.84.165";
            for (std::size_t i = 0; i < spec_.flows_per_burst; ++i) {
                FlowRecord f;
                f.start_time = begin + uniform(0.0, span);
                f.proto = Protocol::TCP;
                f.src_addr = bot;
                // Mail servers all over the address space.
                f.dst_addr = std::to_string(uniform_int(1, 223)) + "." + std::to_string(uniform_int(0, 255)) + "." +
                             std::to_string(uniform_int(0, 255)) + "." + std::to_string(uniform_int(1, 254));
                f.src_port = uniform_int(1024, 65535);
                f.dst_port = 25;
                f.direction = "<->";
                f.duration = uniform(2.0, 8.0) * spec_.duration_scale;
                f.state = "FSPA_FSPA";
                fill_volume(f, 20 + uniform_int(0, 40), uniform(900.0, 1400.0), uniform(0.7, 0.9));
                f.label = "flow=From-Botnet-V42-TCP-Attempt-SPAM";
                add(std::move(f));
            }
            break;
        }
        case AttackKind::IrcLike: {
            const std::string controller = "195.113.232." + std::to_string(80 + burst % 3);
            for (std::size_t i = 0; i < spec_.flows_per_burst; ++i) {
                FlowRecord f;
                f.start_time = begin + uniform(0.0, span);
                f.src_addr = controller;
                f.dst_addr = "147.32.84." + std::to_string(uniform_int(160, 209));
                f.direction = "<->";
                if (chance(0.3)) {
                    f.proto = Protocol::UDP;
                    f.src_port = uniform_int(1024, 65535);
                    f.dst_port = uniform_int(1024, 65535);
                    f.state = "CON";
                    f.duration = uniform(0.0, 0.2) * spec_.duration_scale;
                    fill_volume(f, 1 + uniform_int(0, 2), uniform(60.0, 200.0), 0.5);
                    f.label = "flow=From-Botnet-V42-UDP-Established";
                } else {
                    f.proto = Protocol::TCP;
                    f.src_port = 6667;
                    f.dst_port = uniform_int(1024, 65535);
                    f.state = "SRPA_SPA";
                    f.duration = uniform(0.05, 0.5) * spec_.duration_scale;
                    fill_volume(f, 3 + uniform_int(0, 6), uniform(80.0, 300.0), 0.7);
                    f.label = "flow=From-Botnet-V42-TCP-CC" + std::to_string(1 + burst % 4) + "-IRC";
                }
                add(std::move(f));
            }
            break;
        }
        }
    }

    const SynthSpec& spec_;
    Rng rng_;
    std::vector<std::string> clients_;
    std::vector<std::string> servers_;
    std::vector<FlowRecord> flows_;
};

}  // namespace

SyntheticTrace generate_synthetic(const SynthSpec& spec) {
    if (!(spec.trace_seconds > 0.0)) throw ConfigError("synthetic: trace length must be positive");
    if (!(spec.burst_seconds >= 0.0) || !(spec.duration_scale >= 0.0)) throw ConfigError("synthetic: negative burst parameters");
    if (!(spec.rate_variability >= 0.0)) throw ConfigError("synthetic: rate_variability must be >= 0");
    if (!(spec.normal_fraction >= 0.0 && spec.normal_fraction <= 1.0)) throw ConfigError("synthetic: normal_fraction must be in [0, 1]");
    return TraceBuilder(spec).build();
}

void write_synthetic(std::ostream& out, const SynthSpec& spec) {
    const SyntheticTrace trace = generate_synthetic(spec);
    write_binetflow(out, trace.flows, trace.epoch_us);
}

}  // namespace botwin
