#pragma once

#include "botwin/eval.hpp"
#include "botwin/features.hpp"
#include "botwin/flow.hpp"
#include "botwin/forest.hpp"
#include "botwin/mlp.hpp"
#include "botwin/window.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace botwin {

// ---------------------------------------------------------------- scenarios

/// Attack category and the capture scenarios merged into it.
struct ScenarioGroup {
    std::string name;
    std::vector<int> scenario_ids;
};

/// DDoS, SPAM, IRC, or ALL (scenarios 1-9). Case-insensitive.
ScenarioGroup scenario_group(std::string_view name);

/// Scenarios 1-9 are registered; others are accepted by callers with a warning.
bool is_registered_scenario(int id);

/// Concatenates the flows of the group's scenarios, tagging each flow with
/// its scenario id so windows never span scenarios. Throws ConfigError when a
/// listed scenario is missing.
std::vector<FlowRecord> merge_scenarios(const std::map<int, std::vector<FlowRecord>>& per_scenario,
                                        const ScenarioGroup& group);

/// Scenario manifest: one `<id> <path>` (or `<id> = <path>`) per line, '#' comments.
/// Relative paths resolve against `base_dir` when given.
std::map<int, std::string> read_manifest(std::istream& in, const std::string& base_dir = {});

// ---------------------------------------------------------------- models

enum class ModelKind { Forest, Mlp };

ModelKind parse_model_kind(std::string_view s);
std::string_view to_string(ModelKind m);

/// Trains the chosen model on `train` and scores every row of `test`.
std::vector<double> train_and_score(ModelKind kind, const Dataset& train, const Dataset& test,
                                    const ForestConfig& forest, const MlpConfig& mlp, std::uint64_t seed);

// ---------------------------------------------------------------- sweep

struct SweepConfig {
    std::string group = "DDoS";
    std::vector<double> window_sizes{std::begin(kDefaultWindowSizes), std::end(kDefaultWindowSizes)};
    std::vector<ModelKind> models = {ModelKind::Forest, ModelKind::Mlp};
    BackgroundMode background = BackgroundMode::Exclude;
    double threshold = 0.5;
    int repetitions = 3;
    std::uint64_t seed = 0;
    ForestConfig forest;
    MlpConfig mlp;
};

/// Reads `key = value` lines: group, sizes, models, seed, background,
/// threshold, repetitions, estimators, max_features, max_depth,
/// min_samples_split, hidden, activation, epochs, batch_size, learning_rate.
SweepConfig read_sweep_config(std::istream& in);
void write_sweep_config(std::ostream& out, const SweepConfig& config);

struct SweepRow {
    double window_size = 0.0;
    ModelKind model = ModelKind::Forest;
    std::size_t windows = 0;  // feature rows at this size
    std::optional<EvalReport> mean;  // empty when the cell failed
    std::vector<EvalReport> runs;
    std::string error;
};

struct SweepResult {
    std::string group;
    std::vector<SweepRow> rows;  // ordered by (window size, model) as configured
};

/// For every (size, model): windows, features, seeded 70/30 split, training
/// and evaluation, averaged over the configured repetitions. A failing cell
/// is recorded with its error and the sweep continues.
SweepResult run_sweep(const std::vector<FlowRecord>& flows, const SweepConfig& config, unsigned jobs = 1);

/// Columns: group,window_size,model,windows,runs,accuracy,precision,recall,f1,status
void write_sweep_csv(std::ostream& out, const SweepResult& result);

// ---------------------------------------------------------------- importance

struct ImportanceEntry {
    int feature_id;
    std::string name;
    double score;
};

struct ImportanceReport {
    std::vector<ImportanceEntry> entries;  // score descending, ties by feature id; zero scores dropped
    bool all_zero = false;
};

ImportanceReport importance_report(const ForestModel& model, int top_k = 10);

/// Columns: rank,feature_id,name,score
void write_importance_csv(std::ostream& out, const ImportanceReport& report);

// ---------------------------------------------------------------- synthetic traces

enum class AttackKind { DDoSLike, SpamLike, IrcLike };

AttackKind parse_attack_kind(std::string_view s);
std::string_view to_string(AttackKind k);

/// Generative parameters of a labelled synthetic capture.
struct SynthSpec {
    std::uint64_t seed = 1;
    double trace_seconds = 3600.0;
    std::size_t n_background_flows = 6000;  // non-attack flows
    double normal_fraction = 0.5;           // share of them labelled Normal (rest Background)
    AttackKind attack = AttackKind::DDoSLike;
    std::size_t attack_bursts = 20;
    std::size_t flows_per_burst = 25;
    double burst_seconds = 0.1;    // time span of one burst
    double duration_scale = 1.0;   // multiplies attack flow durations
    std::size_t decoy_bursts = 40; // Normal-labelled bursts of short ICMP/UDP chatter
    double rate_variability = 1.0; // stddev of the log background rate across minutes
    int scenario_id = 1;

    std::size_t attack_flows() const { return attack_bursts * flows_per_burst; }
};

struct SyntheticTrace {
    std::vector<FlowRecord> flows;  // sorted by start time, relative seconds
    std::int64_t epoch_us = 0;      // absolute time of second 0
};

/// Deterministic in `spec`. Background traffic mixes TCP/UDP/ICMP with web,
/// DNS, mail and peer-to-peer port profiles at a rate that drifts from minute
/// to minute, plus Normal decoy bursts of short low-volume ICMP/UDP chatter
/// that resemble attacks in aggregate only. Attack bursts follow the kind:
/// DDoSLike emits sub-10 ms ICMP/UDP floods to high ports, SpamLike SMTP
/// sessions to many destinations with large transfers, IrcLike one controller
/// talking to many bots over IRC ports with UDP side traffic.
SyntheticTrace generate_synthetic(const SynthSpec& spec);

void write_synthetic(std::ostream& out, const SynthSpec& spec);

}  // namespace botwin
