#include "botwin/error.hpp"
#include "botwin/eval.hpp"
#include "botwin/features.hpp"
#include "botwin/flow.hpp"
#include "botwin/forest.hpp"
#include "botwin/harness.hpp"
#include "botwin/mlp.hpp"
#include "botwin/parallel.hpp"
#include "botwin/text.hpp"
#include "botwin/window.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace botwin;

namespace {

struct ModelOptions {
    std::string model = "forest";
    int estimators = 10;
    int max_features = 6;
    std::string max_depth = "none";
    int min_samples_split = 2;
    bool per_tree_features = false;
    bool no_bootstrap = false;
    std::vector<int> hidden = {64, 32};
    std::string activation = "relu";
    double dropout = 0.5;
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 0.01;

    ForestConfig forest(std::uint64_t seed) const {
        ForestConfig c;
        c.n_estimators = estimators;
        c.max_features = max_features;
        if (text::to_lower(max_depth) != "none") {
            const auto d = text::parse_int(max_depth);
            if (!d) throw ConfigError("--max-depth: expected an integer or 'none'");
            c.max_depth = static_cast<int>(*d);
        }
        c.min_samples_split = min_samples_split;
        c.per_tree_features = per_tree_features;
        c.bootstrap = !no_bootstrap;
        c.seed = seed;
        c.validate();
        return c;
    }

    MlpConfig mlp(std::uint64_t seed) const {
        MlpConfig c;
        c.hidden_sizes = hidden;
        c.activation = parse_activation(activation);
        c.dropout_rate = dropout;
        c.epochs = epochs;
        c.batch_size = batch_size;
        c.learning_rate = learning_rate;
        c.seed = seed;
        c.validate();
        return c;
    }
};

void add_model_options(CLI::App* sub, ModelOptions& m) {
    sub->add_option("--model", m.model, "forest | mlp")->capture_default_str();
    sub->add_option("--estimators", m.estimators, "forest: number of trees")->capture_default_str();
    sub->add_option("--max-features", m.max_features, "forest: features drawn per split")->capture_default_str();
    sub->add_option("--max-depth", m.max_depth, "forest: depth limit or 'none'")->capture_default_str();
    sub->add_option("--min-samples-split", m.min_samples_split, "forest: smallest splittable node")->capture_default_str();
    sub->add_flag("--per-tree-features", m.per_tree_features, "forest: draw the feature subset once per tree");
    sub->add_flag("--no-bootstrap", m.no_bootstrap, "forest: train every tree on all rows");
    sub->add_option("--hidden", m.hidden, "mlp: hidden layer sizes")->delimiter(',')->capture_default_str();
    sub->add_option("--activation", m.activation, "mlp: relu | tanh | sigmoid | leakyrelu")->capture_default_str();
    sub->add_option("--dropout", m.dropout, "mlp: dropout rate")->capture_default_str();
    sub->add_option("--epochs", m.epochs, "mlp: training epochs")->capture_default_str();
    sub->add_option("--batch-size", m.batch_size, "mlp: mini-batch size")->capture_default_str();
    sub->add_option("--learning-rate", m.learning_rate, "mlp: SGD step size")->capture_default_str();
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestError("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read " + path.string());
    return in;
}

// Every run leaves its resolved options beside its primary output.
void write_run_config(const CLI::App* sub, const fs::path& output) {
    fs::path path = fs::is_directory(output) ? output / "run_config.toml" : fs::path(output.string() + ".config.toml");
    auto out = open_out(path);
    out << "# botwin " << sub->get_name() << '\n' << sub->config_to_str(true, false);
}

void warn_skipped(const std::string& path, const ParseStats& stats) {
    if (stats.skipped > 0)
        std::cerr << "warning: " << path << ": skipped " << stats.skipped << " of " << stats.total << " malformed lines\n";
}

std::vector<FlowRecord> load_flows(const std::string& path, int scenario_id) {
    auto parsed = parse_binetflow_file(path, scenario_id);
    warn_skipped(path, parsed.stats);
    return std::move(parsed.flows);
}

std::vector<FlowRecord> load_group(const std::string& manifest_path, const ScenarioGroup& group) {
    auto in = open_in(manifest_path);
    const auto manifest = read_manifest(in, fs::path(manifest_path).parent_path().string());
    std::map<int, std::vector<FlowRecord>> per_scenario;
    for (const auto& [id, path] : manifest) {
        if (!is_registered_scenario(id)) std::cerr << "warning: scenario " << id << " is not a registered scenario id\n";
        if (std::find(group.scenario_ids.begin(), group.scenario_ids.end(), id) == group.scenario_ids.end()) continue;
        per_scenario.emplace(id, load_flows(path, id));
    }
    return merge_scenarios(per_scenario, group);
}

enum class ModelFile { Forest, Mlp };

ModelFile sniff_model(const std::string& contents) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(contents);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
    const auto format = doc.value("format", std::string{});
    if (format == "botwin.forest") return ModelFile::Forest;
    if (format == "botwin.mlp") return ModelFile::Mlp;
    throw FormatError("model file: unrecognised format '" + format + "'");
}

std::string slurp(const std::string& path) {
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::span<const int> labels_of(const Dataset& d) { return {d.y.data(), d.size()}; }

// Writes to `path`, or to standard output when it is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    auto out = open_out(path);
    fn(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-window botnet detection over bidirectional netflow captures"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::uint64_t seed = 0;
    unsigned jobs = default_jobs();
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "master seed")->capture_default_str();
        sub->add_option("--jobs", jobs, "worker threads (default from BOTWIN_JOBS or CPU count)")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic binetflow capture");
    SynthSpec spec;
    std::string synth_out, attack = "ddos";
    synth->add_option("--out", synth_out, "output binetflow file")->required();
    synth->add_option("--attack", attack, "ddos | spam | irc")->capture_default_str();
    synth->add_option("--background-flows", spec.n_background_flows, "non-attack flows")->capture_default_str();
    synth->add_option("--seconds", spec.trace_seconds, "trace length in seconds")->capture_default_str();
    synth->add_option("--normal-fraction", spec.normal_fraction, "share of non-attack flows labelled Normal")->capture_default_str();
    synth->add_option("--bursts", spec.attack_bursts, "attack bursts")->capture_default_str();
    synth->add_option("--flows-per-burst", spec.flows_per_burst, "flows per attack or decoy burst")->capture_default_str();
    synth->add_option("--burst-seconds", spec.burst_seconds, "time span of one burst")->capture_default_str();
    synth->add_option("--duration-scale", spec.duration_scale, "multiplier on attack flow durations")->capture_default_str();
    synth->add_option("--decoys", spec.decoy_bursts, "Normal look-alike bursts")->capture_default_str();
    synth->add_option("--rate-variability", spec.rate_variability, "log-rate drift between minutes")->capture_default_str();
    synth->add_option("--scenario", spec.scenario_id, "scenario id carried by the flows")->capture_default_str();
    synth->add_option("--seed", spec.seed, "generator seed")->capture_default_str();

    // extract
    auto* extract = app.add_subcommand("extract", "Aggregate flows into windows and write the feature CSV");
    std::string ex_in, ex_manifest, ex_group = "DDoS", ex_out, ex_background = "exclude";
    double ex_window = 1.0;
    int ex_scenario = 1;
    auto* ex_in_opt = extract->add_option("--in", ex_in, "binetflow capture");
    auto* ex_manifest_opt = extract->add_option("--manifest", ex_manifest, "scenario manifest (id path per line)");
    ex_in_opt->excludes(ex_manifest_opt);
    extract->add_option("--group", ex_group, "scenario group used with --manifest: DDoS | SPAM | IRC | ALL")->capture_default_str();
    extract->add_option("--scenario", ex_scenario, "scenario id for --in")->capture_default_str();
    extract->add_option("--window", ex_window, "window size in seconds")->check(CLI::PositiveNumber)->capture_default_str();
    extract->add_option("--background", ex_background, "exclude | non-attack")->capture_default_str();
    extract->add_option("--out", ex_out, "feature CSV")->required();
    add_common(extract);

    // train
    auto* train = app.add_subcommand("train", "Train a forest or MLP on a feature CSV");
    std::string tr_in, tr_out, tr_loss;
    std::vector<int> tr_grid;
    double tr_threshold = 0.5;
    ModelOptions tr_model;
    train->add_option("--in", tr_in, "feature CSV")->required();
    train->add_option("--out", tr_out, "model file")->required();
    add_model_options(train, tr_model);
    train->add_option("--grid", tr_grid, "forest: grid-search these tree counts before training")->delimiter(',');
    train->add_option("--grid-threshold", tr_threshold, "threshold used to score grid points")->capture_default_str();
    train->add_option("--loss-curve", tr_loss, "mlp: per-epoch loss CSV");
    add_common(train);

    // eval
    auto* eval = app.add_subcommand("eval", "Score a feature CSV with a saved model");
    std::string ev_model, ev_in, ev_out, ev_roc, ev_probas;
    double ev_threshold = 0.5;
    eval->add_option("--model", ev_model, "model file")->required();
    eval->add_option("--in", ev_in, "feature CSV")->required();
    eval->add_option("--threshold", ev_threshold, "attack threshold (0.3 is the tuned setting)")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    eval->add_option("--out", ev_out, "report CSV (default or -: standard output)");
    eval->add_option("--roc", ev_roc, "ROC curve CSV");
    eval->add_option("--probas", ev_probas, "per-window probability CSV");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Window-size by model sweep");
    std::string sw_config, sw_in, sw_manifest, sw_out;
    std::optional<std::string> sw_group;
    std::vector<double> sw_sizes;
    std::optional<int> sw_reps;
    std::optional<double> sw_threshold;
    sweep->add_option("--config", sw_config, "run configuration (key = value)");
    auto* sw_in_opt = sweep->add_option("--in", sw_in, "single binetflow capture");
    auto* sw_manifest_opt = sweep->add_option("--manifest", sw_manifest, "scenario manifest");
    sw_in_opt->excludes(sw_manifest_opt);
    sweep->add_option("--group", sw_group, "overrides the configured group");
    sweep->add_option("--sizes", sw_sizes, "overrides the configured window sizes")->delimiter(',');
    sweep->add_option("--repetitions", sw_reps, "overrides the configured repetitions");
    sweep->add_option("--threshold", sw_threshold, "overrides the configured threshold")->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--out", sw_out, "run directory")->required();
    add_common(sweep);

    // importance
    auto* importance = app.add_subcommand("importance", "Rank forest features by mean impurity decrease");
    std::string im_model, im_out;
    int im_top = 10;
    importance->add_option("--model", im_model, "forest model file")->required();
    importance->add_option("--top-k", im_top, "features to report")->check(CLI::PositiveNumber)->capture_default_str();
    importance->add_option("--out", im_out, "importance CSV (default or -: standard output)");

    // kfold
    auto* kfold_cmd = app.add_subcommand("kfold", "k-fold cross-validation on a feature CSV");
    std::string kf_in, kf_out;
    int kf_k = 10;
    double kf_threshold = 0.5;
    bool kf_stratify = false;
    ModelOptions kf_model;
    kfold_cmd->add_option("--in", kf_in, "feature CSV")->required();
    kfold_cmd->add_option("--k", kf_k, "folds")->capture_default_str();
    kfold_cmd->add_option("--threshold", kf_threshold, "attack threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    kfold_cmd->add_flag("--stratify", kf_stratify, "keep class ratios per fold");
    kfold_cmd->add_option("--out", kf_out, "per-fold report CSV (default or -: standard output)");
    add_model_options(kfold_cmd, kf_model);
    add_common(kfold_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        const auto subs = app.get_subcommands();
        std::cerr << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    }

    try {
        if (*synth) {
            spec.attack = parse_attack_kind(attack);
            auto out = open_out(synth_out);
            write_synthetic(out, spec);
            write_run_config(synth, synth_out);
        } else if (*extract) {
            if (ex_in.empty() && ex_manifest.empty()) throw CLI::RequiredError("--in or --manifest");
            const WindowSpec window{ex_window, parse_background_mode(ex_background)};
            const auto flows = ex_manifest.empty() ? load_flows(ex_in, ex_scenario) : load_group(ex_manifest, scenario_group(ex_group));
            const auto vectors = extract_all(build_windows(flows, window), jobs);
            auto out = open_out(ex_out);
            write_feature_csv(out, vectors);
            write_run_config(extract, ex_out);
        } else if (*train) {
            const Dataset data = read_feature_csv_file(tr_in);
            const ModelKind kind = parse_model_kind(tr_model.model);
            auto out = open_out(tr_out);
            if (kind == ModelKind::Forest) {
                ForestConfig cfg = tr_model.forest(seed);
                if (!tr_grid.empty()) {
                    ForestGrid grid;
                    grid.n_estimators = tr_grid;
                    grid.max_depths = {cfg.max_depth};
                    grid.max_features = {cfg.max_features};
                    grid.min_samples_split = {cfg.min_samples_split};
                    const auto result = grid_search_forest(data, grid, cfg, tr_threshold, derive_seed(seed, {0x9e1d}), jobs);
                    auto table = open_out(tr_out + ".grid.csv");
                    write_report_csv_header(table);
                    for (const auto& row : result.table)
                        write_report_csv_row(table, "estimators=" + std::to_string(row.config.n_estimators), row.report);
                    cfg = result.best;
                }
                save_forest(out, train_forest(data, cfg, jobs));
            } else {
                const auto result = train_mlp(data, tr_model.mlp(seed));
                if (result.single_class) std::cerr << "warning: training data holds a single class\n";
                save_mlp(out, result.model);
                if (!tr_loss.empty()) {
                    auto loss = open_out(tr_loss);
                    loss << "epoch,loss\n";
                    for (std::size_t e = 0; e < result.loss_curve.size(); ++e)
                        loss << e + 1 << ',' << text::format_double17(result.loss_curve[e]) << '\n';
                }
            }
            write_run_config(train, tr_out);
        } else if (*eval) {
            const std::string contents = slurp(ev_model);
            const Dataset data = read_feature_csv_file(ev_in);
            std::istringstream model_in(contents);
            const auto probas = sniff_model(contents) == ModelFile::Forest ? load_forest(model_in).predict_proba(data)
                                                                           : predict_proba(load_mlp(model_in), data);
            const EvalReport report = evaluate(probas, labels_of(data), ev_threshold);
            emit(ev_out, [&](std::ostream& os) {
                write_report_csv_header(os);
                write_report_csv_row(os, fs::path(ev_in).filename().string(), report);
            });
            if (!ev_roc.empty()) {
                auto roc = open_out(ev_roc);
                write_roc_csv(roc, report.roc);
            }
            if (!ev_probas.empty()) {
                auto out = open_out(ev_probas);
                out << "window_index,label,probability\n";
                for (std::size_t i = 0; i < probas.size(); ++i)
                    out << data.window_index[i] << ',' << data.y(static_cast<Eigen::Index>(i)) << ','
                        << text::format_double17(probas[i]) << '\n';
            }
            if (!ev_out.empty() && ev_out != "-") write_run_config(eval, ev_out);
        } else if (*sweep) {
            SweepConfig cfg;
            if (!sw_config.empty()) {
                auto in = open_in(sw_config);
                cfg = read_sweep_config(in);
            }
            if (sw_group) cfg.group = scenario_group(*sw_group).name;
            if (!sw_sizes.empty()) cfg.window_sizes = sw_sizes;
            if (sw_reps) cfg.repetitions = *sw_reps;
            if (sw_threshold) cfg.threshold = *sw_threshold;
            if (sweep->count("--seed") > 0) cfg.seed = seed;
            if (cfg.repetitions < 1) throw ConfigError("repetitions must be >= 1");
            if (sw_in.empty() && sw_manifest.empty()) throw CLI::RequiredError("--in or --manifest");
            const auto flows = sw_manifest.empty() ? load_flows(sw_in, 1) : load_group(sw_manifest, scenario_group(cfg.group));

            const SweepResult result = run_sweep(flows, cfg, jobs);
            const fs::path dir(sw_out);
            fs::create_directories(dir);
            {
                auto out = open_out(dir / "sweep.csv");
                write_sweep_csv(out, result);
            }
            {
                auto out = open_out(dir / "runs.csv");
                write_report_csv_header(out);
                for (const auto& row : result.rows)
                    for (std::size_t r = 0; r < row.runs.size(); ++r)
                        write_report_csv_row(out,
                                             "size=" + text::format_double(row.window_size) + ";model=" +
                                                 std::string(to_string(row.model)) + ";rep=" + std::to_string(r),
                                             row.runs[r]);
            }
            {
                auto out = open_out(dir / "sweep.cfg");
                write_sweep_config(out, cfg);
            }
            {
                auto out = open_out(dir / "manifest.txt");
                out << "sweep.csv\tmean scores per (window size, model)\n"
                    << "runs.csv\tone report per repetition\n"
                    << "sweep.cfg\tresolved sweep configuration\n"
                    << "run_config.toml\tresolved command-line options\n";
            }
            write_run_config(sweep, dir);
            for (const auto& row : result.rows)
                if (!row.mean) std::cerr << "warning: cell size=" << row.window_size << " model=" << to_string(row.model)
                                         << " missing: " << row.error << '\n';
        } else if (*importance) {
            auto in = open_in(im_model);
            const auto report = importance_report(load_forest(in), im_top);
            if (report.all_zero) std::cerr << "warning: all importances are zero\n";
            emit(im_out, [&](std::ostream& os) { write_importance_csv(os, report); });
            if (!im_out.empty() && im_out != "-") write_run_config(importance, im_out);
        } else if (*kfold_cmd) {
            const Dataset data = read_feature_csv_file(kf_in);
            const ModelKind kind = parse_model_kind(kf_model.model);
            const ForestConfig fc = kf_model.forest(seed);
            const MlpConfig mc = kf_model.mlp(seed);
            const Trainer trainer = [&](const Dataset& tr, const Dataset& te) {
                return train_and_score(kind, tr, te, fc, mc, seed);
            };
            const auto result = kfold(data, kf_k, seed, trainer, kf_threshold, jobs, kf_stratify);
            emit(kf_out, [&](std::ostream& os) {
                write_report_csv_header(os);
                for (std::size_t f = 0; f < result.reports.size(); ++f)
                    write_report_csv_row(os, "fold" + std::to_string(f + 1), result.reports[f]);
                write_report_csv_row(os, "mean", result.mean);
            });
            if (!kf_out.empty() && kf_out != "-") write_run_config(kfold_cmd, kf_out);
        }
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
