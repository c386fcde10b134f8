#include "botwin/error.hpp"
#include "botwin/harness.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace botwin;
using fixture::flow;

namespace {

SweepConfig quick_sweep() {
    SweepConfig c;
    c.repetitions = 1;
    c.seed = 3;
    c.forest.n_estimators = 5;
    c.mlp.hidden_sizes = {8};
    c.mlp.epochs = 2;
    c.mlp.batch_size = 16;
    return c;
}

SynthSpec small_trace(std::uint64_t seed) {
    SynthSpec s;
    s.seed = seed;
    s.trace_seconds = 300.0;
    s.n_background_flows = 600;
    s.attack_bursts = 4;
    s.flows_per_burst = 10;
    s.decoy_bursts = 4;
    return s;
}

}  // namespace

TEST_CASE("scenario groups") {
    CHECK(scenario_group("DDoS").scenario_ids == std::vector<int>{4, 7, 8});
    CHECK(scenario_group("ddos").name == "DDoS");
    CHECK(scenario_group("SPAM").scenario_ids == std::vector<int>{1, 2, 5, 6, 9});
    CHECK(scenario_group("irc").scenario_ids == std::vector<int>{1, 2, 3, 4, 6, 7, 8});
    CHECK(scenario_group("ALL").scenario_ids.size() == 9);
    CHECK_THROWS_AS(scenario_group("P2P"), ConfigError);
    CHECK(is_registered_scenario(9));
    CHECK_FALSE(is_registered_scenario(10));
}

TEST_CASE("merging scenarios tags flows and requires every member") {
    std::map<int, std::vector<FlowRecord>> per = {{4, {flow(0.0, 0)}}, {7, {flow(0.0, 0), flow(1.0, 0)}}};
    CHECK_THROWS_AS(merge_scenarios(per, scenario_group("DDoS")), ConfigError);
    per[8] = {flow(0.5, 0, Tag::Botnet)};
    const auto merged = merge_scenarios(per, scenario_group("DDoS"));
    REQUIRE(merged.size() == 4);
    CHECK(merged[0].scenario_id == 4);
    CHECK(merged[1].scenario_id == 7);
    CHECK(merged[3].scenario_id == 8);

    // Flows at the same relative time in different scenarios stay in separate windows.
    const auto windows = build_windows(merged, {1.0, BackgroundMode::Exclude});
    CHECK(windows.size() == 4);
}

TEST_CASE("manifest parsing") {
    std::istringstream in("# scenario list\n4 a/four.binetflow\n7 = /abs/seven.binetflow\n8: eight.binetflow  # trailing\n\n");
    const auto m = read_manifest(in, "/data");
    REQUIRE(m.size() == 3);
    CHECK(m.at(4) == "/data/a/four.binetflow");
    CHECK(m.at(7) == "/abs/seven.binetflow");
    CHECK(m.at(8) == "/data/eight.binetflow");

    std::istringstream dup("4 a\n4 b\n");
    CHECK_THROWS_AS(read_manifest(dup), ConfigError);
    std::istringstream bad("four a\n");
    CHECK_THROWS_AS(read_manifest(bad), ConfigError);
}

TEST_CASE("sweep config round trip") {
    SweepConfig c = quick_sweep();
    c.group = "IRC";
    c.window_sizes = {0.5, 2.0};
    c.models = {ModelKind::Mlp};
    c.threshold = 0.25;
    c.forest.max_depth = 7;
    c.mlp.activation = Activation::Tanh;
    std::stringstream buffer;
    write_sweep_config(buffer, c);
    const SweepConfig back = read_sweep_config(buffer);
    CHECK(back.group == "IRC");
    CHECK(back.window_sizes == c.window_sizes);
    CHECK(back.models == c.models);
    CHECK(back.threshold == 0.25);
    CHECK(back.seed == 3);
    CHECK(back.forest.max_depth == 7);
    CHECK(back.forest.n_estimators == 5);
    CHECK(back.mlp.hidden_sizes == std::vector<int>{8});
    CHECK(back.mlp.activation == Activation::Tanh);
    std::stringstream again;
    write_sweep_config(again, back);
    CHECK(again.str() == buffer.str());

    std::istringstream unknown("colour = blue\n");
    CHECK_THROWS_AS(read_sweep_config(unknown), ConfigError);
    std::istringstream bad_size("sizes = 1, -2\n");
    CHECK_THROWS_AS(read_sweep_config(bad_size), ConfigError);
}

TEST_CASE("sweep covers every size and model and is deterministic") {
    const auto trace = generate_synthetic(small_trace(2));
    const SweepConfig c = quick_sweep();
    const SweepResult a = run_sweep(trace.flows, c, 2);
    REQUIRE(a.rows.size() == 10);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].window_size == kDefaultWindowSizes[i / 2]);
        CHECK(a.rows[i].model == (i % 2 == 0 ? ModelKind::Forest : ModelKind::Mlp));
        CHECK(a.rows[i].mean.has_value());
        CHECK(a.rows[i].runs.size() == 1);
    }
    std::ostringstream first, second;
    write_sweep_csv(first, a);
    write_sweep_csv(second, run_sweep(trace.flows, c, 1));
    CHECK(first.str() == second.str());
}

TEST_CASE("a failing cell is marked missing and the sweep continues") {
    std::vector<FlowRecord> flows;
    for (int i = 0; i < 40; ++i) flows.push_back(flow(i * 0.5, 0.0, i % 4 == 0 ? Tag::Botnet : Tag::Normal));
    SweepConfig c = quick_sweep();
    c.window_sizes = {1.0, 60.0};  // 60 s gives a single window, too few to split
    const SweepResult r = run_sweep(flows, c);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].mean.has_value());
    CHECK_FALSE(r.rows[2].mean.has_value());
    CHECK_FALSE(r.rows[2].error.empty());
    CHECK(r.rows[2].windows == 1);
    std::ostringstream csv;
    write_sweep_csv(csv, r);
    CHECK(csv.str().find(",missing: ") != std::string::npos);
    CHECK(csv.str().find(",ok\n") != std::string::npos);
}

TEST_CASE("importance reports") {
    ForestModel single;
    single.n_features = 1;
    single.importances = Eigen::VectorXd::Ones(1);
    const auto one = importance_report(single, 10);
    REQUIRE(one.entries.size() == 1);
    CHECK(one.entries[0].feature_id == 1);
    CHECK(one.entries[0].name == "x1");
    CHECK(one.entries[0].score == 1.0);

    ForestModel m;
    m.n_features = kFeatureCount;
    m.importances = Eigen::VectorXd::Constant(kFeatureCount, 1.0 / kFeatureCount);
    const auto all = importance_report(m, kFeatureCount);
    REQUIRE(all.entries.size() == static_cast<std::size_t>(kFeatureCount));
    double total = 0.0;
    for (std::size_t i = 0; i < all.entries.size(); ++i) {
        CHECK(all.entries[i].feature_id == static_cast<int>(i) + 1);  // ties keep feature order
        CHECK(all.entries[i].name == feature_name(static_cast<int>(i) + 1));
        total += all.entries[i].score;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(importance_report(m, 3).entries.size() == 3);

    m.importances.setZero();
    m.importances(9) = 0.7;
    m.importances(4) = 0.3;
    const auto two = importance_report(m, 5);
    REQUIRE(two.entries.size() == 2);
    CHECK(two.entries[0].feature_id == 10);
    CHECK(two.entries[1].feature_id == 5);

    m.importances.setZero();
    const auto none = importance_report(m);
    CHECK(none.all_zero);
    CHECK(none.entries.empty());
    CHECK_THROWS_AS(importance_report(m, 0), ContractError);
}

TEST_CASE("synthetic traces") {
    SynthSpec clean = small_trace(4);
    clean.attack_bursts = 0;
    for (const auto& f : generate_synthetic(clean).flows) CHECK_FALSE(is_attack(f.tag));

    const auto ddos = generate_synthetic(small_trace(5));
    std::size_t attacks = 0;
    for (const auto& f : ddos.flows) {
        if (!is_attack(f.tag)) continue;
        ++attacks;
        CHECK(f.duration < 0.01);
        const bool icmp = f.proto == Protocol::ICMP;
        const bool high_port = f.dst_port && *f.dst_port >= 1024;
        CHECK((icmp || high_port));
    }
    CHECK(attacks == small_trace(5).attack_flows());
    for (std::size_t i = 1; i < ddos.flows.size(); ++i) CHECK(ddos.flows[i - 1].start_time <= ddos.flows[i].start_time);

    std::ostringstream a, b, c;
    write_synthetic(a, small_trace(6));
    write_synthetic(b, small_trace(6));
    write_synthetic(c, small_trace(7));
    CHECK(a.str() == b.str());
    CHECK(a.str() != c.str());

    std::istringstream in(a.str());
    const auto parsed = parse_binetflow(in);
    CHECK(parsed.stats.skipped == 0);
    CHECK(parsed.flows.size() == generate_synthetic(small_trace(6)).flows.size());

    SynthSpec bad = small_trace(1);
    bad.trace_seconds = 0.0;
    CHECK_THROWS_AS(generate_synthetic(bad), ConfigError);
    CHECK(parse_attack_kind("SPAM") == AttackKind::SpamLike);
    CHECK_THROWS_AS(parse_attack_kind("worm"), ConfigError);
}

TEST_CASE("spam and irc traces carry their signatures") {
    SynthSpec spam = small_trace(8);
    spam.attack = AttackKind::SpamLike;
    std::size_t smtp = 0, attacks = 0;
    for (const auto& f : generate_synthetic(spam).flows) {
        if (!is_attack(f.tag)) continue;
        ++attacks;
        smtp += f.dst_port == 25;
    }
    CHECK(attacks > 0);
    CHECK(smtp * 2 > attacks);

    SynthSpec irc = small_trace(9);
    irc.attack = AttackKind::IrcLike;
    std::size_t cc = 0;
    for (const auto& f : generate_synthetic(irc).flows) cc += f.tag == Tag::CandC;
    CHECK(cc > 0);
}
