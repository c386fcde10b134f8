#include "botwin/error.hpp"
#include "botwin/window.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace botwin;
using fixture::flow;

namespace {

std::vector<std::int64_t> indices(double start, double duration, double size) {
    return windows_for_flow(flow(start, duration), {size, BackgroundMode::Exclude});
}

// Brute-force membership: window i holds the flow if the flow starts in it, or
// starts before it and is still active strictly after its start.
bool member(const FlowRecord& f, std::int64_t i, double size) {
    const double lo = static_cast<double>(i) * size;
    const double hi = static_cast<double>(i + 1) * size;
    const bool starts_inside = f.start_time >= lo && f.start_time < hi;
    const bool continuing = f.start_time < lo && f.start_time + f.duration > lo;
    return starts_inside || continuing;
}

}  // namespace

TEST_CASE("window membership examples") {
    CHECK(indices(0.5, 2.0, 1.0) == std::vector<std::int64_t>{0, 1, 2});
    CHECK(indices(3.0, 0.0, 1.0) == std::vector<std::int64_t>{3});
    CHECK(indices(0.999, 0.002, 0.01) == std::vector<std::int64_t>{99, 100});
}

TEST_CASE("a flow ending exactly on a boundary stays out of the next window") {
    CHECK(indices(0.5, 0.5, 1.0) == std::vector<std::int64_t>{0});
    CHECK(indices(0.0, 2.0, 1.0) == std::vector<std::int64_t>{0, 1});
}

TEST_CASE("membership agrees with brute force on random flows") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> start(0.0, 50.0), dur(0.0, 5.0);
    const double sizes[] = {0.01, 0.3, 1.0, 7.0, 60.0};
    for (int trial = 0; trial < 400; ++trial) {
        FlowRecord f = flow(std::round(start(rng) * 1e6) / 1e6, trial % 7 == 0 ? 0.0 : std::round(dur(rng) * 1e6) / 1e6);
        const double size = sizes[trial % 5];
        const auto got = windows_for_flow(f, {size, BackgroundMode::Exclude});
        std::vector<std::int64_t> want;
        const auto hi = static_cast<std::int64_t>((f.start_time + f.duration) / size) + 2;
        for (std::int64_t i = 0; i <= hi; ++i)
            if (member(f, i, size)) want.push_back(i);
        CHECK(got == want);
    }
}

TEST_CASE("labels follow the any-attack rule") {
    std::vector<FlowRecord> flows = {flow(0.1, 0), flow(0.2, 0), flow(1.1, 0), flow(1.2, 0, Tag::Botnet),
                                     flow(2.5, 0, Tag::CandC)};
    const auto windows = build_windows(flows, {1.0, BackgroundMode::Exclude});
    REQUIRE(windows.size() == 3);
    CHECK(windows[0].label == 0);
    CHECK(windows[1].label == 1);
    CHECK(windows[2].label == 1);
    for (const auto& w : windows) CHECK(std::abs((w.end - w.start) - 1.0) < 1e-12);
}

TEST_CASE("background handling modes") {
    std::vector<FlowRecord> flows = {flow(0.1, 0), flow(1.5, 0, Tag::Background), flow(1.6, 0, Tag::Botnet),
                                     flow(2.5, 0, Tag::Background)};
    const auto excluded = build_windows(flows, {1.0, BackgroundMode::Exclude});
    REQUIRE(excluded.size() == 2);
    CHECK(excluded[1].index == 1);
    CHECK(excluded[1].flows.size() == 1);

    const auto kept = build_windows(flows, {1.0, BackgroundMode::AsNonAttack});
    REQUIRE(kept.size() == 3);
    CHECK(kept[1].flows.size() == 2);
    CHECK(kept[2].label == 0);
}

TEST_CASE("empty input and omitted windows") {
    CHECK_THROWS_AS(build_windows(std::vector<FlowRecord>{}, {1.0, BackgroundMode::Exclude}), EmptyInputError);
    std::vector<FlowRecord> only_background = {flow(0.0, 0, Tag::Background)};
    CHECK(build_windows(only_background, {1.0, BackgroundMode::Exclude}).empty());
    std::vector<FlowRecord> gap = {flow(0.0, 0), flow(5.0, 0)};
    const auto w = build_windows(gap, {1.0, BackgroundMode::Exclude});
    REQUIRE(w.size() == 2);
    CHECK(w[0].index == 0);
    CHECK(w[1].index == 5);
}

TEST_CASE("windows never mix scenarios") {
    std::vector<FlowRecord> flows = {flow(0.0, 0.5), flow(0.0, 0.5), flow(0.2, 0, Tag::Botnet)};
    flows[1].scenario_id = 7;
    flows[2].scenario_id = 4;
    flows[0].scenario_id = 4;
    const auto windows = build_windows(flows, {1.0, BackgroundMode::Exclude});
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].scenario_id == 4);
    CHECK(windows[1].scenario_id == 7);
    for (const auto& w : windows)
        for (const auto* f : w.flows) CHECK(f->scenario_id == w.scenario_id);
    CHECK(windows[0].label == 1);
    CHECK(windows[1].label == 0);
}

TEST_CASE("conservation, monotonicity and determinism on random traces") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> start(0.0, 120.0), dur(0.0, 3.0), u(0.0, 1.0);
    std::vector<FlowRecord> flows;
    for (int i = 0; i < 600; ++i)
        flows.push_back(flow(std::round(start(rng) * 1e6) / 1e6, u(rng) < 0.3 ? 0.0 : std::round(dur(rng) * 1e6) / 1e6,
                             u(rng) < 0.1 ? Tag::Botnet : Tag::Normal));

    std::size_t previous = 0;
    for (double size : {60.0, 30.0, 10.0, 1.0, 0.1, 0.01}) {
        const auto windows = build_windows(flows, {size, BackgroundMode::Exclude});
        // Each flow is initiated in exactly one window.
        std::size_t initiated = 0;
        for (const auto& w : windows) {
            for (const auto* f : w.flows) {
                CHECK(member(*f, w.index, size));
                if (f->start_time >= w.start && f->start_time < w.end) ++initiated;
            }
            bool any_attack = false;
            for (const auto* f : w.flows) any_attack |= is_attack(f->tag);
            CHECK(w.label == (any_attack ? 1 : 0));
        }
        CHECK(initiated == flows.size());
        CHECK(windows.size() >= previous);
        previous = windows.size();

        const auto again = build_windows(flows, {size, BackgroundMode::Exclude});
        REQUIRE(again.size() == windows.size());
        for (std::size_t i = 0; i < windows.size(); ++i) {
            CHECK(again[i].index == windows[i].index);
            CHECK(again[i].flows == windows[i].flows);
        }
    }
}

TEST_CASE("background mode names") {
    CHECK(parse_background_mode("exclude") == BackgroundMode::Exclude);
    CHECK(parse_background_mode("non-attack") == BackgroundMode::AsNonAttack);
    CHECK_THROWS_AS(parse_background_mode("drop"), ConfigError);
}
