#include "botwin/window.hpp"

#include "botwin/error.hpp"
#include "botwin/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace botwin {

BackgroundMode parse_background_mode(std::string_view s) {
    const std::string lower = text::to_lower(text::trim(s));
    if (lower == "exclude") return BackgroundMode::Exclude;
    if (lower == "non-attack" || lower == "asnonattack" || lower == "include") return BackgroundMode::AsNonAttack;
    throw ConfigError("unknown background mode '" + std::string(s) + "' (expected exclude|non-attack)");
}

std::string_view to_string(BackgroundMode m) {
    return m == BackgroundMode::Exclude ? "exclude" : "non-attack";
}

WindowRange window_range(const FlowRecord& flow, double size) {
    if (!(size > 0.0) || !std::isfinite(size)) throw ContractError("window size must be a positive finite number");
    if (flow.start_time < 0.0) throw ContractError("flow start time must be non-negative");

    const double start = flow.start_time;
    auto first = static_cast<std::int64_t>(std::floor(start / size));
    // Division can land one window off near boundaries; settle on the exact products.
    while (static_cast<double>(first) * size > start) --first;
    while (static_cast<double>(first + 1) * size <= start) ++first;

    WindowRange r{first, first};
    if (flow.duration > 0.0) {
        const double end = start + flow.duration;
        auto last = static_cast<std::int64_t>(std::ceil(end / size)) - 1;
        while (last > first && static_cast<double>(last) * size >= end) --last;
        while (static_cast<double>(last + 1) * size < end) ++last;
        r.last = std::max(last, first);
    }
    return r;
}

std::vector<std::int64_t> windows_for_flow(const FlowRecord& flow, const WindowSpec& spec) {
    const WindowRange r = window_range(flow, spec.size);
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(r.last - r.first + 1));
    for (std::int64_t i = r.first; i <= r.last; ++i) out.push_back(i);
    return out;
}

std::vector<WindowAggregate> build_windows(std::span<const FlowRecord> flows, const WindowSpec& spec) {
    if (flows.empty()) throw EmptyInputError("build_windows: no flows");

    struct Membership {
        int scenario;
        std::int64_t index;
        std::size_t flow;
        bool operator<(const Membership& o) const {
            if (scenario != o.scenario) return scenario < o.scenario;
            if (index != o.index) return index < o.index;
            return flow < o.flow;
        }
    };

    std::vector<Membership> members;
    members.reserve(flows.size());
    for (std::size_t f = 0; f < flows.size(); ++f) {
        const FlowRecord& flow = flows[f];
        if (spec.background == BackgroundMode::Exclude && flow.tag == Tag::Background) continue;
        const WindowRange r = window_range(flow, spec.size);
        for (std::int64_t i = r.first; i <= r.last; ++i) members.push_back({flow.scenario_id, i, f});
    }
    std::sort(members.begin(), members.end());

    std::vector<WindowAggregate> windows;
    for (std::size_t m = 0; m < members.size();) {
        WindowAggregate w;
        w.scenario_id = members[m].scenario;
        w.index = members[m].index;
        w.start = static_cast<double>(w.index) * spec.size;
        w.end = static_cast<double>(w.index + 1) * spec.size;
        for (; m < members.size() && members[m].scenario == w.scenario_id && members[m].index == w.index; ++m) {
            const FlowRecord* flow = &flows[members[m].flow];
            w.flows.push_back(flow);
            if (is_attack(flow->tag)) w.label = 1;
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

}  // namespace botwin
