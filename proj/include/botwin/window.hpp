#pragma once

#include "botwin/flow.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace botwin {

enum class BackgroundMode {
    Exclude,      ///< drop Background flows before window membership
    AsNonAttack,  ///< keep them as ordinary non-attack flows
};

BackgroundMode parse_background_mode(std::string_view s);
std::string_view to_string(BackgroundMode m);

struct WindowSpec {
    double size = 1.0;  // seconds, > 0
    BackgroundMode background = BackgroundMode::Exclude;
};

inline constexpr double kDefaultWindowSizes[] = {0.01, 1.0, 10.0, 30.0, 60.0};

/// Flows active in one tumbling window [start, end).
struct WindowAggregate {
    int scenario_id = 1;
    std::int64_t index = 0;
    double start = 0.0;
    double end = 0.0;
    std::vector<const FlowRecord*> flows;  // non-owning; points into the input sequence
    int label = 0;
};

/// First and last window index overlapped by the flow. A flow joins window i
/// when it starts inside it, or when it starts earlier and is still active
/// strictly after i*size.
struct WindowRange {
    std::int64_t first = 0;
    std::int64_t last = 0;
};

WindowRange window_range(const FlowRecord& flow, double size);
std::vector<std::int64_t> windows_for_flow(const FlowRecord& flow, const WindowSpec& spec);

/// Groups flows into non-empty windows ordered by (scenario_id, index).
/// Windows never mix scenarios. The returned aggregates point into `flows`,
/// which must outlive them. Throws EmptyInputError on an empty sequence.
std::vector<WindowAggregate> build_windows(std::span<const FlowRecord> flows, const WindowSpec& spec);

}  // namespace botwin
