#include "botwin/parallel.hpp"

#include "botwin/text.hpp"

#include <cstdlib>

namespace botwin {

unsigned default_jobs() {
    if (const char* env = std::getenv("BOTWIN_JOBS")) {
        if (const auto v = text::parse_int(text::trim(env)); v && *v > 0) return static_cast<unsigned>(*v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace botwin
