#include "fsir/random.hpp"

#include <cmath>
#include <numbers>

namespace fsir {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task) { return mix64(seed ^ mix64(task)); }

double Rng::uniform() {
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    return (static_cast<double>(engine_() >> 11) + 0.5) * scale;
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) return 0;
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = (~std::uint64_t{0} - bound + 1) % bound;
    for (;;) {
        const std::uint64_t r = engine_();
        if (r >= limit) return r % bound;
    }
}

}  // namespace fsir
