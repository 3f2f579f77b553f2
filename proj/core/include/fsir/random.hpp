#pragma once

#include <cstdint>
#include <random>

namespace fsir {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed for task `task` derived from a base seed: mix64(seed ^ mix64(task)).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task);

/// Seeded generator with platform-stable output.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the C++ standard.
/// Uniforms take the top 53 bits as (k + 0.5) / 2^53, so they lie strictly in
/// (0,1). Normals use the Box-Muller transform, returning the cosine branch
/// first and caching the sine branch for the next call.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace fsir
