#include "fsir/simgen.hpp"

#include "fsir/error.hpp"
#include "fsir/rkhs.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fsir {

namespace {

constexpr double kClipTolerance = 1e-10;

void require_sizes(Index n, double noise_sd, const char* what) {
    if (n < 2) throw ArgumentError(std::string(what) + ": need n >= 2, got " + std::to_string(n));
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
        throw ArgumentError(std::string(what) + ": noise_sd must be finite and nonnegative");
    }
}

void require_unit_grid(const Vector& grid, const char* what) {
    for (Index j = 0; j < grid.size(); ++j) {
        const bool ordered = j == 0 ? grid(j) >= 0.0 : grid(j) > grid(j - 1);
        if (!ordered || grid(j) > 1.0) {
            throw ArgumentError(std::string(what) + ": grid must be increasing in [0,1] (index " +
                                std::to_string(j) + ")");
        }
    }
}

double apply_link(Link link, double xi) {
    switch (link) {
        case Link::identity: return xi;
        case Link::exp: return std::exp(xi);
        case Link::arctan: return std::atan(xi);
    }
    return xi;
}

}  // namespace

Vector unit_grid(Index grid_size) {
    if (grid_size < 1) throw ArgumentError("unit_grid: need J >= 1");
    Vector g(grid_size);
    for (Index j = 0; j < grid_size; ++j) {
        g(j) = static_cast<double>(j + 1) / static_cast<double>(grid_size);
    }
    return g;
}

Vector brownian_path(const Vector& grid, Rng& rng) {
    require_unit_grid(grid, "brownian_path");
    Vector x(grid.size());
    double level = 0.0;
    double previous = 0.0;
    for (Index j = 0; j < grid.size(); ++j) {
        level += std::sqrt(grid(j) - previous) * rng.normal();
        previous = grid(j);
        x(j) = level;
    }
    return x;
}

Vector brownian_path(const Vector& grid, std::uint64_t seed) {
    Rng rng(seed);
    return brownian_path(grid, rng);
}

GaussianSampler::GaussianSampler(const SymMatrix& gram) {
    SpectralDecomp d = sym_eigendecomp(gram);
    const double lmax = std::max(d.lambda_max(), 0.0);
    const double lmin = d.eigenvalues(d.dim() - 1);
    if (lmin < -kClipTolerance * lmax) {
        throw NumericalError("GaussianSampler: Gram matrix is indefinite (min eigenvalue " +
                             std::to_string(lmin) + ", lambda_1 " + std::to_string(lmax) + ")");
    }
    if (lmin < 0.0) {
        warnings_.push_back("GaussianSampler: clipped negative rounding eigenvalue " +
                            std::to_string(lmin) + " to 0");
    }
    const Vector root = d.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    factor_ = d.eigenvectors * root.asDiagonal() * d.eigenvectors.transpose();
}

Vector GaussianSampler::sample(Rng& rng) const {
    Vector z(factor_.cols());
    for (Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
    return factor_ * z;
}

Vector fgp_path(const Vector& grid, double hurst, std::uint64_t seed) {
    require_unit_grid(grid, "fgp_path");
    const GaussianSampler sampler(gram_matrix(KernelSpec::fbm(hurst), grid));
    Rng rng(seed);
    return sampler.sample(rng);
}

SimOutput gen_example1(const Example1Config& config, std::uint64_t seed) {
    require_sizes(config.n, config.noise_sd, "gen_example1");
    const Vector grid = unit_grid(config.grid_size);
    const Index grid_size = config.grid_size;
    Vector beta(grid_size);
    for (Index j = 0; j < grid_size; ++j) {
        beta(j) = config.beta ? config.beta(grid(j)) : std::sin(1.5 * std::numbers::pi * grid(j));
    }

    Rng rng(seed);
    Matrix x(config.n, grid_size);
    Vector y(config.n);
    Matrix xi(config.n, 1);
    for (Index i = 0; i < config.n; ++i) {
        x.row(i) = brownian_path(grid, rng).transpose();
        xi(i, 0) = x.row(i).dot(beta) / static_cast<double>(grid_size);
        y(i) = std::exp(xi(i, 0)) + config.noise_sd * rng.normal();
    }
    return SimOutput{Dataset(grid, std::move(x), std::move(y)), std::move(xi), Matrix(beta), {}};
}

SimOutput gen_example1(Index n, Index grid_size, double noise_sd, std::uint64_t seed) {
    Example1Config config;
    config.n = n;
    config.grid_size = grid_size;
    config.noise_sd = noise_sd;
    return gen_example1(config, seed);
}

SimOutput gen_example2(Index n, std::uint64_t seed, double noise_sd) {
    require_sizes(n, noise_sd, "gen_example2");
    constexpr Index kPoints = 120;
    Vector grid(kPoints);
    for (Index i = 0; i < kPoints; ++i) grid(i) = static_cast<double>(i + 1) / 121.0;
    const GaussianSampler sampler(gram_matrix(KernelSpec::fbm(0.75), grid));

    Rng rng(seed);
    Matrix x(n, kPoints);
    Vector y(n);
    Matrix xi(n, 1);
    for (Index r = 0; r < n; ++r) {
        x.row(r) = sampler.sample(rng).transpose();
        double index = 0.0;
        // Grid column c holds X((c+1)/121).
        for (Index i = 30; i <= 32; ++i) index += x(r, i - 1);
        for (Index i = 90; i <= 92; ++i) index += x(r, i - 1);
        xi(r, 0) = index;
        y(r) = std::atan(index) + noise_sd * rng.normal();
    }
    return SimOutput{Dataset(grid, std::move(x), std::move(y)), std::move(xi), std::nullopt,
                     sampler.warnings()};
}

SimOutput gen_finite_dim(Index n, Index dim, const Vector& beta, Link link, double noise_sd,
                         std::uint64_t seed) {
    require_sizes(n, noise_sd, "gen_finite_dim");
    if (beta.size() != dim) {
        throw ArgumentError("gen_finite_dim: beta has length " + std::to_string(beta.size()) +
                            ", expected " + std::to_string(dim));
    }
    Rng rng(seed);
    Matrix x(n, dim);
    Vector y(n);
    Matrix xi(n, 1);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < dim; ++j) x(i, j) = rng.normal();
        xi(i, 0) = x.row(i).dot(beta);
        y(i) = apply_link(link, xi(i, 0)) + noise_sd * rng.normal();
    }
    return SimOutput{Dataset(unit_grid(dim), std::move(x), std::move(y)), std::move(xi), Matrix(beta), {}};
}

SimOutput gen_null_model(Index n, Index grid_size, double noise_sd, std::uint64_t seed) {
    require_sizes(n, noise_sd, "gen_null_model");
    const Vector grid = unit_grid(grid_size);
    Rng rng(seed);
    Matrix x(n, grid_size);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        x.row(i) = brownian_path(grid, rng).transpose();
        y(i) = noise_sd * rng.normal();
    }
    return SimOutput{Dataset(grid, std::move(x), std::move(y)), Matrix::Zero(n, 0), std::nullopt, {}};
}

double bm_eigenvalue(Index j) {
    if (j < 1) throw ArgumentError("bm_eigenvalue: j must be >= 1");
    const double odd = static_cast<double>(2 * j - 1);
    return 4.0 / (odd * odd * std::numbers::pi * std::numbers::pi);
}

}  // namespace fsir
