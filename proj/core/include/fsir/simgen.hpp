#pragma once

// Seeded generators for the simulation designs: Brownian and fractional
// Gaussian curves, the two functional single-index models, a finite-dimensional
// single-index baseline and a null model with independent responses.

#include "fsir/random.hpp"
#include "fsir/sir.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fsir {

enum class Link { identity, exp, arctan };

struct SimOutput {
    Dataset dataset;
    Matrix xi_true;                   // n x p_true
    std::optional<Matrix> beta_true;  // J x p_true discretized representers, when one exists
    std::vector<std::string> warnings;
};

/// t_j = j / J for j = 1..J.
Vector unit_grid(Index grid_size);

/// Brownian motion on an increasing grid in [0,1] by cumulative independent
/// increments (the first increment runs from 0 to t_1).
Vector brownian_path(const Vector& grid, Rng& rng);
Vector brownian_path(const Vector& grid, std::uint64_t seed);

/// Draws N(0, G) vectors through the symmetric square root U diag(sqrt(lambda)) U^T.
/// Eigenvalues in [-1e-10 lambda_1, 0) are clipped with a warning; anything
/// more negative is a NumericalError.
class GaussianSampler {
public:
    explicit GaussianSampler(const SymMatrix& gram);

    Vector sample(Rng& rng) const;
    const Matrix& factor() const { return factor_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    Matrix factor_;
    std::vector<std::string> warnings_;
};

/// Fractional Gaussian process with covariance (s^{2H} + t^{2H} - |s-t|^{2H}) / 2.
Vector fgp_path(const Vector& grid, double hurst, std::uint64_t seed);

struct Example1Config {
    Index n = 100;
    Index grid_size = 100;
    double noise_sd = 0.3;
    std::function<double(double)> beta;  // empty means sin(3 pi s / 2)
};

/// Brownian curves on t_j = j/J; xi = (1/J) sum_j beta(t_j) X(t_j); y = exp(xi) + eps.
SimOutput gen_example1(const Example1Config& config, std::uint64_t seed);
SimOutput gen_example1(Index n, Index grid_size, double noise_sd, std::uint64_t seed);

/// fGp(H = 0.75) curves on t_i = i/121, i = 1..120;
/// xi = sum_{i=30..32} X(i/121) + sum_{i=90..92} X(i/121); y = atan(xi) + eps.
SimOutput gen_example2(Index n, std::uint64_t seed, double noise_sd = 0.3);

/// Standard Gaussian vectors in R^dim (grid j/dim); xi = X beta; y = link(xi) + eps.
SimOutput gen_finite_dim(Index n, Index dim, const Vector& beta, Link link, double noise_sd,
                         std::uint64_t seed);

/// Brownian curves with y ~ N(0, noise_sd^2) independent of X.
SimOutput gen_null_model(Index n, Index grid_size, double noise_sd, std::uint64_t seed);

/// j-th eigenvalue of the Brownian covariance operator on L2[0,1]: 4 / ((2j-1)^2 pi^2).
double bm_eigenvalue(Index j);

}  // namespace fsir
