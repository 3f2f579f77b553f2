#pragma once

// Finite-grid RKHS primitives. Everything here works with the restriction of a
// kernel to a finite grid, where the RKHS norm of f reduces to f^T K^- f.

#include "fsir/spectral.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fsir {

/// K(s,t) = min(s,t) on [0, inf).
struct BrownianKernel {};

/// K(s,t) = (s^{2H} + t^{2H} - |s-t|^{2H}) / 2 on [0, inf).
struct FractionalBrownianKernel {
    double hurst = 0.5;
};

/// Kernel known only at grid pairs.
struct TabulatedKernel {
    Vector grid;
    SymMatrix gram;
};

class KernelSpec {
public:
    static KernelSpec brownian();
    static KernelSpec fbm(double hurst);
    static KernelSpec tabulated(Vector grid, SymMatrix gram);

    /// Throws DomainError for points outside the kernel's domain.
    double operator()(double s, double t) const;
    std::string name() const;

private:
    using Kind = std::variant<BrownianKernel, FractionalBrownianKernel, TabulatedKernel>;
    explicit KernelSpec(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

/// Values of a function on a strictly increasing grid.
struct GridFunction {
    GridFunction(Vector grid, Vector values);

    GridFunction restrict_to(std::span<const Index> indices) const;

    Vector grid;
    Vector values;
};

/// Sub-matrix on the selected rows and columns (K restricted to a sub-grid).
SymMatrix restrict_to(const SymMatrix& k, std::span<const Index> indices);

SymMatrix gram_matrix(const KernelSpec& kernel, const Vector& grid);

/// ||(I - K K^-) f|| / ||f||, zero for f = 0.
double range_residual(const Vector& f, const SpectralDecomp& dk, const RankPolicy& policy = {});

/// f^T R^- g; both arguments must lie in Im(R).
double rkhs_inner(const Vector& f, const Vector& g, const SymMatrix& r,
                  const RankPolicy& policy = {});

/// |a^T f|^2 / (a^T K a).
double fortet_ratio(const Vector& f, const SymMatrix& k, const Vector& a);
/// Same, with lambda_1(K) supplied so repeated evaluation skips the eigensolve.
double fortet_ratio(const Vector& f, const SymMatrix& k, const Vector& a, double lambda_max);

/// Closed-form supremum of fortet_ratio on the grid: f^T K^- f.
double fortet_norm_sq(const Vector& f, const SymMatrix& k, const RankPolicy& policy = {});

struct DominanceTrace {
    double value = 0.0;
    std::vector<std::string> warnings;
};

/// tr(K1 K2^-); warns when K2 - K1 is not PSD.
DominanceTrace dominance_trace(const SymMatrix& k1, const SymMatrix& k2,
                               const RankPolicy& policy = {});

/// tr((R^- - R_k^-) K) formed from explicit matrices.
double residual_trace(const SymMatrix& r, const SymMatrix& k, Index rank,
                      const RankPolicy& policy = {});
/// Same quantity as sum_{j>rank, retained} u_j^T K u_j / lambda_j.
double residual_trace(const SpectralDecomp& dr, const SymMatrix& k, Index rank,
                      const RankPolicy& policy = {});

/// c = R^- f, so the Loeve preimage of f is c^T X.
Vector loeve_coefficients(const Vector& f, const SymMatrix& r, const RankPolicy& policy = {});

/// c = R_k^- f; R c is the RKHS projection of f onto the top-k eigenspace.
Vector rkhs_project(const Vector& f, const SymMatrix& r, Index rank,
                    const RankPolicy& policy = {});

}  // namespace fsir
