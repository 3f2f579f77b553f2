#pragma once

// Sliced inverse regression for curves observed on a shared finite grid.
//
// The estimator truncates the sample covariance to its top-k eigenspace,
// whitens the between-slice covariance with the truncated covariance's
// -1/2 power and maps the leading eigenvectors back to coefficient vectors
// beta acting on the raw curve values.

#include "fsir/spectral.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fsir {

/// n curves on a J-point grid with one response each.
class Dataset {
public:
    Dataset(Vector grid, Matrix x, Vector y);

    const Vector& grid() const { return grid_; }
    /// Row i holds curve i evaluated on the grid.
    const Matrix& x() const { return x_; }
    const Vector& y() const { return y_; }
    Index size() const { return x_.rows(); }
    Index grid_size() const { return x_.cols(); }

    Dataset subset(std::span<const Index> rows) const;
    Dataset with_x(Matrix x) const;

private:
    Vector grid_;
    Matrix x_;
    Vector y_;
};

struct CenteredData {
    Dataset data;
    Vector mean;
};

/// Subtracts the column means.
CenteredData center(const Dataset& d);

struct EqualFrequency {};

/// Interior cut points c_1 < ... < c_{S-1}; slice s collects c_{s-1} < y <= c_s.
struct FixedBoundaries {
    std::vector<double> cuts;
};

using SliceStrategy = std::variant<EqualFrequency, FixedBoundaries>;

struct SliceAssignment {
    Index slice_count = 0;
    std::vector<Index> labels;  // labels[i] in [0, slice_count)
    std::vector<Index> counts;
    std::vector<std::string> warnings;

    /// One slice holding every observation; only meaningful as a diagnostic.
    static SliceAssignment single(Index n);
};

/// Partitions the responses into S slices. Equal-frequency slicing orders
/// by y with ties kept in order of appearance, so slice sizes differ by at most one.
SliceAssignment make_slices(const Vector& y, Index slices, const SliceStrategy& strategy = EqualFrequency{});

struct SliceSummary {
    std::vector<Index> counts;
    Vector p_hat;
    Matrix h_hat;  // S x J, row s is the mean curve of slice s

    /// sum_s p_s h_s h_s^T.
    SymMatrix between_covariance() const;
};

SliceSummary slice_stats(const Dataset& centered, const SliceAssignment& slices);

/// (1/n) sum_i x_i x_i^T of centered curves.
SymMatrix sample_covariance(const Dataset& centered);

struct SirMatrix {
    SymMatrix matrix;
    Index effective_rank = 0;
    std::vector<std::string> warnings;
};

/// R_k^{-1/2} (sum_s p_s h_s h_s^T) R_k^{-1/2}, formed as an explicit J x J matrix.
SirMatrix sir_matrix(const SliceSummary& summary, const SymMatrix& r_hat, Index rank,
                     const RankPolicy& policy = {});

struct FitDiagnostics {
    /// rho_k(R_hat) / J at the effective rank; empty when the gap is undefined.
    std::optional<double> eigengap_ratio;
    Vector covariance_eigenvalues;
    Vector cumulative_variance;
    /// residual_trace(R_hat, between covariance, m) for m = 1..retained rank.
    Vector residual_trace;
};

struct SirFit {
    Index rank = 0;            // requested k
    Index effective_rank = 0;  // k after lowering to the numerical rank of R_hat
    Index slices = 0;
    Index directions = 0;
    Vector sir_eigenvalues;    // nonzero spectrum of M_hat, descending
    Matrix beta;               // J x p
    Matrix xi_hat;             // n x p, in the input row order
    Vector x_mean;
    Vector grid;
    FitDiagnostics diagnostics;
    std::vector<std::string> warnings;
};

struct FitOptions {
    Index slices = 10;
    Index rank = 1;
    std::optional<Index> directions;  // defaults to min(S-1, k)
    RankPolicy policy;
    SliceStrategy strategy = EqualFrequency{};
    bool diagnostics = true;
};

/// Everything in a fit that does not depend on k: centering, slicing, slice
/// statistics and the eigendecomposition of R_hat. Reused across ranks by
/// cross-validation.
///
/// Observations are processed in a canonical order (sorted by y, then by the
/// curve values) so results do not depend on the input row order.
class SirProblem {
public:
    SirProblem(const Dataset& d, Index slices, const SliceStrategy& strategy = EqualFrequency{},
               const RankPolicy& policy = {});

    SirFit fit(Index rank, std::optional<Index> directions = std::nullopt,
               bool diagnostics = true) const;

    const SliceSummary& summary() const { return summary_; }
    const SpectralDecomp& covariance_decomp() const { return cov_decomp_; }
    const Vector& mean() const { return mean_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    Dataset original_;
    RankPolicy policy_;
    Index slices_;
    Vector mean_;
    SliceSummary summary_;
    SpectralDecomp cov_decomp_;
    std::vector<std::string> warnings_;
};

SirFit fit(const Dataset& d, const FitOptions& options);

/// Row order sorted by y, ties broken lexicographically by curve values.
std::vector<Index> canonical_order(const Dataset& d);

/// (x_new - x_mean) * beta, accumulated row by row.
Matrix predict_indices(const SirFit& fit, const Matrix& x_new);

}  // namespace fsir
