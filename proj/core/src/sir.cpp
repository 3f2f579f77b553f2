#include "fsir/sir.hpp"

#include "fsir/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fsir {

std::vector<Index> canonical_order(const Dataset& d) {
    std::vector<Index> order(static_cast<std::size_t>(d.size()));
    std::iota(order.begin(), order.end(), Index{0});
    const Matrix& x = d.x();
    const Vector& y = d.y();
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (y(a) != y(b)) return y(a) < y(b);
        for (Index j = 0; j < x.cols(); ++j) {
            if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
        }
        return false;
    });
    return order;
}

Dataset::Dataset(Vector grid, Matrix x, Vector y)
    : grid_(std::move(grid)), x_(std::move(x)), y_(std::move(y)) {
    if (x_.rows() < 2) {
        throw DataError("Dataset: need at least 2 observations, got " + std::to_string(x_.rows()));
    }
    if (x_.cols() < 1) throw DataError("Dataset: curves need at least one grid point");
    if (grid_.size() != x_.cols()) {
        throw DataError("Dataset: grid has " + std::to_string(grid_.size()) + " points but curves have " +
                        std::to_string(x_.cols()) + " values");
    }
    if (y_.size() != x_.rows()) {
        throw DataError("Dataset: " + std::to_string(x_.rows()) + " curves but " +
                        std::to_string(y_.size()) + " responses");
    }
    for (Index j = 0; j < grid_.size(); ++j) {
        if (!std::isfinite(grid_(j)) || (j > 0 && !(grid_(j) > grid_(j - 1)))) {
            throw DataError("Dataset: grid not strictly increasing at column " + std::to_string(j + 1));
        }
    }
    for (Index i = 0; i < x_.rows(); ++i) {
        if (!std::isfinite(y_(i))) {
            throw DataError("Dataset: non-finite response at row " + std::to_string(i + 1));
        }
        for (Index j = 0; j < x_.cols(); ++j) {
            if (!std::isfinite(x_(i, j))) {
                throw DataError("Dataset: non-finite curve value at row " + std::to_string(i + 1) +
                                ", column " + std::to_string(j + 1));
            }
        }
    }
}

Dataset Dataset::subset(std::span<const Index> rows) const {
    const auto m = static_cast<Index>(rows.size());
    Matrix x(m, x_.cols());
    Vector y(m);
    for (Index i = 0; i < m; ++i) {
        x.row(i) = x_.row(rows[i]);
        y(i) = y_(rows[i]);
    }
    return Dataset(grid_, std::move(x), std::move(y));
}

Dataset Dataset::with_x(Matrix x) const { return Dataset(grid_, std::move(x), y_); }

CenteredData center(const Dataset& d) {
    Vector mean = d.x().colwise().mean().transpose();
    Matrix centered = d.x().rowwise() - mean.transpose();
    return CenteredData{d.with_x(std::move(centered)), std::move(mean)};
}

SliceAssignment SliceAssignment::single(Index n) {
    SliceAssignment out;
    out.slice_count = 1;
    out.labels.assign(static_cast<std::size_t>(n), 0);
    out.counts = {n};
    return out;
}

SliceAssignment make_slices(const Vector& y, Index slices, const SliceStrategy& strategy) {
    const Index n = y.size();
    if (slices < 2) throw ArgumentError("make_slices: need S >= 2, got " + std::to_string(slices));
    if (slices > n) {
        throw ArgumentError("make_slices: S = " + std::to_string(slices) + " exceeds n = " +
                            std::to_string(n));
    }
    if (!y.allFinite()) throw DataError("make_slices: non-finite response");

    SliceAssignment out;
    out.slice_count = slices;
    out.labels.assign(static_cast<std::size_t>(n), 0);
    out.counts.assign(static_cast<std::size_t>(slices), 0);

    if (std::holds_alternative<EqualFrequency>(strategy)) {
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return y(a) < y(b); });
        bool split_tie = false;
        for (Index r = 0; r < n; ++r) {
            const Index s = r * slices / n;
            out.labels[static_cast<std::size_t>(order[r])] = s;
            ++out.counts[static_cast<std::size_t>(s)];
            if (r > 0 && y(order[r]) == y(order[r - 1]) &&
                out.labels[static_cast<std::size_t>(order[r - 1])] != s) {
                split_tie = true;
            }
        }
        if (split_tie) {
            out.warnings.push_back(
                y.maxCoeff() == y.minCoeff()
                    ? "degenerate response: y is constant, slices are determined by input order only"
                    : "degenerate response: tied y values split across slices by input order");
        }
        return out;
    }

    const auto& cuts = std::get<FixedBoundaries>(strategy).cuts;
    if (static_cast<Index>(cuts.size()) != slices - 1) {
        throw ArgumentError("make_slices: " + std::to_string(slices) + " slices need " +
                            std::to_string(slices - 1) + " cut points, got " +
                            std::to_string(cuts.size()));
    }
    for (std::size_t c = 1; c < cuts.size(); ++c) {
        if (!(cuts[c] > cuts[c - 1])) throw ArgumentError("make_slices: cut points not increasing");
    }
    for (Index i = 0; i < n; ++i) {
        const auto s = static_cast<Index>(std::lower_bound(cuts.begin(), cuts.end(), y(i)) - cuts.begin());
        out.labels[static_cast<std::size_t>(i)] = s;
        ++out.counts[static_cast<std::size_t>(s)];
    }
    for (Index s = 0; s < slices; ++s) {
        if (out.counts[static_cast<std::size_t>(s)] == 0) {
            throw EmptySliceError("make_slices: slice " + std::to_string(s + 1) +
                                  " is empty under the fixed boundaries");
        }
    }
    return out;
}

SymMatrix SliceSummary::between_covariance() const {
    return SymMatrix(h_hat.transpose() * p_hat.asDiagonal() * h_hat);
}

SliceSummary slice_stats(const Dataset& centered, const SliceAssignment& slices) {
    const Index n = centered.size();
    const Index s_count = slices.slice_count;
    if (static_cast<Index>(slices.labels.size()) != n) {
        throw ArgumentError("slice_stats: " + std::to_string(slices.labels.size()) +
                            " slice labels for " + std::to_string(n) + " observations");
    }
    SliceSummary out;
    out.counts.assign(static_cast<std::size_t>(s_count), 0);
    out.h_hat = Matrix::Zero(s_count, centered.grid_size());
    for (Index i = 0; i < n; ++i) {
        const Index s = slices.labels[static_cast<std::size_t>(i)];
        if (s < 0 || s >= s_count) throw ArgumentError("slice_stats: label out of range");
        out.h_hat.row(s) += centered.x().row(i);
        ++out.counts[static_cast<std::size_t>(s)];
    }
    out.p_hat.resize(s_count);
    for (Index s = 0; s < s_count; ++s) {
        const Index c = out.counts[static_cast<std::size_t>(s)];
        if (c == 0) throw EmptySliceError("slice_stats: slice " + std::to_string(s + 1) + " is empty");
        out.h_hat.row(s) /= static_cast<double>(c);
        out.p_hat(s) = static_cast<double>(c) / static_cast<double>(n);
    }
    return out;
}

SymMatrix sample_covariance(const Dataset& centered) {
    const Matrix& x = centered.x();
    return SymMatrix((x.transpose() * x) / static_cast<double>(x.rows()));
}

SirMatrix sir_matrix(const SliceSummary& summary, const SymMatrix& r_hat, Index rank,
                     const RankPolicy& policy) {
    if (summary.h_hat.cols() != r_hat.dim()) {
        throw ArgumentError("sir_matrix: slice means have " + std::to_string(summary.h_hat.cols()) +
                            " columns but R_hat is " + std::to_string(r_hat.dim()) + "-dimensional");
    }
    const SpectralDecomp d = sym_eigendecomp(r_hat);
    if (rank < 1 || rank > d.dim()) {
        throw ArgumentError("sir_matrix: k = " + std::to_string(rank) + " outside [1, " +
                            std::to_string(d.dim()) + "]");
    }
    SirMatrix out{SymMatrix::zeros(d.dim()), std::min(rank, d.retained_rank(policy)), {}};
    if (out.effective_rank < rank) {
        out.warnings.push_back("reduced rank: k = " + std::to_string(rank) +
                               " exceeds the numerical rank of R_hat; using k = " +
                               std::to_string(out.effective_rank));
    }
    if (out.effective_rank == 0) return out;
    if (auto w = eigengap_warning(d, out.effective_rank, policy)) out.warnings.push_back(*w);
    const Matrix whiten = truncated_power(d, rank, -0.5, policy).matrix();
    out.matrix = SymMatrix(whiten * summary.between_covariance().matrix() * whiten);
    return out;
}

SirProblem::SirProblem(const Dataset& d, Index slices, const SliceStrategy& strategy,
                       const RankPolicy& policy)
    : original_(d), policy_(policy), slices_(slices), cov_decomp_() {
    policy_.validate();
    if (d.size() <= slices) {
        throw ArgumentError("fit: need n > S (n = " + std::to_string(d.size()) +
                            ", S = " + std::to_string(slices) + ")");
    }
    const std::vector<Index> order = canonical_order(d);
    CenteredData c = center(d.subset(order));
    mean_ = std::move(c.mean);
    SliceAssignment assignment = make_slices(c.data.y(), slices, strategy);
    warnings_ = assignment.warnings;
    summary_ = slice_stats(c.data, assignment);
    cov_decomp_ = sym_eigendecomp(sample_covariance(c.data));
}

SirFit SirProblem::fit(Index rank, std::optional<Index> directions, bool diagnostics) const {
    const Index grid_size = original_.grid_size();
    if (rank < 1 || rank > grid_size) {
        throw ArgumentError("fit: k = " + std::to_string(rank) + " outside [1, J = " +
                            std::to_string(grid_size) + "]");
    }
    const Index max_dirs = std::min(slices_ - 1, rank);
    const Index p = directions.value_or(max_dirs);
    if (p < 1 || p > max_dirs) {
        throw ArgumentError("fit: p = " + std::to_string(p) + " outside [1, min(S-1, k) = " +
                            std::to_string(max_dirs) + "]");
    }

    SirFit out;
    out.rank = rank;
    out.slices = slices_;
    out.x_mean = mean_;
    out.grid = original_.grid();
    out.warnings = warnings_;

    const SpectralDecomp& d = cov_decomp_;
    const Index retained = d.retained_rank(policy_);
    if (retained == 0) {
        throw NumericalError("fit: sample covariance has numerical rank 0 (all curves equal)");
    }
    out.effective_rank = std::min(rank, retained);
    if (out.effective_rank < rank) {
        out.warnings.push_back("reduced rank: k = " + std::to_string(rank) +
                               " exceeds the numerical rank of R_hat; using k = " +
                               std::to_string(out.effective_rank));
    }
    out.directions = std::min(p, out.effective_rank);
    if (out.directions < p) {
        out.warnings.push_back("directions lowered to " + std::to_string(out.directions) +
                               " by the effective rank");
    }
    if (auto w = eigengap_warning(d, out.effective_rank, policy_)) out.warnings.push_back(*w);

    // M_hat lives in the top-k eigenspace U_k of R_hat. With W = U_k diag(lambda^{-1/2}),
    // M_hat = U_k G U_k^T for G = W^T B W, so eigenpairs (mu, w) of the k x k matrix G give
    // eigenvectors v = U_k w of M_hat and beta = R_k^{-1/2} v = W w.
    const Index k = out.effective_rank;
    const auto u = d.eigenvectors.leftCols(k);
    const Matrix w_mat = u * d.eigenvalues.head(k).cwiseSqrt().cwiseInverse().asDiagonal();
    const Matrix projected = summary_.h_hat * w_mat;
    const SymMatrix g(projected.transpose() * summary_.p_hat.asDiagonal() * projected);
    const SpectralDecomp dg = sym_eigendecomp(g);

    out.sir_eigenvalues = dg.eigenvalues;
    out.beta.resize(grid_size, out.directions);
    for (Index j = 0; j < out.directions; ++j) {
        Vector coeff = dg.eigenvectors.col(j);
        coeff *= orientation_sign(u * coeff);
        out.beta.col(j) = w_mat * coeff;
    }
    out.xi_hat = predict_indices(out, original_.x());

    if (diagnostics) {
        FitDiagnostics& diag = out.diagnostics;
        diag.covariance_eigenvalues = d.eigenvalues;
        const Vector clipped = d.eigenvalues.cwiseMax(0.0);
        const double total = clipped.sum();
        diag.cumulative_variance.resize(clipped.size());
        double running = 0.0;
        for (Index j = 0; j < clipped.size(); ++j) {
            running += clipped(j);
            diag.cumulative_variance(j) = total > 0.0 ? running / total : 0.0;
        }
        try {
            diag.eigengap_ratio = eigengap(d, k) / static_cast<double>(grid_size);
        } catch (const NumericalError&) {
            diag.eigengap_ratio.reset();
        }
        // Suffix sums of u_j^T B u_j / lambda_j over retained j give the whole
        // residual_trace sweep in one pass.
        const Matrix between_u = summary_.between_covariance().matrix() * d.eigenvectors.leftCols(retained);
        diag.residual_trace.resize(retained);
        double tail = 0.0;
        for (Index j = retained - 1; j >= 0; --j) {
            diag.residual_trace(j) = tail;
            tail += d.eigenvectors.col(j).dot(between_u.col(j)) / d.eigenvalues(j);
        }
    }
    return out;
}

SirFit fit(const Dataset& d, const FitOptions& options) {
    return SirProblem(d, options.slices, options.strategy, options.policy)
        .fit(options.rank, options.directions, options.diagnostics);
}

Matrix predict_indices(const SirFit& fit, const Matrix& x_new) {
    const Index grid_size = fit.beta.rows();
    if (x_new.cols() != grid_size) {
        throw ArgumentError("predict_indices: curves have " + std::to_string(x_new.cols()) +
                            " values, fit expects " + std::to_string(grid_size));
    }
    Matrix out(x_new.rows(), fit.beta.cols());
    for (Index i = 0; i < x_new.rows(); ++i) {
        for (Index c = 0; c < fit.beta.cols(); ++c) {
            double acc = 0.0;
            for (Index j = 0; j < grid_size; ++j) acc += (x_new(i, j) - fit.x_mean(j)) * fit.beta(j, c);
            out(i, c) = acc;
        }
    }
    return out;
}

}  // namespace fsir
