#include "fsir/spectral.hpp"

#include "fsir/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fsir {

namespace {

constexpr double kSymmetryTolerance = 1e-8;

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw DataError(std::string(what) + ": matrix has non-finite entries");
    }
}

void require_rank_index(const SpectralDecomp& d, Index k, const char* what) {
    if (k < 1 || k > d.dim()) {
        throw ArgumentError(std::string(what) + ": k = " + std::to_string(k) +
                            " outside [1, " + std::to_string(d.dim()) + "]");
    }
}

}  // namespace

double orientation_sign(const Vector& v) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > best) {
            best = std::abs(v(i));
            arg = i;
        }
    }
    return v.size() > 0 && v(arg) < 0.0 ? -1.0 : 1.0;
}

SymMatrix::SymMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.rows() != entries_.cols()) {
        throw ArgumentError("SymMatrix: expected a nonempty square matrix, got " +
                            std::to_string(entries_.rows()) + "x" +
                            std::to_string(entries_.cols()));
    }
    require_finite(entries_, "SymMatrix");
    const double asym = (entries_ - entries_.transpose()).norm();
    const double scale = entries_.norm();
    if (asym > kSymmetryTolerance * scale) {
        throw DataError("SymMatrix: relative asymmetry " + std::to_string(asym / scale) +
                        " exceeds 1e-8");
    }
    // Entrywise (a_ij + a_ji)/2 is bit-identical for (i,j) and (j,i).
    Matrix sym = 0.5 * (entries_ + entries_.transpose());
    entries_ = std::move(sym);
}

SymMatrix SymMatrix::zeros(Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::identity(Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

void RankPolicy::validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
        throw ArgumentError("RankPolicy: rel_tol must lie in (0,1), got " + std::to_string(rel_tol));
    }
    if (!(abs_floor >= 0.0) || !std::isfinite(abs_floor)) {
        throw ArgumentError("RankPolicy: abs_floor must be finite and nonnegative");
    }
}

double RankPolicy::threshold(double lambda_max) const {
    return std::max(rel_tol * std::max(lambda_max, 0.0), abs_floor);
}

Index SpectralDecomp::retained_rank(const RankPolicy& policy) const {
    policy.validate();
    const double cut = policy.threshold(lambda_max());
    Index r = 0;
    while (r < eigenvalues.size() && eigenvalues(r) > cut) ++r;
    return r;
}

Matrix SpectralDecomp::reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

SpectralDecomp sym_eigendecomp(const SymMatrix& a) {
    const Index n = a.dim();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("sym_eigendecomp: eigensolver failed to converge on a " +
                             std::to_string(n) + "x" + std::to_string(n) + " matrix");
    }
    SpectralDecomp d;
    d.source_dim = n;
    d.eigenvalues = solver.eigenvalues().reverse();
    d.eigenvectors = solver.eigenvectors().rowwise().reverse();
    for (Index j = 0; j < n; ++j) {
        d.eigenvectors.col(j) *= orientation_sign(d.eigenvectors.col(j));
    }
    return d;
}

SymMatrix truncated_power(const SpectralDecomp& d, Index k, double alpha,
                          const RankPolicy& policy) {
    require_rank_index(d, k, "truncated_power");
    if (!std::isfinite(alpha)) throw ArgumentError("truncated_power: alpha must be finite");
    const Index r = std::min(k, d.retained_rank(policy));
    Matrix out = Matrix::Zero(d.dim(), d.dim());
    if (r > 0) {
        Vector powered(r);
        for (Index j = 0; j < r; ++j) powered(j) = std::pow(d.eigenvalues(j), alpha);
        const auto u = d.eigenvectors.leftCols(r);
        out = u * powered.asDiagonal() * u.transpose();
    }
    return SymMatrix(std::move(out));
}

SymMatrix generalized_power(const SpectralDecomp& d, double alpha, const RankPolicy& policy) {
    return truncated_power(d, d.dim(), alpha, policy);
}

SymMatrix moore_penrose(const SpectralDecomp& d, const RankPolicy& policy) {
    return generalized_power(d, -1.0, policy);
}

SymMatrix top_k_projection(const SpectralDecomp& d, Index k) {
    require_rank_index(d, k, "top_k_projection");
    const auto u = d.eigenvectors.leftCols(k);
    return SymMatrix(u * u.transpose());
}

SymMatrix truncate_covariance(const SpectralDecomp& d, Index k, const RankPolicy& policy) {
    require_rank_index(d, k, "truncate_covariance");
    // Non-retained eigenvalues are rounding noise of a PSD input; dropping them keeps the result PSD.
    const Index r = std::min(k, d.retained_rank(policy));
    Matrix out = Matrix::Zero(d.dim(), d.dim());
    if (r > 0) {
        const auto u = d.eigenvectors.leftCols(r);
        out = u * d.eigenvalues.head(r).asDiagonal() * u.transpose();
    }
    return SymMatrix(std::move(out));
}

SymMatrix truncate_covariance(const SymMatrix& a, Index k, const RankPolicy& policy) {
    return truncate_covariance(sym_eigendecomp(a), k, policy);
}

std::optional<std::string> eigengap_warning(const SpectralDecomp& d, Index k,
                                            const RankPolicy& policy) {
    require_rank_index(d, k, "eigengap_warning");
    if (k == d.dim()) return std::nullopt;
    const double gap = d.eigenvalues(k - 1) - d.eigenvalues(k);
    if (gap < policy.rel_tol * std::abs(d.lambda_max())) {
        return "eigenvalue tie at the rank-" + std::to_string(k) +
               " cut: lambda_k - lambda_{k+1} = " + std::to_string(gap) +
               "; the top-k eigenspace is not uniquely determined";
    }
    return std::nullopt;
}

double eigengap(const SpectralDecomp& d, Index m) {
    if (m < 1 || m > d.dim()) {
        throw ArgumentError("eigengap: m = " + std::to_string(m) + " outside [1, " +
                            std::to_string(d.dim()) + "]");
    }
    const double lm = d.eigenvalues(m - 1);
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < d.eigenvalues.size(); ++j) {
        const double lj = d.eigenvalues(j);
        if (lj != lm) best = std::min(best, std::abs(lj - lm));
    }
    if (!std::isfinite(best)) {
        throw NumericalError("eigengap: all eigenvalues are equal, gap undefined");
    }
    return best;
}

double hs_norm(const Matrix& a) { return a.norm(); }

}  // namespace fsir
