#pragma once

// Symmetric-matrix spectral toolkit: eigendecomposition, generalized powers,
// pseudoinverses, top-k projections and eigengaps.

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace fsir {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Square real matrix stored exactly symmetric.
///
/// Construction symmetrizes as (A + A^T)/2 when the asymmetry is at most
/// 1e-8 relative to the Frobenius norm of A and rejects the input otherwise.
class SymMatrix {
public:
    explicit SymMatrix(Matrix entries);

    static SymMatrix zeros(Index dim);
    static SymMatrix identity(Index dim);

    Index dim() const { return entries_.rows(); }
    const Matrix& matrix() const { return entries_; }
    double operator()(Index i, Index j) const { return entries_(i, j); }

private:
    Matrix entries_;
};

/// Threshold deciding which eigenvalues count as strictly positive.
///
/// An eigenvalue is retained iff it exceeds max(rel_tol * max(lambda_1, 0), abs_floor).
struct RankPolicy {
    double rel_tol = 1e-10;
    double abs_floor = 0.0;

    void validate() const;
    double threshold(double lambda_max) const;
};

/// Eigenvalues (nonincreasing) and orthonormal eigenvectors (columns) of a SymMatrix.
///
/// Each eigenvector is oriented so that its first component of largest
/// magnitude is positive.
struct SpectralDecomp {
    Vector eigenvalues;
    Matrix eigenvectors;
    Index source_dim = 0;

    Index dim() const { return source_dim; }
    double lambda_max() const { return eigenvalues(0); }
    /// Number of eigenvalues that pass the policy threshold.
    Index retained_rank(const RankPolicy& policy = {}) const;
    /// Sum of lambda_j u_j u_j^T over all eigenpairs.
    Matrix reconstruct() const;
};

SpectralDecomp sym_eigendecomp(const SymMatrix& a);

/// +1 or -1 such that sign * v has its first largest-magnitude component positive.
double orientation_sign(const Vector& v);

/// Sum over retained eigenpairs of lambda^alpha u u^T.
SymMatrix generalized_power(const SpectralDecomp& d, double alpha, const RankPolicy& policy = {});

/// Moore-Penrose inverse through the retained range (alpha = -1).
SymMatrix moore_penrose(const SpectralDecomp& d, const RankPolicy& policy = {});

/// (P_k A P_k)^alpha built directly from the decomposition of A: the sum over
/// the first k eigenpairs that are also retained by the policy.
SymMatrix truncated_power(const SpectralDecomp& d, Index k, double alpha,
                          const RankPolicy& policy = {});

/// Orthogonal projector onto the span of the first k eigenvectors.
SymMatrix top_k_projection(const SpectralDecomp& d, Index k);

/// P_k A P_k = sum_{j<=k} lambda_j u_j u_j^T.
SymMatrix truncate_covariance(const SymMatrix& a, Index k, const RankPolicy& policy = {});
SymMatrix truncate_covariance(const SpectralDecomp& d, Index k, const RankPolicy& policy = {});

/// Warning text when the cut after the k-th eigenvalue falls inside a
/// (numerical) tie, i.e. lambda_k - lambda_{k+1} < rel_tol * lambda_1.
std::optional<std::string> eigengap_warning(const SpectralDecomp& d, Index k,
                                            const RankPolicy& policy = {});

/// min |lambda_j - lambda_m| over j with lambda_j != lambda_m (m is 1-based).
double eigengap(const SpectralDecomp& d, Index m);

/// sqrt(tr(A A^T)).
double hs_norm(const Matrix& a);

}  // namespace fsir
