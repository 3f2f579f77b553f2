#include "fsir/rkhs.hpp"

#include "fsir/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fsir {

namespace {

constexpr double kMembershipTolerance = 1e-6;
constexpr double kDenominatorTolerance = 1e-14;
constexpr double kDominanceTolerance = 1e-9;

void require_dim(Index got, Index want, const char* what) {
    if (got != want) {
        throw ArgumentError(std::string(what) + ": dimension mismatch (" + std::to_string(got) +
                            " vs " + std::to_string(want) + ")");
    }
}

void require_member(const Vector& f, const SpectralDecomp& d, const RankPolicy& policy,
                    const char* what) {
    const double res = range_residual(f, d, policy);
    if (res > kMembershipTolerance) {
        throw MembershipError(std::string(what) + ": vector lies outside the range of the kernel " +
                              "matrix (relative residual " + std::to_string(res) + ")");
    }
}

double check_domain(double t, const char* kernel) {
    if (!std::isfinite(t) || t < 0.0) {
        throw DomainError(std::string(kernel) + " kernel: point " + std::to_string(t) +
                          " outside [0, inf)");
    }
    return t;
}

Index tabulated_index(const Vector& grid, double t) {
    const double* begin = grid.data();
    const double* end = begin + grid.size();
    const double* it = std::lower_bound(begin, end, t);
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    for (const double* c : {it, it == begin ? it : it - 1}) {
        if (c != end && std::abs(*c - t) <= tol) return c - begin;
    }
    throw DomainError("tabulated kernel: point " + std::to_string(t) + " is not a grid point");
}

}  // namespace

KernelSpec KernelSpec::brownian() { return KernelSpec(BrownianKernel{}); }

KernelSpec KernelSpec::fbm(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
        throw ArgumentError("fbm kernel: H must lie in (0,1), got " + std::to_string(hurst));
    }
    return KernelSpec(FractionalBrownianKernel{hurst});
}

KernelSpec KernelSpec::tabulated(Vector grid, SymMatrix gram) {
    require_dim(grid.size(), gram.dim(), "tabulated kernel");
    for (Index i = 1; i < grid.size(); ++i) {
        if (!(grid(i) > grid(i - 1))) {
            throw DataError("tabulated kernel: grid not strictly increasing at index " +
                            std::to_string(i));
        }
    }
    return KernelSpec(TabulatedKernel{std::move(grid), std::move(gram)});
}

double KernelSpec::operator()(double s, double t) const {
    struct Visitor {
        double s, t;
        double operator()(const BrownianKernel&) const {
            return std::min(check_domain(s, "brownian"), check_domain(t, "brownian"));
        }
        double operator()(const FractionalBrownianKernel& k) const {
            check_domain(s, "fbm");
            check_domain(t, "fbm");
            const double e = 2.0 * k.hurst;
            return 0.5 * (std::pow(s, e) + std::pow(t, e) - std::pow(std::abs(s - t), e));
        }
        double operator()(const TabulatedKernel& k) const {
            return k.gram(tabulated_index(k.grid, s), tabulated_index(k.grid, t));
        }
    };
    return std::visit(Visitor{s, t}, kind_);
}

std::string KernelSpec::name() const {
    struct Visitor {
        std::string operator()(const BrownianKernel&) const { return "brownian"; }
        std::string operator()(const FractionalBrownianKernel& k) const {
            return "fbm(H=" + std::to_string(k.hurst) + ")";
        }
        std::string operator()(const TabulatedKernel& k) const {
            return "tabulated(J=" + std::to_string(k.grid.size()) + ")";
        }
    };
    return std::visit(Visitor{}, kind_);
}

GridFunction::GridFunction(Vector g, Vector v) : grid(std::move(g)), values(std::move(v)) {
    require_dim(values.size(), grid.size(), "GridFunction");
    for (Index i = 1; i < grid.size(); ++i) {
        if (!(grid(i) > grid(i - 1))) {
            throw DataError("GridFunction: grid not strictly increasing at index " +
                            std::to_string(i));
        }
    }
}

GridFunction GridFunction::restrict_to(std::span<const Index> indices) const {
    Vector g(static_cast<Index>(indices.size()));
    Vector v(g.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        g(static_cast<Index>(i)) = grid(indices[i]);
        v(static_cast<Index>(i)) = values(indices[i]);
    }
    return GridFunction(std::move(g), std::move(v));
}

SymMatrix restrict_to(const SymMatrix& k, std::span<const Index> indices) {
    const auto m = static_cast<Index>(indices.size());
    Matrix out(m, m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) out(i, j) = k(indices[i], indices[j]);
    }
    return SymMatrix(std::move(out));
}

SymMatrix gram_matrix(const KernelSpec& kernel, const Vector& grid) {
    const Index n = grid.size();
    Matrix g(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j <= i; ++j) {
            g(i, j) = kernel(grid(i), grid(j));
            g(j, i) = g(i, j);
        }
    }
    return SymMatrix(std::move(g));
}

double range_residual(const Vector& f, const SpectralDecomp& dk, const RankPolicy& policy) {
    require_dim(f.size(), dk.dim(), "range_residual");
    const double fn = f.norm();
    if (fn == 0.0) return 0.0;
    const auto u = dk.eigenvectors.leftCols(dk.retained_rank(policy));
    const Vector residual = f - u * (u.transpose() * f);
    return residual.norm() / fn;
}

double rkhs_inner(const Vector& f, const Vector& g, const SymMatrix& r, const RankPolicy& policy) {
    require_dim(f.size(), r.dim(), "rkhs_inner");
    require_dim(g.size(), r.dim(), "rkhs_inner");
    const SpectralDecomp d = sym_eigendecomp(r);
    require_member(f, d, policy, "rkhs_inner");
    require_member(g, d, policy, "rkhs_inner");
    return f.dot(moore_penrose(d, policy).matrix() * g);
}

double fortet_ratio(const Vector& f, const SymMatrix& k, const Vector& a, double lambda_max) {
    require_dim(f.size(), k.dim(), "fortet_ratio");
    require_dim(a.size(), k.dim(), "fortet_ratio");
    const double denom = a.dot(k.matrix() * a);
    if (!(denom > kDenominatorTolerance * a.squaredNorm() * lambda_max)) {
        throw ArgumentError("fortet_ratio: a^T K a = " + std::to_string(denom) +
                            " vanishes; direction is degenerate");
    }
    const double num = a.dot(f);
    return num * num / denom;
}

double fortet_ratio(const Vector& f, const SymMatrix& k, const Vector& a) {
    return fortet_ratio(f, k, a, sym_eigendecomp(k).lambda_max());
}

double fortet_norm_sq(const Vector& f, const SymMatrix& k, const RankPolicy& policy) {
    require_dim(f.size(), k.dim(), "fortet_norm_sq");
    const SpectralDecomp d = sym_eigendecomp(k);
    require_member(f, d, policy, "fortet_norm_sq");
    return f.dot(moore_penrose(d, policy).matrix() * f);
}

DominanceTrace dominance_trace(const SymMatrix& k1, const SymMatrix& k2, const RankPolicy& policy) {
    require_dim(k1.dim(), k2.dim(), "dominance_trace");
    const SpectralDecomp d2 = sym_eigendecomp(k2);
    DominanceTrace out;
    out.value = (k1.matrix() * moore_penrose(d2, policy).matrix()).trace();

    const SpectralDecomp diff = sym_eigendecomp(SymMatrix(k2.matrix() - k1.matrix()));
    const double scale = std::max({std::abs(d2.lambda_max()), k1.matrix().cwiseAbs().maxCoeff(),
                                   std::numeric_limits<double>::min()});
    const double min_eig = diff.eigenvalues(diff.eigenvalues.size() - 1);
    if (min_eig < -kDominanceTolerance * scale) {
        out.warnings.push_back("K2 - K1 is not PSD (min eigenvalue " + std::to_string(min_eig) +
                               "); dominance bound tr <= rank(K2) does not apply");
    }
    return out;
}

double residual_trace(const SymMatrix& r, const SymMatrix& k, Index rank, const RankPolicy& policy) {
    require_dim(k.dim(), r.dim(), "residual_trace");
    const SpectralDecomp d = sym_eigendecomp(r);
    const Matrix full = moore_penrose(d, policy).matrix();
    const Matrix truncated_inv = moore_penrose(sym_eigendecomp(truncate_covariance(d, rank, policy)),
                                               policy).matrix();
    return ((full - truncated_inv) * k.matrix()).trace();
}

double residual_trace(const SpectralDecomp& dr, const SymMatrix& k, Index rank,
                      const RankPolicy& policy) {
    require_dim(k.dim(), dr.dim(), "residual_trace");
    if (rank < 1 || rank > dr.dim()) {
        throw ArgumentError("residual_trace: k = " + std::to_string(rank) + " outside [1, " +
                            std::to_string(dr.dim()) + "]");
    }
    const Index r = dr.retained_rank(policy);
    double sum = 0.0;
    for (Index j = rank; j < r; ++j) {
        const auto u = dr.eigenvectors.col(j);
        sum += u.dot(k.matrix() * u) / dr.eigenvalues(j);
    }
    return sum;
}

Vector loeve_coefficients(const Vector& f, const SymMatrix& r, const RankPolicy& policy) {
    require_dim(f.size(), r.dim(), "loeve_coefficients");
    const SpectralDecomp d = sym_eigendecomp(r);
    require_member(f, d, policy, "loeve_coefficients");
    return moore_penrose(d, policy).matrix() * f;
}

Vector rkhs_project(const Vector& f, const SymMatrix& r, Index rank, const RankPolicy& policy) {
    require_dim(f.size(), r.dim(), "rkhs_project");
    return truncated_power(sym_eigendecomp(r), rank, -1.0, policy).matrix() * f;
}

}  // namespace fsir
