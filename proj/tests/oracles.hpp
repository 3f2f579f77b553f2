#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the spectral/sir code paths it is used to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Brownian Gram matrix min(t_i, t_j) on t_j = j / J.
inline MatrixXd brownian_gram(Index grid_size) {
    MatrixXd g(grid_size, grid_size);
    for (Index i = 0; i < grid_size; ++i) {
        for (Index j = 0; j < grid_size; ++j) {
            g(i, j) = static_cast<double>(std::min(i, j) + 1) / static_cast<double>(grid_size);
        }
    }
    return g;
}

/// Dominant eigenvalue by power iteration.
inline double power_iteration(const MatrixXd& a, int iterations = 5000, double tol = 1e-15) {
    VectorXd v = VectorXd::Ones(a.rows()).normalized();
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        VectorXd w = a * v;
        const double next = v.dot(w);
        v = w.normalized();
        if (std::abs(next - lambda) <= tol * std::abs(next)) return next;
        lambda = next;
    }
    return lambda;
}

/// Random PSD matrix of given rank: B B^T with B dim x rank Gaussian.
inline MatrixXd random_psd(Index dim, Index rank, std::mt19937_64& gen) {
    std::normal_distribution<double> z;
    MatrixXd b(dim, rank);
    for (Index i = 0; i < dim; ++i) {
        for (Index j = 0; j < rank; ++j) b(i, j) = z(gen);
    }
    return b * b.transpose();
}

inline VectorXd random_vector(Index dim, std::mt19937_64& gen) {
    std::normal_distribution<double> z;
    VectorXd v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = z(gen);
    return v;
}

/// Largest absolute violation of the four Penrose identities, relative to ||A||.
inline double penrose_violation(const MatrixXd& a, const MatrixXd& g) {
    const double scale_a = std::max(a.norm(), 1e-300);
    const double scale_g = std::max(g.norm(), 1e-300);
    const double e1 = (a * g * a - a).norm() / scale_a;
    const double e2 = (g * a * g - g).norm() / scale_g;
    const double e3 = ((a * g).transpose() - a * g).norm();
    const double e4 = ((g * a).transpose() - g * a).norm();
    return std::max({e1, e2, e3, e4});
}

/// Moore-Penrose inverse from a complete orthogonal decomposition.
inline MatrixXd pinv_cod(const MatrixXd& a, double threshold) {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(a);
    cod.setThreshold(threshold);
    return cod.pseudoInverse();
}

/// min |l_j - l_m| over l_j != l_m by exhaustive scan (m 0-based).
inline double brute_gap(const std::vector<double>& values, std::size_t m) {
    double best = std::numeric_limits<double>::infinity();
    for (double v : values) {
        if (v != values[m]) best = std::min(best, std::abs(v - values[m]));
    }
    return best;
}

/// Principal angle between the lines spanned by a and b, stable for tiny angles.
inline double line_angle(const VectorXd& a, const VectorXd& b) {
    const VectorXd ua = a.normalized();
    const VectorXd ub = b.normalized();
    const double c = std::abs(ua.dot(ub));
    const double s = (ua - ua.dot(ub) * ub).norm();
    return std::atan2(s, c);
}

inline double abs_cos(const VectorXd& a, const VectorXd& b) {
    return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

inline double correlation(const VectorXd& a, const VectorXd& b) {
    const VectorXd ca = a.array() - a.mean();
    const VectorXd cb = b.array() - b.mean();
    return ca.dot(cb) / (ca.norm() * cb.norm());
}

/// Classical multivariate SIR with Cholesky whitening: Z = (X - mean) L^{-T} for
/// Sigma = L L^T (divisor n), equal-count slices of the y-sorted sample, and
/// the top eigenvectors of the weighted slice-mean covariance of Z mapped
/// back by L^{-T}. Returns dim x p directions.
inline MatrixXd classical_sir(const MatrixXd& x, const VectorXd& y, Index slices, Index p) {
    const Index n = x.rows();
    const Index dim = x.cols();
    VectorXd mean = VectorXd::Zero(dim);
    for (Index i = 0; i < n; ++i) mean += x.row(i).transpose();
    mean /= static_cast<double>(n);
    MatrixXd xc(n, dim);
    for (Index i = 0; i < n; ++i) xc.row(i) = x.row(i) - mean.transpose();
    MatrixXd sigma = MatrixXd::Zero(dim, dim);
    for (Index i = 0; i < n; ++i) sigma += xc.row(i).transpose() * xc.row(i);
    sigma /= static_cast<double>(n);
    Eigen::LLT<MatrixXd> llt(sigma);
    const MatrixXd l = llt.matrixL();
    // Z^T = L^{-1} Xc^T
    const MatrixXd z = l.triangularView<Eigen::Lower>().solve(xc.transpose()).transpose();

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return y(a) < y(b); });
    MatrixXd means = MatrixXd::Zero(slices, dim);
    VectorXd counts = VectorXd::Zero(slices);
    for (Index r = 0; r < n; ++r) {
        const Index s = r * slices / n;
        means.row(s) += z.row(order[static_cast<std::size_t>(r)]);
        counts(s) += 1.0;
    }
    MatrixXd m = MatrixXd::Zero(dim, dim);
    for (Index s = 0; s < slices; ++s) {
        const VectorXd hs = means.row(s).transpose() / counts(s);
        m += (counts(s) / static_cast<double>(n)) * hs * hs.transpose();
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    MatrixXd out(dim, p);
    for (Index j = 0; j < p; ++j) {
        const VectorXd eta = es.eigenvectors().col(dim - 1 - j);
        out.col(j) = l.transpose().triangularView<Eigen::Upper>().solve(eta);
    }
    return out;
}

}  // namespace oracle
