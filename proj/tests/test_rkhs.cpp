#include "fsir/error.hpp"
#include "fsir/rkhs.hpp"
#include "oracles.hpp"
#include "rkhs_properties.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fsir;

namespace {

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Index>(values.size()));
    Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

SymMatrix brownian(Index size) { return SymMatrix(oracle::brownian_gram(size)); }

}  // namespace

TEST(GramMatrix, BrownianExample) {
    const SymMatrix g = gram_matrix(KernelSpec::brownian(), vec({0.25, 0.5, 1.0}));
    Matrix expected(3, 3);
    expected << 0.25, 0.25, 0.25, 0.25, 0.5, 0.5, 0.25, 0.5, 1.0;
    EXPECT_EQ(g.matrix(), expected);
}

TEST(GramMatrix, FbmHalfIsBrownian) {
    std::mt19937_64 gen(1);
    const Vector grid = rkhs_props::random_grid(gen, 9);
    const Matrix a = gram_matrix(KernelSpec::fbm(0.5), grid).matrix();
    const Matrix b = gram_matrix(KernelSpec::brownian(), grid).matrix();
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GramMatrix, FbmUnitVariance) {
    EXPECT_DOUBLE_EQ(KernelSpec::fbm(0.75)(1.0, 1.0), 1.0);
    EXPECT_THROW(KernelSpec::fbm(1.0), ArgumentError);
}

TEST(GramMatrix, PsdOnRandomGrids) {
    std::mt19937_64 gen(2);
    for (int n = 0; n < 20; ++n) {
        const auto inst = rkhs_props::random_instance(gen, n);
        const SpectralDecomp d = sym_eigendecomp(inst.gram);
        EXPECT_GE(d.eigenvalues.minCoeff(), -1e-9 * d.lambda_max());
    }
}

TEST(GramMatrix, DomainErrors) {
    const KernelSpec tab = KernelSpec::tabulated(vec({0.1, 0.2}), SymMatrix(Matrix::Identity(2, 2)));
    EXPECT_DOUBLE_EQ(tab(0.2, 0.2), 1.0);
    EXPECT_DOUBLE_EQ(tab(0.1, 0.2), 0.0);
    EXPECT_THROW(tab(0.15, 0.2), DomainError);
    EXPECT_THROW(gram_matrix(tab, vec({0.1, 0.3})), DomainError);
    EXPECT_THROW(KernelSpec::brownian()(-0.1, 0.5), DomainError);
}

TEST(RkhsInner, Examples) {
    const SymMatrix r(vec({2.0, 0.0}).asDiagonal().toDenseMatrix());
    EXPECT_DOUBLE_EQ(rkhs_inner(vec({2.0, 0.0}), vec({4.0, 0.0}), r), 4.0);
    EXPECT_THROW(rkhs_inner(vec({0.0, 1.0}), vec({4.0, 0.0}), r), MembershipError);

    const SymMatrix k = brownian(6);
    EXPECT_NEAR(rkhs_inner(k.matrix().col(1), k.matrix().col(4), k), k(1, 4), 1e-12);
}

TEST(RkhsInner, QuadraticFormOracle) {
    std::mt19937_64 gen(3);
    const SymMatrix r = brownian(8);
    const Vector c = oracle::random_vector(8, gen);
    const Vector f = r.matrix() * c;
    EXPECT_NEAR(rkhs_inner(f, f, r), c.dot(r.matrix() * c), 1e-9);
    EXPECT_GE(rkhs_inner(f, f, r), -1e-9);
    const Vector g = r.matrix() * oracle::random_vector(8, gen);
    EXPECT_NEAR(rkhs_inner(f, g, r), rkhs_inner(g, f, r), 1e-12);
}

TEST(FortetRatio, Examples) {
    const SymMatrix k = brownian(5);
    const Vector e2 = Vector::Unit(5, 2);
    EXPECT_NEAR(fortet_ratio(k.matrix().col(2), k, e2), k(2, 2), 1e-15);
    EXPECT_DOUBLE_EQ(fortet_ratio(Vector::Zero(5), k, Vector::Ones(5)), 0.0);

    const SymMatrix singular(vec({1.0, 0.0}).asDiagonal().toDenseMatrix());
    EXPECT_THROW(fortet_ratio(vec({1.0, 0.0}), singular, vec({0.0, 1.0})), ArgumentError);
}

TEST(FortetRatio, NeverExceedsQuadraticForm) {
    std::mt19937_64 gen(4);
    const SymMatrix k = brownian(6);
    const Vector c = oracle::random_vector(6, gen);
    const Vector f = k.matrix() * c;
    const double bound = c.dot(k.matrix() * c);
    const double lmax = sym_eigendecomp(k).lambda_max();
    double best = 0.0;
    for (int i = 0; i < 100000; ++i) {
        best = std::max(best, fortet_ratio(f, k, rkhs_props::unit_vector(gen, 6), lmax));
    }
    EXPECT_LE(best, bound + 1e-9);
    EXPECT_NEAR(fortet_ratio(f, k, c, lmax), bound, 1e-9 * bound);
}

TEST(FortetNormSq, Examples) {
    std::mt19937_64 gen(5);
    const SymMatrix k = brownian(6);
    const Vector c = oracle::random_vector(6, gen);
    EXPECT_NEAR(fortet_norm_sq(k.matrix() * c, k), c.dot(k.matrix() * c), 1e-9);

    const Vector f = oracle::random_vector(4, gen);
    EXPECT_NEAR(fortet_norm_sq(f, SymMatrix::identity(4)), f.squaredNorm(), 1e-12);
}

TEST(FortetNormSq, RandomSearchApproachesFromBelow) {
    std::mt19937_64 gen(6);
    const SymMatrix k = brownian(6);
    const Vector f = k.matrix() * oracle::random_vector(6, gen);
    const double target = fortet_norm_sq(f, k);
    const double lmax = sym_eigendecomp(k).lambda_max();
    double best = fortet_ratio(f, k, moore_penrose(sym_eigendecomp(k)).matrix() * f, lmax);
    for (int i = 0; i < 100000; ++i) {
        best = std::max(best, fortet_ratio(f, k, rkhs_props::unit_vector(gen, 6), lmax));
    }
    EXPECT_LE(best, target + 1e-9);
    EXPECT_GE(best, 0.99 * target);
}

TEST(DominanceTrace, Examples) {
    const SymMatrix k = brownian(7);
    EXPECT_NEAR(dominance_trace(k, k).value, 7.0, 1e-9);
    EXPECT_TRUE(dominance_trace(k, k).warnings.empty());
    EXPECT_DOUBLE_EQ(dominance_trace(SymMatrix::zeros(7), k).value, 0.0);
    EXPECT_FALSE(dominance_trace(SymMatrix(2.0 * k.matrix()), k).warnings.empty());
    EXPECT_THROW(dominance_trace(brownian(3), k), ArgumentError);
}

TEST(DominanceTrace, NestedGridsRankOne) {
    // Largest grid j/12; K1 = h h^T with h = K2 c; the trace is h^T K2^- h on each prefix grid.
    std::mt19937_64 gen(7);
    const SymMatrix k = brownian(12);
    const Vector c = oracle::random_vector(12, gen);
    const Vector h = k.matrix() * c;
    double previous = 0.0;
    for (Index m = 1; m <= 12; ++m) {
        std::vector<Index> sub(static_cast<std::size_t>(m));
        std::iota(sub.begin(), sub.end(), Index{0});
        const Vector hm = h.head(m);
        const double t = dominance_trace(SymMatrix(hm * hm.transpose()), restrict_to(k, sub)).value;
        EXPECT_GE(t, previous - 1e-9);
        previous = t;
    }
    EXPECT_NEAR(previous, c.dot(k.matrix() * c), 1e-8 * std::max(1.0, previous));
}

TEST(ResidualTrace, Examples) {
    const SymMatrix r = brownian(10);
    const SymMatrix k(0.3 * r.matrix());
    EXPECT_NEAR(residual_trace(r, k, 10), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(residual_trace(r, SymMatrix::zeros(10), 4), 0.0);
    EXPECT_THROW(residual_trace(r, SymMatrix::zeros(3), 1), ArgumentError);
}

TEST(ResidualTrace, RankOneAlignedKernelVanishesAtKOne) {
    const SymMatrix r = brownian(10);
    const SpectralDecomp d = sym_eigendecomp(r);
    const Vector u1 = d.eigenvectors.col(0);
    const SymMatrix k(d.lambda_max() * u1 * u1.transpose());
    EXPECT_NEAR(residual_trace(r, k, 1), 0.0, 1e-10);
    EXPECT_NEAR(residual_trace(d, k, 1), 0.0, 1e-10);
    // k = 0 would give lambda_1^{-1} * lambda_1 = 1; the full-inverse trace equals 1.
    EXPECT_NEAR((moore_penrose(d).matrix() * k.matrix()).trace(), 1.0, 1e-9);
}

TEST(ResidualTrace, RoutesAgree) {
    std::mt19937_64 gen(8);
    const SymMatrix r(oracle::random_psd(9, 7, gen));
    const SymMatrix k(oracle::random_psd(9, 3, gen));
    const SpectralDecomp d = sym_eigendecomp(r);
    for (Index m = 1; m <= 9; ++m) {
        const double literal = residual_trace(r, k, m);
        EXPECT_NEAR(residual_trace(d, k, m), literal, 1e-8 * std::max(1.0, std::abs(literal)));
    }
}

TEST(LoeveCoefficients, Examples) {
    const SymMatrix r = brownian(8);
    const Vector c = loeve_coefficients(r.matrix().col(3), r);
    EXPECT_LE((c - Vector::Unit(8, 3)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(loeve_coefficients(Vector::Zero(8), r), Vector::Zero(8));

    std::mt19937_64 gen(9);
    const Vector c0 = oracle::random_vector(8, gen);
    const Vector f = r.matrix() * c0;
    const Vector back = loeve_coefficients(f, r);
    EXPECT_LE((back - c0).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((r.matrix() * back - f).norm(), 1e-6 * f.norm());
    EXPECT_NEAR(back.dot(r.matrix() * back), fortet_norm_sq(f, r), 1e-9);

    const SymMatrix singular(vec({1.0, 0.0}).asDiagonal().toDenseMatrix());
    EXPECT_THROW(loeve_coefficients(vec({0.0, 1.0}), singular), MembershipError);
}

TEST(RkhsProject, Examples) {
    std::mt19937_64 gen(10);
    const SymMatrix r = brownian(8);
    const Vector c0 = oracle::random_vector(8, gen);
    EXPECT_LE((rkhs_project(r.matrix() * c0, r, 8) - c0).cwiseAbs().maxCoeff(), 1e-8);

    const SpectralDecomp d = sym_eigendecomp(r);
    const Index k = 3;
    const Vector f = d.eigenvalues(k) * d.eigenvectors.col(k);
    const Vector projected = r.matrix() * rkhs_project(f, r, k);
    EXPECT_LE((d.eigenvectors.leftCols(k).transpose() * projected).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_THROW(rkhs_project(Vector::Zero(3), r, 2), ArgumentError);
}

TEST(RkhsProject, MatchesLeastSquaresInRkhsMetric) {
    std::mt19937_64 gen(11);
    const SymMatrix r = brownian(10);
    const SpectralDecomp d = sym_eigendecomp(r);
    const Vector f = r.matrix() * oracle::random_vector(10, gen);

    // argmin_z (f - Bz)^T R^+ (f - Bz) over B = [R u1, R u2, R u3], with R^+ from an
    // orthogonal decomposition.
    const Matrix metric = oracle::pinv_cod(r.matrix(), 1e-12);
    const Matrix b = r.matrix() * d.eigenvectors.leftCols(3);
    const Vector z = (b.transpose() * metric * b).ldlt().solve(b.transpose() * metric * f);
    const Vector ls_residual = f - b * z;

    const Vector residual = f - r.matrix() * rkhs_project(f, r, 3);
    EXPECT_NEAR(std::sqrt(residual.dot(metric * residual)),
                std::sqrt(ls_residual.dot(metric * ls_residual)), 1e-8);
    EXPECT_LE((residual - ls_residual).norm(), 1e-8 * f.norm());
}

class RkhsProperty : public ::testing::TestWithParam<int> {};

TEST_P(RkhsProperty, HoldsOnRandomInstances) {
    const auto checks = rkhs_props::all();
    const auto result = checks[static_cast<std::size_t>(GetParam())](10, 1000 + GetParam());
    EXPECT_TRUE(result.ok()) << result.name << ": " << result.failures << " failures, worst " << result.worst;
}

INSTANTIATE_TEST_SUITE_P(AllIdentities, RkhsProperty, ::testing::Range(0, 8));
