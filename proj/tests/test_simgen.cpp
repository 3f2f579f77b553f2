#include "fsir/error.hpp"
#include "fsir/rkhs.hpp"
#include "fsir/simgen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fsir;

namespace {

constexpr int kPaths = 100000;

}  // namespace

TEST(Rng, DeterministicAndInRange) {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(Rng, NormalMoments) {
    Rng rng(5);
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < kPaths; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / kPaths;
    const double var = sq / kPaths - mean * mean;
    EXPECT_NEAR(mean, 0.0, 3.0 / std::sqrt(kPaths));
    EXPECT_NEAR(var, 1.0, 3.0 * std::sqrt(2.0 / kPaths));
}

TEST(Rng, BelowIsInRange) {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
}

TEST(BrownianPath, MonteCarloCovariance) {
    const Vector grid = unit_grid(4);
    Rng rng(1);
    Vector sq = Vector::Zero(4);
    double inc_cross = 0.0;
    double inc_a = 0.0;
    double inc_b = 0.0;
    for (int p = 0; p < kPaths; ++p) {
        const Vector x = brownian_path(grid, rng);
        sq += x.cwiseProduct(x);
        const double a = x(1) - x(0);
        const double b = x(3) - x(2);
        inc_cross += a * b;
        inc_a += a * a;
        inc_b += b * b;
    }
    for (Index j = 0; j < 4; ++j) {
        const double t = grid(j);
        EXPECT_NEAR(sq(j) / kPaths, t, 3.0 * std::sqrt(2.0) * t / std::sqrt(kPaths)) << "t = " << t;
    }
    // Disjoint increments, each with variance 1/4.
    EXPECT_NEAR(inc_cross / kPaths, 0.0, 3.0 * 0.25 / std::sqrt(kPaths));
    EXPECT_NEAR(inc_a / kPaths, 0.25, 3.0 * std::sqrt(2.0) * 0.25 / std::sqrt(kPaths));
    EXPECT_NEAR(inc_b / kPaths, 0.25, 3.0 * std::sqrt(2.0) * 0.25 / std::sqrt(kPaths));
}

TEST(BrownianPath, RejectsGridOutsideUnitInterval) {
    Vector grid(2);
    grid << 0.5, 1.5;
    EXPECT_THROW(brownian_path(grid, 1), ArgumentError);
    EXPECT_EQ(brownian_path(unit_grid(5), 3), brownian_path(unit_grid(5), 3));
}

TEST(FgpPath, HalfMatchesBrownianGram) {
    const Vector grid = unit_grid(7);
    const Matrix a = gram_matrix(KernelSpec::fbm(0.5), grid).matrix();
    const Matrix b = gram_matrix(KernelSpec::brownian(), grid).matrix();
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(fgp_path(grid, 0.75, 8), fgp_path(grid, 0.75, 8));
}

TEST(FgpPath, MonteCarloGramMatchesAnalytic) {
    const Vector grid = unit_grid(6);
    const SymMatrix gram = gram_matrix(KernelSpec::fbm(0.75), grid);
    const GaussianSampler sampler(gram);
    EXPECT_LE((sampler.factor() * sampler.factor() - gram.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    Rng rng(2);
    Matrix emp = Matrix::Zero(6, 6);
    for (int p = 0; p < kPaths; ++p) {
        const Vector x = sampler.sample(rng);
        emp += x * x.transpose();
    }
    emp /= kPaths;
    for (Index i = 0; i < 6; ++i) {
        for (Index j = 0; j < 6; ++j) {
            const double se = std::sqrt((gram(i, i) * gram(j, j) + gram(i, j) * gram(i, j)) / kPaths);
            EXPECT_NEAR(emp(i, j), gram(i, j), 3.0 * se) << i << "," << j;
        }
    }
    EXPECT_NEAR(emp(5, 5), 1.0, 3.0 * std::sqrt(2.0 / kPaths));
}

TEST(GaussianSampler, RejectsIndefiniteGram) {
    Matrix g(2, 2);
    g << 1.0, 0.0, 0.0, -0.5;
    EXPECT_THROW(GaussianSampler{SymMatrix(g)}, NumericalError);
    g(1, 1) = -1e-14;
    const GaussianSampler clipped{SymMatrix(g)};
    EXPECT_EQ(clipped.warnings().size(), 1u);
}

TEST(GenExample1, NoiselessResponseIsExpIndex) {
    const SimOutput out = gen_example1(50, 20, 0.0, 3);
    for (Index i = 0; i < 50; ++i) EXPECT_EQ(out.dataset.y()(i), std::exp(out.xi_true(i, 0)));
    ASSERT_TRUE(out.beta_true.has_value());
    EXPECT_NEAR((*out.beta_true)(19, 0), std::sin(1.5 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(out.dataset.grid()(0), 1.0 / 20.0, 1e-15);
    // xi is the left Riemann sum (1/J) sum_j beta(t_j) X(t_j).
    const double riemann = out.dataset.x().row(7).dot(out.beta_true->col(0)) / 20.0;
    EXPECT_DOUBLE_EQ(out.xi_true(7, 0), riemann);
}

TEST(GenExample1, ZeroBetaGivesOnePlusNoise) {
    Example1Config config;
    config.n = 30;
    config.grid_size = 10;
    config.beta = [](double) { return 0.0; };
    const SimOutput out = gen_example1(config, 4);
    for (Index i = 0; i < 30; ++i) {
        EXPECT_EQ(out.xi_true(i, 0), 0.0);
        EXPECT_LT(std::abs(out.dataset.y()(i) - 1.0), 5 * 0.3);
    }
}

TEST(GenExample1, NoiseStandardDeviation) {
    const int n = 10000;
    const SimOutput out = gen_example1(n, 10, 0.3, 5);
    const Vector eps = out.dataset.y() - out.xi_true.col(0).array().exp().matrix();
    const double mean = eps.mean();
    const double sd = std::sqrt((eps.array() - mean).square().sum() / (n - 1));
    EXPECT_NEAR(sd, 0.3, 3.0 * 0.3 / std::sqrt(2.0 * n));
    EXPECT_NEAR(mean, 0.0, 3.0 * 0.3 / std::sqrt(n));
}

TEST(GenExample1, Deterministic) {
    const SimOutput a = gen_example1(20, 15, 0.3, 77);
    const SimOutput b = gen_example1(20, 15, 0.3, 77);
    EXPECT_EQ(a.dataset.x(), b.dataset.x());
    EXPECT_EQ(a.dataset.y(), b.dataset.y());
    EXPECT_EQ(a.xi_true, b.xi_true);
    EXPECT_NE(gen_example1(20, 15, 0.3, 78).dataset.y(), a.dataset.y());
}

TEST(GenExample2, GridAndNoiselessResponse) {
    const SimOutput out = gen_example2(20, 6, 0.0);
    EXPECT_EQ(out.dataset.grid_size(), 120);
    EXPECT_DOUBLE_EQ(out.dataset.grid()(0), 1.0 / 121.0);
    EXPECT_DOUBLE_EQ(out.dataset.grid()(119), 120.0 / 121.0);
    EXPECT_FALSE(out.beta_true.has_value());
    for (Index i = 0; i < 20; ++i) {
        EXPECT_EQ(out.dataset.y()(i), std::atan(out.xi_true(i, 0)));
        double s = 0.0;
        for (Index c : {29, 30, 31, 89, 90, 91}) s += out.dataset.x()(i, c);
        EXPECT_DOUBLE_EQ(out.xi_true(i, 0), s);
    }
}

TEST(GenExample2, ResponseRangeAndIndexVariance) {
    const int n = 20000;
    const SimOutput out = gen_example2(n, 7, 0.3);
    const Vector eps = out.dataset.y() - out.xi_true.col(0).array().atan().matrix();
    for (Index i = 0; i < n; ++i) {
        EXPECT_GT(out.dataset.y()(i), -std::numbers::pi / 2 + eps.minCoeff());
        EXPECT_LT(out.dataset.y()(i), std::numbers::pi / 2 + eps.maxCoeff());
    }
    // Closed-form variance of the six-point sum.
    const KernelSpec k = KernelSpec::fbm(0.75);
    const int idx[] = {30, 31, 32, 90, 91, 92};
    double analytic = 0.0;
    for (int a : idx) {
        for (int b : idx) analytic += k(a / 121.0, b / 121.0);
    }
    const double emp = out.xi_true.col(0).squaredNorm() / n;
    EXPECT_NEAR(emp, analytic, 3.0 * std::sqrt(2.0 / n) * analytic);
}

TEST(GenFiniteDim, IdentityLinkNoiseless) {
    Vector beta = Vector::Zero(5);
    beta(0) = 1.0;
    const SimOutput out = gen_finite_dim(100, 5, beta, Link::identity, 0.0, 8);
    for (Index i = 0; i < 100; ++i) EXPECT_EQ(out.dataset.y()(i), out.dataset.x()(i, 0));
    const Vector xi = out.xi_true.col(0);
    const Vector y = out.dataset.y();
    const double corr = (xi.array() - xi.mean()).matrix().dot((y.array() - y.mean()).matrix()) /
                        ((xi.array() - xi.mean()).matrix().norm() * (y.array() - y.mean()).matrix().norm());
    EXPECT_NEAR(corr, 1.0, 1e-12);
    EXPECT_THROW(gen_finite_dim(10, 4, beta, Link::identity, 0.0, 8), ArgumentError);
}

TEST(GenNullModel, ResponseIndependentOfSeedStream) {
    const SimOutput out = gen_null_model(40, 10, 1.0, 9);
    EXPECT_EQ(out.dataset.size(), 40);
    EXPECT_EQ(out.xi_true.cols(), 0);
}

TEST(BmEigenvalue, MatchesPublishedValues) {
    EXPECT_NEAR(bm_eigenvalue(1), 0.405285, 1e-6);
    EXPECT_NEAR(bm_eigenvalue(2), 0.045031, 1e-6);
    EXPECT_NEAR(bm_eigenvalue(3), 0.016211, 1e-6);
    EXPECT_NEAR(bm_eigenvalue(4), 0.008271, 1e-6);
    EXPECT_NEAR(bm_eigenvalue(5), 0.005003, 1e-6);
    EXPECT_THROW(bm_eigenvalue(0), ArgumentError);
}
