#include "uq/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "uq/numerics.hpp"

namespace uq {
namespace {

Vector vec1(double v) {
    Vector x(1);
    x << v;
    return x;
}

TEST(Rbf, ZeroDistanceGivesOutputscale) {
    Vector x(2);
    x << 0.3, -1.2;
    KernelHyper hyper{std::log(0.7), std::log(2.5)};
    EXPECT_NEAR(rbf(x, x, hyper), 2.5, 1e-12);
}

TEST(Rbf, UnitHyperKnownValue) {
    const KernelHyper hyper{};
    EXPECT_NEAR(rbf(vec1(0.0), vec1(1.0), hyper), std::exp(-0.5), 1e-12);
}

TEST(Rbf, SymmetricInArguments) {
    RngStream rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        Vector a(3);
        Vector b(3);
        for (int d = 0; d < 3; ++d) {
            a[d] = rng.normal();
            b[d] = rng.normal();
        }
        KernelHyper hyper{rng.normal() * 0.5, rng.normal() * 0.5};
        EXPECT_EQ(rbf(a, b, hyper), rbf(b, a, hyper));
    }
}

TEST(Rbf, MatchesIndependentFormula) {
    RngStream rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        Vector a(4);
        Vector b(4);
        for (int d = 0; d < 4; ++d) {
            a[d] = 3.0 * rng.normal();
            b[d] = 3.0 * rng.normal();
        }
        KernelHyper hyper{0.8 * rng.normal(), 0.8 * rng.normal()};
        const double expected =
            test::rbf_oracle(a, b, hyper.lengthscale(), hyper.outputscale());
        EXPECT_NEAR(rbf(a, b, hyper), expected, 1e-12 * std::max(1.0, expected));
    }
}

TEST(Rbf, MonotoneDecreasingInDistance) {
    const KernelHyper hyper{std::log(1.3), std::log(0.9)};
    double prev = rbf(vec1(0.0), vec1(0.0), hyper);
    for (double dist = 0.25; dist <= 5.0; dist += 0.25) {
        const double cur = rbf(vec1(0.0), vec1(dist), hyper);
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(Rbf, GradientMatchesFiniteDifferences) {
    RngStream rng(6);
    const double h = 1e-5;
    for (int trial = 0; trial < 25; ++trial) {
        Vector a(2);
        Vector b(2);
        for (int d = 0; d < 2; ++d) {
            a[d] = rng.normal();
            b[d] = rng.normal();
        }
        KernelHyper hyper{0.5 * rng.normal(), 0.5 * rng.normal()};
        const RbfGrad grad = rbf_grad(a, b, hyper);

        KernelHyper up = hyper;
        KernelHyper down = hyper;
        up.log_lengthscale += h;
        down.log_lengthscale -= h;
        const double fd_ell = (rbf(a, b, up) - rbf(a, b, down)) / (2.0 * h);
        up = hyper;
        down = hyper;
        up.log_outputscale += h;
        down.log_outputscale -= h;
        const double fd_scale = (rbf(a, b, up) - rbf(a, b, down)) / (2.0 * h);

        const double denom_ell = std::max({std::abs(fd_ell), std::abs(grad.d_log_lengthscale),
                                           1e-10});
        const double denom_scale = std::max({std::abs(fd_scale),
                                             std::abs(grad.d_log_outputscale), 1e-10});
        EXPECT_LE(std::abs(grad.d_log_lengthscale - fd_ell) / denom_ell, 1e-5);
        EXPECT_LE(std::abs(grad.d_log_outputscale - fd_scale) / denom_scale, 1e-5);
    }
}

TEST(KernelMatrix, IdenticalRowsGiveConstantMatrix) {
    Matrix x(3, 2);
    x << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
    const KernelHyper hyper{0.0, std::log(1.7)};
    const Matrix k = kernel_matrix(x, x, hyper);
    EXPECT_LE((k.array() - 1.7).abs().maxCoeff(), 1e-12);
}

TEST(KernelMatrix, GramIsSymmetricPsd) {
    RngStream rng(8);
    Matrix x(12, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * rng.normal();
    const KernelHyper hyper{std::log(0.9), std::log(1.2)};
    const Matrix k = kernel_matrix(x, x, hyper);
    EXPECT_LE((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig((Eigen::MatrixXd(k)));
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
}

TEST(KernelMatrix, OffDiagonalMatchesScalarKernel) {
    Matrix xa(2, 1);
    xa << 0.0, 1.0;
    const KernelHyper hyper{};
    const Matrix k = kernel_matrix(xa, xa, hyper);
    EXPECT_NEAR(k(0, 1), std::exp(-0.5), 1e-12);
    EXPECT_NEAR(k(1, 0), std::exp(-0.5), 1e-12);
}

TEST(KernelMatrix, CrossEntriesMatchRbf) {
    RngStream rng(10);
    Matrix xa(4, 2);
    Matrix xb(3, 2);
    for (Eigen::Index i = 0; i < xa.size(); ++i) xa.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < xb.size(); ++i) xb.data()[i] = rng.normal();
    const KernelHyper hyper{0.2, -0.3};
    const Matrix k = kernel_matrix(xa, xb, hyper);
    ASSERT_EQ(k.rows(), 4);
    ASSERT_EQ(k.cols(), 3);
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            EXPECT_NEAR(k(i, j), rbf(xa.row(i).transpose(), xb.row(j).transpose(), hyper),
                        1e-14);
}

TEST(KernelMatrix, JitteredGramFactorizes) {
    RngStream rng(12);
    Matrix x(100, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 200.0 * rng.uniform01() - 100.0;
    const KernelHyper hyper{std::log(5.0), std::log(2.0)};
    Matrix k = kernel_matrix(x, x, hyper);
    k.diagonal().array() += 1e-6;
    EXPECT_NO_THROW(cholesky(k));
}

TEST(ConstantMean, IgnoresInput) {
    EXPECT_EQ(constant_mean(vec1(3.0), MeanHyper{0.0}), 0.0);
    Vector x(2);
    x << 1.0, 2.0;
    const MeanHyper hyper{2.5};
    EXPECT_EQ(constant_mean(x, hyper), 2.5);
    Vector other(2);
    other << -7.0, 0.1;
    EXPECT_EQ(constant_mean(x, hyper), constant_mean(other, hyper));
}

TEST(SquaredDistances, MatchesPlainLoops) {
    RngStream rng(14);
    Matrix xa(5, 3);
    Matrix xb(4, 3);
    for (Eigen::Index i = 0; i < xa.size(); ++i) xa.data()[i] = 2.0 * rng.normal();
    for (Eigen::Index i = 0; i < xb.size(); ++i) xb.data()[i] = 2.0 * rng.normal();
    const Matrix d2 = squared_distances(xa, xb);
    for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) {
            double expected = 0.0;
            for (Eigen::Index c = 0; c < 3; ++c) {
                const double diff = xa(i, c) - xb(j, c);
                expected += diff * diff;
            }
            EXPECT_NEAR(d2(i, j), expected, 1e-12 * std::max(1.0, expected));
            EXPECT_GE(d2(i, j), 0.0);
        }
    }
}

}  // namespace
}  // namespace uq
