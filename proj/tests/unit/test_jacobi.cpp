#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "facts/jacobi.hpp"
#include "facts/lda.hpp"

using facts::jacobi_eigen;

namespace {

Eigen::MatrixXd random_symmetric(facts::lda::Rng& rng, Eigen::Index n) {
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) a(i, j) = a(j, i) = rng.uniform() * 2 - 1;
    return a;
}

}  // namespace

TEST(Jacobi, MatchesEigenSelfAdjointSolver) {
    facts::lda::Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n = 1 + rng.below(9);
        const Eigen::MatrixXd a = random_symmetric(rng, n);
        const auto eig = jacobi_eigen(a);
        ASSERT_TRUE(eig.converged);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> reference(a);
        const Eigen::VectorXd expected = reference.eigenvalues().reverse();
        EXPECT_LT((eig.values - expected).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((a * eig.vectors - eig.vectors * eig.values.asDiagonal()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(),
                  1e-10);
    }
}

TEST(Jacobi, DiagonalAndDegenerateInputs) {
    const Eigen::Vector3d d(1, 3, 2);
    const auto eig = jacobi_eigen(Eigen::MatrixXd(d.asDiagonal()));
    EXPECT_EQ(eig.sweeps, 0);
    EXPECT_EQ(eig.values, Eigen::Vector3d(3, 2, 1));

    const auto zero = jacobi_eigen(Eigen::MatrixXd::Zero(4, 4));
    EXPECT_TRUE(zero.converged);
    EXPECT_TRUE((zero.values.array() == 0).all());

    EXPECT_THROW(jacobi_eigen(Eigen::MatrixXd::Zero(2, 3)), facts::DimensionMismatch);
}

TEST(Jacobi, ReadsOnlyUpperTriangleAndWorksInFloat) {
    Eigen::Matrix2d a;
    a << 2, 1, 99, 2;
    const auto eig = jacobi_eigen(a);
    EXPECT_NEAR(eig.values(0), 3, 1e-12);
    EXPECT_NEAR(eig.values(1), 1, 1e-12);

    const Eigen::Matrix3f f = (Eigen::Matrix3f() << 4, 1, 0, 1, 3, 1, 0, 1, 2).finished();
    const auto ef = jacobi_eigen(f, 1e-6f);
    EXPECT_TRUE(ef.converged);
    EXPECT_NEAR(ef.values.sum(), 9.0f, 1e-5f);
}
