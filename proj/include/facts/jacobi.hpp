#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "facts/error.hpp"

namespace facts {

template <typename Scalar>
struct SymmetricEigen {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;               // descending
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;  // column i pairs with values(i)
    int sweeps = 0;
    bool converged = false;
};

/// Cyclic Jacobi eigendecomposition of a small dense symmetric matrix. Only
/// the upper triangle is read. Stops once the off-diagonal Frobenius norm
/// falls below `tolerance` times max(1, ||A||_F), or after `max_sweeps`.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> jacobi_eigen(const Eigen::MatrixBase<Derived>& input,
                                                      typename Derived::Scalar tolerance = 1e-12,
                                                      int max_sweeps = 100) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (input.rows() != input.cols()) throw DimensionMismatch("jacobi_eigen: matrix is not square");

    const Eigen::Index n = input.rows();
    Matrix a = input.template triangularView<Eigen::Upper>();
    a.template triangularView<Eigen::StrictlyLower>() = a.transpose();
    Matrix v = Matrix::Identity(n, n);

    auto off_norm = [&] {
        Scalar s = 0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) s += 2 * a(p, q) * a(p, q);
        return std::sqrt(s);
    };
    const Scalar threshold = tolerance * std::max<Scalar>(Scalar(1), a.norm());

    SymmetricEigen<Scalar> result;
    while (off_norm() > threshold && result.sweeps < max_sweeps) {
        ++result.sweeps;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const Scalar apq = a(p, q);
                if (apq == Scalar(0)) continue;
                // Rotation angle that annihilates a(p, q); pick the smaller root.
                const Scalar theta = (a(q, q) - a(p, p)) / (2 * apq);
                const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1));
                const Scalar c = 1 / std::sqrt(t * t + 1);
                const Scalar s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar akp = a(k, p);
                    const Scalar akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar apk = a(p, k);
                    const Scalar aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar vkp = v(k, p);
                    const Scalar vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    result.converged = off_norm() <= threshold;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
    result.values.resize(n);
    result.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        result.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        result.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return result;
}

}  // namespace facts
