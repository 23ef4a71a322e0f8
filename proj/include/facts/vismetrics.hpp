#pragma once

// Quantities behind the topic explorer: topic proportions, term conditionals,
// saliency, lambda-relevance rankings, Jensen-Shannon intertopic distances and
// the classical-MDS layout. All logarithms are natural; 0 ln 0 is taken as 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "facts/error.hpp"
#include "facts/jacobi.hpp"

namespace facts::vis {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline void check_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw LambdaOutOfRange(lambda);
}

/// P(t) = n_t / N.
template <typename Scalar = double, typename Derived>
Vector<Scalar> topic_proportions(const Eigen::MatrixBase<Derived>& topic_totals) {
    const Vector<Scalar> totals = topic_totals.template cast<Scalar>();
    return totals / totals.sum();
}

/// p_w = sum_t phi_tw P(t), the marginal probability of every term.
template <typename DerivedPhi, typename DerivedP>
Vector<typename DerivedPhi::Scalar> term_marginals(const Eigen::MatrixBase<DerivedPhi>& phi,
                                                   const Eigen::MatrixBase<DerivedP>& proportions) {
    return phi.transpose() * proportions;
}

/// P(t | w) for one term: phi_tw P(t) normalized over topics.
template <typename DerivedPhi, typename DerivedP>
Vector<typename DerivedPhi::Scalar> term_topic_conditional(const Eigen::MatrixBase<DerivedPhi>& phi,
                                                           const Eigen::MatrixBase<DerivedP>& proportions,
                                                           Eigen::Index term) {
    using Scalar = typename DerivedPhi::Scalar;
    Vector<Scalar> joint = phi.col(term).cwiseProduct(proportions);
    const Scalar total = joint.sum();
    if (total > Scalar(0)) joint /= total;
    return joint;
}

/// K x V matrix whose column w is P(. | w).
template <typename DerivedPhi, typename DerivedP>
Matrix<typename DerivedPhi::Scalar> conditional_matrix(const Eigen::MatrixBase<DerivedPhi>& phi,
                                                       const Eigen::MatrixBase<DerivedP>& proportions) {
    using Scalar = typename DerivedPhi::Scalar;
    Matrix<Scalar> joint = proportions.asDiagonal() * phi;
    for (Eigen::Index w = 0; w < joint.cols(); ++w) {
        const Scalar total = joint.col(w).sum();
        if (total > Scalar(0)) joint.col(w) /= total;
    }
    return joint;
}

/// saliency(w) = p_w * sum_t P(t|w) ln(P(t|w) / P(t)).
template <typename DerivedPhi, typename DerivedP>
Vector<typename DerivedPhi::Scalar> saliency(const Eigen::MatrixBase<DerivedPhi>& phi,
                                             const Eigen::MatrixBase<DerivedP>& proportions) {
    using Scalar = typename DerivedPhi::Scalar;
    const Vector<Scalar> marginals = term_marginals(phi, proportions);
    const Matrix<Scalar> cond = conditional_matrix(phi, proportions);
    Vector<Scalar> out(phi.cols());
    for (Eigen::Index w = 0; w < phi.cols(); ++w) {
        Scalar distinctiveness = 0;
        for (Eigen::Index t = 0; t < phi.rows(); ++t) {
            const Scalar c = cond(t, w);
            if (c > Scalar(0)) distinctiveness += c * std::log(c / proportions(t));
        }
        out(w) = marginals(w) * distinctiveness;
    }
    return out;
}

/// lambda ln phi_tw + (1 - lambda) ln(phi_tw / p_w); -inf where phi_tw = 0.
template <typename Scalar>
Scalar relevance_score(Scalar phi_tw, Scalar p_w, Scalar lambda) {
    if (!(phi_tw > Scalar(0))) return -std::numeric_limits<Scalar>::infinity();
    return lambda * std::log(phi_tw) + (1 - lambda) * std::log(phi_tw / p_w);
}

/// K x V relevance matrix; throws LambdaOutOfRange unless 0 <= lambda <= 1.
template <typename DerivedPhi, typename DerivedP>
Matrix<typename DerivedPhi::Scalar> relevance(const Eigen::MatrixBase<DerivedPhi>& phi,
                                              const Eigen::MatrixBase<DerivedP>& proportions,
                                              double lambda) {
    using Scalar = typename DerivedPhi::Scalar;
    check_lambda(lambda);
    const Vector<Scalar> marginals = term_marginals(phi, proportions);
    Matrix<Scalar> out(phi.rows(), phi.cols());
    for (Eigen::Index t = 0; t < phi.rows(); ++t)
        for (Eigen::Index w = 0; w < phi.cols(); ++w)
            out(t, w) = relevance_score<Scalar>(phi(t, w), marginals(w), static_cast<Scalar>(lambda));
    return out;
}

template <typename Scalar>
struct TermScore {
    Eigen::Index term = 0;
    Scalar score = 0;
    bool operator==(const TermScore&) const = default;
};

/// The `count` highest scores, descending, ties by ascending term ordinal.
template <typename Derived>
std::vector<TermScore<typename Derived::Scalar>> rank_terms(const Eigen::DenseBase<Derived>& scores,
                                                            std::size_t count) {
    using Scalar = typename Derived::Scalar;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const std::size_t keep = std::min(count, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                          const Scalar sa = scores(a), sb = scores(b);
                          return sa > sb || (sa == sb && a < b);
                      });
    std::vector<TermScore<Scalar>> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.push_back({order[i], scores(order[i])});
    return out;
}

/// Top `count` terms of `topic` by lambda-relevance.
template <typename DerivedPhi, typename DerivedP>
std::vector<TermScore<typename DerivedPhi::Scalar>> top_terms(const Eigen::MatrixBase<DerivedPhi>& phi,
                                                              const Eigen::MatrixBase<DerivedP>& proportions,
                                                              Eigen::Index topic, double lambda,
                                                              std::size_t count = 30) {
    using Scalar = typename DerivedPhi::Scalar;
    check_lambda(lambda);
    const Vector<Scalar> marginals = term_marginals(phi, proportions);
    Vector<Scalar> scores(phi.cols());
    for (Eigen::Index w = 0; w < phi.cols(); ++w)
        scores(w) = relevance_score<Scalar>(phi(topic, w), marginals(w), static_cast<Scalar>(lambda));
    return rank_terms(scores, count);
}

/// KL(p || q) with 0 ln 0 = 0.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar kl_divergence(const Eigen::MatrixBase<DerivedA>& p, const Eigen::MatrixBase<DerivedB>& q) {
    using Scalar = typename DerivedA::Scalar;
    Scalar sum = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > Scalar(0)) sum += p(i) * std::log(p(i) / q(i));
    return sum;
}

/// JSD(p, q) = KL(p || m) / 2 + KL(q || m) / 2 with m the midpoint.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar jensen_shannon(const Eigen::MatrixBase<DerivedA>& p, const Eigen::MatrixBase<DerivedB>& q) {
    using Scalar = typename DerivedA::Scalar;
    if (p.size() != q.size()) throw DimensionMismatch("jensen_shannon: length mismatch");
    const Vector<Scalar> a = p;
    const Vector<Scalar> b = q;
    const Vector<Scalar> m = (a + b) / Scalar(2);
    const Scalar d = kl_divergence(a, m) / 2 + kl_divergence(b, m) / 2;
    return std::max(Scalar(0), d);
}

/// Pairwise JSD between the rows of phi.
template <typename Derived>
Matrix<typename Derived::Scalar> intertopic_distances(const Eigen::MatrixBase<Derived>& phi) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index k = phi.rows();
    Matrix<Scalar> d = Matrix<Scalar>::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j)
            d(i, j) = d(j, i) = jensen_shannon(phi.row(i).transpose(), phi.row(j).transpose());
    return d;
}

/// Classical MDS (principal coordinates) into two dimensions: double-center
/// the squared distances, take the two leading eigenpairs and scale by the
/// square root of the eigenvalue (negative eigenvalues clamp to 0). Each axis
/// is flipped so that its largest-magnitude coordinate is positive.
template <typename Derived>
Matrix<typename Derived::Scalar> mds_layout(const Eigen::MatrixBase<Derived>& distances) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index k = distances.rows();
    if (distances.cols() != k) throw DimensionMismatch("mds_layout: distance matrix is not square");
    const Scalar scale = std::max<Scalar>(Scalar(1), distances.cwiseAbs().maxCoeff());
    if (((distances - distances.transpose()).cwiseAbs().array() > Scalar(1e-12) * scale).any())
        throw NotSymmetric();

    Matrix<Scalar> coords = Matrix<Scalar>::Zero(k, 2);
    if (k < 2) return coords;

    const Matrix<Scalar> squared = distances.cwiseProduct(distances);
    const Matrix<Scalar> centering =
        Matrix<Scalar>::Identity(k, k) - Matrix<Scalar>::Constant(k, k, Scalar(1) / static_cast<Scalar>(k));
    const Matrix<Scalar> b = Scalar(-0.5) * centering * squared * centering;
    const auto eig = jacobi_eigen(b);

    for (Eigen::Index axis = 0; axis < std::min<Eigen::Index>(2, k); ++axis) {
        const Scalar value = std::max(Scalar(0), eig.values(axis));
        coords.col(axis) = eig.vectors.col(axis) * std::sqrt(value);
    }
    coords.rowwise() -= coords.colwise().mean();
    for (Eigen::Index axis = 0; axis < 2; ++axis) {
        auto column = coords.col(axis);
        const Scalar largest = column.cwiseAbs().maxCoeff();
        if (largest <= Scalar(0)) {
            column.setZero();  // also clears -0.0
            continue;
        }
        // First entry within rounding of the largest magnitude decides the sign.
        for (Eigen::Index i = 0; i < k; ++i) {
            if (std::abs(column(i)) >= largest * (1 - Scalar(1e-9))) {
                if (column(i) < 0) column = -column;
                break;
            }
        }
    }
    return coords;
}

struct FrequencyBars {
    double overall = 0;       // corpus count of the term
    double within_topic = 0;  // phi_tw * n_t
};

template <typename DerivedPhi, typename DerivedTotals, typename DerivedCounts>
FrequencyBars term_frequency_bars(const Eigen::MatrixBase<DerivedPhi>& phi,
                                  const Eigen::MatrixBase<DerivedTotals>& topic_totals,
                                  const Eigen::MatrixBase<DerivedCounts>& term_counts, Eigen::Index term,
                                  Eigen::Index topic) {
    return {static_cast<double>(term_counts(term)),
            static_cast<double>(phi(topic, term)) * static_cast<double>(topic_totals(topic))};
}

}  // namespace facts::vis
