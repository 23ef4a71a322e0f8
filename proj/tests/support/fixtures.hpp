#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "facts/lda.hpp"
#include "facts/vectorize.hpp"

namespace facts::testing {

/// Random extractor-like text: mixed scripts, hyphenated breaks, page
/// numbers, tabs, CR/LF and space runs; at most `max_pieces` fragments.
inline std::string random_raw_text(lda::Rng& rng, std::size_t max_pieces) {
    static const std::vector<std::string> pieces{
        "a", "b", "e", "K", "ü", "Ä", "ß", "é", "字", "😀", " ", " ", "  ", "\n", "\n", "-\n", "-",
        "\t", "\r\n", "\f", "7", "42", "\n 17 \n", ".", ",", "Lern-\numgebung", "\n\n", "x"};
    std::string out;
    const auto len = static_cast<std::size_t>(rng.below(static_cast<int>(max_pieces) + 1));
    for (std::size_t i = 0; i < len; ++i)
        out += pieces[static_cast<std::size_t>(rng.below(static_cast<int>(pieces.size())))];
    return out;
}

/// Smoothed random topic-term matrix: rows are (counts + beta) normalized,
/// with counts drawn in [0, 20).
inline Eigen::MatrixXd random_phi(lda::Rng& rng, Eigen::Index k, Eigen::Index v, double beta = 0.01) {
    Eigen::MatrixXd phi(k, v);
    for (Eigen::Index t = 0; t < k; ++t) {
        for (Eigen::Index w = 0; w < v; ++w) phi(t, w) = rng.below(20) + beta;
        phi.row(t) /= phi.row(t).sum();
    }
    return phi;
}

/// Positive random topic totals in [1, 500].
inline Eigen::VectorXi random_totals(lda::Rng& rng, Eigen::Index k) {
    Eigen::VectorXi totals(k);
    for (Eigen::Index t = 0; t < k; ++t) totals(t) = 1 + rng.below(500);
    return totals;
}

/// Terms "t000", "t001", ... so vocabulary order matches ordinal order.
inline std::vector<std::string> numbered_terms(Eigen::Index v) {
    std::vector<std::string> terms;
    for (Eigen::Index w = 0; w < v; ++w) {
        std::string s = std::to_string(w);
        terms.push_back("t" + std::string(3 - std::min<std::size_t>(3, s.size()), '0') + s);
    }
    return terms;
}

/// Builds a DTM from per-document term ordinals.
inline vectorize::DocTermMatrix dtm_from_ordinals(const std::vector<std::vector<int>>& docs, Eigen::Index v) {
    const auto terms = numbered_terms(v);
    std::vector<vectorize::TokenizedDoc> tokenized;
    std::vector<vectorize::DocId> ids;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        vectorize::TokenizedDoc doc;
        for (int w : docs[d]) doc.push_back(terms[static_cast<std::size_t>(w)]);
        tokenized.push_back(std::move(doc));
        ids.push_back({"doc", d});
    }
    return vectorize::build_dtm(tokenized, vectorize::Vocabulary(terms), ids);
}

/// A model with a given phi and topic totals plus a matching corpus, for
/// exercising the report layer without a sampler run.
struct SyntheticModel {
    lda::LdaModel model;
    vectorize::DocTermMatrix dtm;
};

inline SyntheticModel synthetic_model(lda::Rng& rng, const Eigen::VectorXi& totals, Eigen::Index v) {
    const Eigen::Index k = totals.size();
    SyntheticModel out;
    std::vector<std::vector<int>> docs(4);
    for (auto& doc : docs)
        for (Eigen::Index w = 0; w < v; ++w)
            for (int c = rng.below(3); c >= 0; --c) doc.push_back(static_cast<int>(w));
    out.dtm = dtm_from_ordinals(docs, v);
    out.model.config.num_topics = static_cast<int>(k);
    out.model.phi = random_phi(rng, k, v);
    out.model.theta = Eigen::MatrixXd::Constant(out.dtm.n_docs(), k, 1.0 / static_cast<double>(k));
    out.model.token_topic_totals = totals.cast<double>();
    out.model.log_likelihood = {-1.0};
    return out;
}

/// Exhaustive posterior over all K^N topic assignments of a tiny corpus
/// under the collapsed LDA joint P(z, w).
struct Enumeration {
    Eigen::MatrixXd theta_mean;  // posterior mean of the point estimate (n_dt + a) / (n_d + K a)
    std::vector<double> assignment_probability;  // indexed by the base-K number of z
};

inline Enumeration enumerate_posterior(const std::vector<std::vector<int>>& docs, int v, int k, double alpha,
                                       double beta) {
    std::vector<std::pair<int, int>> tokens;  // (doc, word)
    for (std::size_t d = 0; d < docs.size(); ++d)
        for (int w : docs[d]) tokens.emplace_back(static_cast<int>(d), w);
    const int n = static_cast<int>(tokens.size());
    const int n_docs = static_cast<int>(docs.size());
    std::size_t states = 1;
    for (int i = 0; i < n; ++i) states *= static_cast<std::size_t>(k);

    Enumeration out;
    out.theta_mean = Eigen::MatrixXd::Zero(n_docs, k);
    out.assignment_probability.assign(states, 0.0);
    std::vector<double> log_joint(states);
    std::vector<Eigen::MatrixXd> thetas(states);
    for (std::size_t s = 0; s < states; ++s) {
        Eigen::MatrixXd ndt = Eigen::MatrixXd::Zero(n_docs, k);
        Eigen::MatrixXd ntw = Eigen::MatrixXd::Zero(k, v);
        std::size_t code = s;
        for (int i = n - 1; i >= 0; --i) {
            const int t = static_cast<int>(code % static_cast<std::size_t>(k));
            code /= static_cast<std::size_t>(k);
            ndt(tokens[static_cast<std::size_t>(i)].first, t) += 1;
            ntw(t, tokens[static_cast<std::size_t>(i)].second) += 1;
        }
        double lj = 0;
        for (int d = 0; d < n_docs; ++d) {
            for (int t = 0; t < k; ++t) lj += std::lgamma(ndt(d, t) + alpha) - std::lgamma(alpha);
            lj -= std::lgamma(ndt.row(d).sum() + k * alpha) - std::lgamma(k * alpha);
        }
        for (int t = 0; t < k; ++t) {
            for (int w = 0; w < v; ++w) lj += std::lgamma(ntw(t, w) + beta) - std::lgamma(beta);
            lj -= std::lgamma(ntw.row(t).sum() + v * beta) - std::lgamma(v * beta);
        }
        log_joint[s] = lj;
        Eigen::MatrixXd theta = ndt.array() + alpha;
        for (int d = 0; d < n_docs; ++d) theta.row(d) /= theta.row(d).sum();
        thetas[s] = theta;
    }
    const double peak = *std::max_element(log_joint.begin(), log_joint.end());
    double total = 0;
    for (std::size_t s = 0; s < states; ++s) total += std::exp(log_joint[s] - peak);
    for (std::size_t s = 0; s < states; ++s) {
        out.assignment_probability[s] = std::exp(log_joint[s] - peak) / total;
        out.theta_mean += out.assignment_probability[s] * thetas[s];
    }
    return out;
}

}  // namespace facts::testing
