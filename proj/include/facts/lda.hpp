#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "facts/vectorize.hpp"

namespace facts::lda {

struct LdaConfig {
    int num_topics = 5;
    double alpha = 0.1;   // document-topic smoothing
    double beta = 0.01;   // topic-term smoothing
    int sweeps = 1000;    // total sweeps, burn-in included
    int burn_in = 200;
    std::uint64_t seed = 42;

    /// Throws ConfigError unless num_topics >= 1, alpha > 0, beta > 0 and
    /// 0 < burn_in < sweeps.
    void validate() const;
    bool operator==(const LdaConfig&) const = default;
};

/// Portable generator: a single mt19937_64 stream, with doubles built from
/// the top 53 bits so draws are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    int below(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }

private:
    std::mt19937_64 engine_;
};

/// The corpus as a flat token stream in canonical order: documents ascending,
/// and within a document term ordinals ascending, each repeated by its count.
struct TokenStream {
    std::vector<int> doc;
    std::vector<int> word;
    Eigen::Index n_docs = 0;
    Eigen::Index n_terms = 0;

    std::size_t size() const noexcept { return word.size(); }
};

TokenStream flatten(const vectorize::DocTermMatrix& dtm);

struct LdaState {
    std::vector<int> z;       // topic of every token, TokenStream order
    Eigen::MatrixXi n_dt;     // D x K
    Eigen::MatrixXi n_tw;     // K x V
    Eigen::VectorXi n_t;      // K
    Eigen::VectorXi n_d;      // D

    /// Recounts the tables from `z` and compares.
    bool consistent(const TokenStream& tokens) const;
    bool operator==(const LdaState&) const = default;
};

LdaState init_assignments(const TokenStream& tokens, const LdaConfig& cfg, Rng& rng);
LdaState init_assignments(const vectorize::DocTermMatrix& dtm, const LdaConfig& cfg);

/// Relative weight of topic t for one token, with the token itself already
/// removed from the counts: (n_dt + alpha) (n_tw + beta) / (n_t + V beta).
inline double topic_weight(int n_dt, int n_tw, int n_t, double alpha, double beta, Eigen::Index n_terms) {
    return (n_dt + alpha) * (n_tw + beta) / (n_t + static_cast<double>(n_terms) * beta);
}

/// Resamples every token once, in stream order.
void gibbs_sweep(LdaState& state, const TokenStream& tokens, const LdaConfig& cfg, Rng& rng);

/// Point estimates from one state.
Eigen::MatrixXd estimate_phi(const LdaState& state, double beta);
Eigen::MatrixXd estimate_theta(const LdaState& state, double alpha);

struct LdaModel {
    LdaConfig config;
    Eigen::MatrixXd phi;                 // K x V, rows sum to 1
    Eigen::MatrixXd theta;               // D x K, rows sum to 1
    Eigen::VectorXd token_topic_totals;  // n_t averaged like phi and theta
    std::vector<double> log_likelihood;  // one entry per sweep
    LdaState final_state;                // not serialized

    Eigen::Index num_topics() const { return phi.rows(); }
    Eigen::Index num_terms() const { return phi.cols(); }
};

/// Collapsed Gibbs sampling; phi, theta and the topic totals average the
/// per-sweep values over the sweeps after burn-in. Throws EmptyCorpus.
LdaModel fit(const vectorize::DocTermMatrix& dtm, const LdaConfig& cfg);

/// Sum over tokens of ln sum_t theta_dt phi_tw, in nats.
double log_likelihood(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& phi,
                      const vectorize::DocTermMatrix& dtm);
double log_likelihood(const LdaModel& model, const vectorize::DocTermMatrix& dtm);

nlohmann::json to_json(const LdaModel& model);
LdaModel model_from_json(const nlohmann::json& j);

}  // namespace facts::lda
