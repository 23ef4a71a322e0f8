#include "facts/lda.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "facts/error.hpp"

namespace facts::lda {

void LdaConfig::validate() const {
    if (num_topics < 1) throw ConfigError("number of topics must be at least 1");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (!(burn_in > 0 && burn_in < sweeps))
        throw ConfigError("burn-in must satisfy 0 < burn_in < sweeps");
}

TokenStream flatten(const vectorize::DocTermMatrix& dtm) {
    TokenStream tokens;
    tokens.n_docs = dtm.n_docs();
    tokens.n_terms = dtm.n_terms();
    const auto n = dtm.total_tokens();
    tokens.doc.reserve(static_cast<std::size_t>(n));
    tokens.word.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index d = 0; d < dtm.counts.outerSize(); ++d) {
        for (vectorize::CountMatrix::InnerIterator it(dtm.counts, d); it; ++it) {
            for (int c = 0; c < it.value(); ++c) {
                tokens.doc.push_back(static_cast<int>(d));
                tokens.word.push_back(static_cast<int>(it.col()));
            }
        }
    }
    return tokens;
}

bool LdaState::consistent(const TokenStream& tokens) const {
    const auto K = n_t.size();
    if (z.size() != tokens.size()) return false;
    Eigen::MatrixXi dt = Eigen::MatrixXi::Zero(tokens.n_docs, K);
    Eigen::MatrixXi tw = Eigen::MatrixXi::Zero(K, tokens.n_terms);
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < 0 || z[i] >= K) return false;
        ++dt(tokens.doc[i], z[i]);
        ++tw(z[i], tokens.word[i]);
    }
    return dt == n_dt && tw == n_tw && n_t == tw.rowwise().sum() && n_d == dt.rowwise().sum() &&
           n_t.sum() == static_cast<int>(tokens.size());
}

LdaState init_assignments(const TokenStream& tokens, const LdaConfig& cfg, Rng& rng) {
    cfg.validate();
    const int K = cfg.num_topics;
    LdaState state;
    state.z.resize(tokens.size());
    state.n_dt = Eigen::MatrixXi::Zero(tokens.n_docs, K);
    state.n_tw = Eigen::MatrixXi::Zero(K, tokens.n_terms);
    state.n_t = Eigen::VectorXi::Zero(K);
    state.n_d = Eigen::VectorXi::Zero(tokens.n_docs);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const int t = rng.below(K);
        state.z[i] = t;
        ++state.n_dt(tokens.doc[i], t);
        ++state.n_tw(t, tokens.word[i]);
        ++state.n_t(t);
        ++state.n_d(tokens.doc[i]);
    }
    return state;
}

LdaState init_assignments(const vectorize::DocTermMatrix& dtm, const LdaConfig& cfg) {
    Rng rng(cfg.seed);
    return init_assignments(flatten(dtm), cfg, rng);
}

void gibbs_sweep(LdaState& state, const TokenStream& tokens, const LdaConfig& cfg, Rng& rng) {
    const int K = static_cast<int>(state.n_t.size());
    std::vector<double> cumulative(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const int d = tokens.doc[i];
        const int w = tokens.word[i];
        const int old = state.z[i];
        --state.n_dt(d, old);
        --state.n_tw(old, w);
        --state.n_t(old);

        double total = 0.0;
        for (int t = 0; t < K; ++t) {
            total += topic_weight(state.n_dt(d, t), state.n_tw(t, w), state.n_t(t), cfg.alpha, cfg.beta,
                                  tokens.n_terms);
            cumulative[static_cast<std::size_t>(t)] = total;
        }
        const double u = rng.uniform() * total;
        int pick = K - 1;
        for (int t = 0; t < K; ++t) {
            if (u < cumulative[static_cast<std::size_t>(t)]) {
                pick = t;
                break;
            }
        }

        state.z[i] = pick;
        ++state.n_dt(d, pick);
        ++state.n_tw(pick, w);
        ++state.n_t(pick);
    }
    assert(state.consistent(tokens));
}

Eigen::MatrixXd estimate_phi(const LdaState& state, double beta) {
    const double v_beta = static_cast<double>(state.n_tw.cols()) * beta;
    Eigen::MatrixXd phi = state.n_tw.cast<double>().array() + beta;
    for (Eigen::Index t = 0; t < phi.rows(); ++t) phi.row(t) /= state.n_t(t) + v_beta;
    return phi;
}

Eigen::MatrixXd estimate_theta(const LdaState& state, double alpha) {
    const double k_alpha = static_cast<double>(state.n_dt.cols()) * alpha;
    Eigen::MatrixXd theta = state.n_dt.cast<double>().array() + alpha;
    for (Eigen::Index d = 0; d < theta.rows(); ++d) theta.row(d) /= state.n_d(d) + k_alpha;
    return theta;
}

LdaModel fit(const vectorize::DocTermMatrix& dtm, const LdaConfig& cfg) {
    cfg.validate();
    const TokenStream tokens = flatten(dtm);
    if (tokens.size() == 0 || dtm.n_docs() == 0) throw EmptyCorpus();

    Rng rng(cfg.seed);
    LdaState state = init_assignments(tokens, cfg, rng);

    LdaModel model;
    model.config = cfg;
    model.phi = Eigen::MatrixXd::Zero(cfg.num_topics, tokens.n_terms);
    model.theta = Eigen::MatrixXd::Zero(tokens.n_docs, cfg.num_topics);
    model.token_topic_totals = Eigen::VectorXd::Zero(cfg.num_topics);
    model.log_likelihood.reserve(static_cast<std::size_t>(cfg.sweeps));

    long samples = 0;
    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
        gibbs_sweep(state, tokens, cfg, rng);
        const Eigen::MatrixXd phi = estimate_phi(state, cfg.beta);
        const Eigen::MatrixXd theta = estimate_theta(state, cfg.alpha);
        model.log_likelihood.push_back(log_likelihood(theta, phi, dtm));
        if (sweep >= cfg.burn_in) {
            // Running mean: exact when every sample is equal.
            ++samples;
            const double inv = 1.0 / static_cast<double>(samples);
            model.phi += (phi - model.phi) * inv;
            model.theta += (theta - model.theta) * inv;
            model.token_topic_totals += (state.n_t.cast<double>() - model.token_topic_totals) * inv;
        }
    }
    if (!state.consistent(tokens)) throw std::logic_error("LDA count tables out of sync");

    model.final_state = std::move(state);
    return model;
}

double log_likelihood(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& phi,
                      const vectorize::DocTermMatrix& dtm) {
    if (theta.rows() != dtm.n_docs() || phi.cols() != dtm.n_terms() || theta.cols() != phi.rows())
        throw DimensionMismatch("log_likelihood: model and document-term matrix disagree");
    double ll = 0.0;
    for (Eigen::Index d = 0; d < dtm.counts.outerSize(); ++d)
        for (vectorize::CountMatrix::InnerIterator it(dtm.counts, d); it; ++it)
            ll += it.value() * std::log(theta.row(d).dot(phi.col(it.col())));
    return ll;
}

double log_likelihood(const LdaModel& model, const vectorize::DocTermMatrix& dtm) {
    return log_likelihood(model.theta, model.phi, dtm);
}

namespace {

nlohmann::json matrix_rows(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_rows(const nlohmann::json& rows, Eigen::Index cols_if_empty) {
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index n_cols = n_rows ? static_cast<Eigen::Index>(rows.at(0).size()) : cols_if_empty;
    Eigen::MatrixXd m(n_rows, n_cols);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        if (static_cast<Eigen::Index>(rows.at(r).size()) != n_cols)
            throw DimensionMismatch("ragged matrix in model JSON");
        for (Eigen::Index c = 0; c < n_cols; ++c) m(r, c) = rows[r][c].get<double>();
    }
    return m;
}

}  // namespace

nlohmann::json to_json(const LdaModel& model) {
    const auto& c = model.config;
    std::vector<double> totals(model.token_topic_totals.data(),
                               model.token_topic_totals.data() + model.token_topic_totals.size());
    return {{"config",
             {{"num_topics", c.num_topics},
              {"alpha", c.alpha},
              {"beta", c.beta},
              {"sweeps", c.sweeps},
              {"burn_in", c.burn_in},
              {"seed", c.seed}}},
            {"phi", matrix_rows(model.phi)},
            {"theta", matrix_rows(model.theta)},
            {"token_topic_totals", totals},
            {"log_likelihood", model.log_likelihood}};
}

LdaModel model_from_json(const nlohmann::json& j) {
    try {
        LdaModel model;
        const auto& c = j.at("config");
        model.config.num_topics = c.at("num_topics").get<int>();
        model.config.alpha = c.at("alpha").get<double>();
        model.config.beta = c.at("beta").get<double>();
        model.config.sweeps = c.at("sweeps").get<int>();
        model.config.burn_in = c.at("burn_in").get<int>();
        model.config.seed = c.at("seed").get<std::uint64_t>();
        model.phi = matrix_from_rows(j.at("phi"), 0);
        model.theta = matrix_from_rows(j.at("theta"), model.phi.rows());
        const auto totals = j.at("token_topic_totals").get<std::vector<double>>();
        model.token_topic_totals = Eigen::Map<const Eigen::VectorXd>(totals.data(),
                                                                     static_cast<Eigen::Index>(totals.size()));
        model.log_likelihood = j.at("log_likelihood").get<std::vector<double>>();
        if (model.phi.rows() != model.config.num_topics || model.theta.cols() != model.phi.rows() ||
            model.token_topic_totals.size() != model.phi.rows())
            throw DimensionMismatch("model JSON dimensions disagree with num_topics");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed model JSON: ") + e.what());
    }
}

}  // namespace facts::lda
