// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "facts/cli.hpp"
#include "facts/ingest.hpp"
#include "facts/io.hpp"
#include "facts/lda.hpp"
#include "facts/report.hpp"
#include "facts/vismetrics.hpp"
#include "fixtures.hpp"
#include "temp_dir.hpp"

using namespace facts;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kEnumerationTolerance = 0.02;
constexpr double kEnumerationSeconds = 10;
constexpr double kRecoveryMinCosine = 0.85;
constexpr double kRecoverySeconds = 60;
constexpr double kSumTolerance = 1e-9;
constexpr double kJsdTolerance = 1e-12;
constexpr double kMdsTolerance = 1e-6;
constexpr double kWorkedTolerance = 1e-3;
constexpr double kOracleTolerance = 1e-12;
constexpr double kPipelineSeconds = 30;
constexpr int kRandomModels = 100;
constexpr int kIngestCases = 10000;
constexpr std::size_t kChunkLimit = 3500;

// Worked values and their independent-oracle counterparts
// (tests/oracles/derived_values.py).
constexpr double kGibbsSplit = 0.823, kGibbsSplitOracle = 0.82258064516129026;
constexpr double kSaliency = 0.3466, kSaliencyOracle = 0.34657359027997264;
constexpr double kJsd = 0.2158, kJsdOracle = 0.21576155433883565;
constexpr double kRelevance = -0.6884, kRelevanceOracle = -0.68840387523648205;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Outcome exact_enumeration() {
    const auto start = Clock::now();
    const std::vector<std::vector<int>> docs{{0}, {1}};
    const auto dtm = testing::dtm_from_ordinals(docs, 2);
    lda::LdaConfig cfg;
    cfg.num_topics = 2;
    cfg.alpha = 0.1;
    cfg.beta = 0.01;
    cfg.burn_in = 1000;
    cfg.sweeps = cfg.burn_in + 50000;
    cfg.seed = 42;
    const auto model = lda::fit(dtm, cfg);
    const auto exact = testing::enumerate_posterior(docs, 2, 2, cfg.alpha, cfg.beta);
    const double err = (model.theta - exact.theta_mean).cwiseAbs().maxCoeff();
    const double elapsed = seconds_since(start);
    return {err <= kEnumerationTolerance && elapsed < kEnumerationSeconds,
            fmt("max |theta - exact| = %.4f (<= %.2f), %.2fs (< %.0fs)", err, kEnumerationTolerance, elapsed,
                kEnumerationSeconds)};
}

Outcome synthetic_recovery() {
    const auto start = Clock::now();
    constexpr int D = 200, L = 100, K = 3, V = 50;
    lda::Rng rng(2024);
    Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(K, V);
    std::vector<std::pair<int, int>> blocks;  // [begin, end) per topic
    for (int t = 0; t < K; ++t) {
        const int begin = t * V / K, end = (t + 1) * V / K;
        blocks.emplace_back(begin, end);
        truth.row(t).segment(begin, end - begin).setConstant(1.0 / (end - begin));
    }
    std::vector<std::vector<int>> docs(D);
    for (auto& doc : docs) {
        // Dirichlet(1) mixture over the planted topics.
        Eigen::Vector3d mix;
        for (int t = 0; t < K; ++t) mix(t) = -std::log(1.0 - rng.uniform());
        mix /= mix.sum();
        for (int i = 0; i < L; ++i) {
            const double u = rng.uniform();
            const int t = u < mix(0) ? 0 : (u < mix(0) + mix(1) ? 1 : 2);
            const auto [begin, end] = blocks[static_cast<std::size_t>(t)];
            doc.push_back(begin + rng.below(end - begin));
        }
    }
    const auto dtm = testing::dtm_from_ordinals(docs, V);
    lda::LdaConfig cfg;
    cfg.num_topics = K;
    cfg.sweeps = 1000;
    cfg.burn_in = 200;
    cfg.seed = 42;
    const auto model = lda::fit(dtm, cfg);

    // Greedy matching on cosine similarity.
    Eigen::MatrixXd cosine(K, K);
    for (int f = 0; f < K; ++f)
        for (int t = 0; t < K; ++t)
            cosine(f, t) = model.phi.row(f).dot(truth.row(t)) / (model.phi.row(f).norm() * truth.row(t).norm());
    std::vector<bool> used_f(K), used_t(K);
    double total = 0;
    for (int round = 0; round < K; ++round) {
        double best = -1;
        int bf = 0, bt = 0;
        for (int f = 0; f < K; ++f)
            for (int t = 0; t < K; ++t)
                if (!used_f[f] && !used_t[t] && cosine(f, t) > best) best = cosine(f, t), bf = f, bt = t;
        used_f[bf] = used_t[bt] = true;
        total += best;
    }
    const double mean = total / K;
    const double elapsed = seconds_since(start);
    return {mean >= kRecoveryMinCosine && elapsed < kRecoverySeconds,
            fmt("mean cosine %.4f (>= %.2f), %.2fs (< %.0fs)", mean, kRecoveryMinCosine, elapsed, kRecoverySeconds)};
}

std::vector<Eigen::Index> order_of(const std::vector<vis::TermScore<double>>& ranked) {
    std::vector<Eigen::Index> out;
    for (const auto& r : ranked) out.push_back(r.term);
    return out;
}

Outcome metric_identities() {
    lda::Rng rng(99);
    int ranking_failures = 0, jsd_failures = 0, sum_failures = 0, mds_failures = 0;
    double worst_mds = 0;
    for (int m = 0; m < kRandomModels; ++m) {
        const Eigen::Index k = 2 + rng.below(7), v = 5 + rng.below(60);
        const Eigen::MatrixXd phi = testing::random_phi(rng, k, v);
        const Eigen::VectorXd p = vis::topic_proportions(testing::random_totals(rng, k));
        const Eigen::VectorXd pw = vis::term_marginals(phi, p);
        const auto all = static_cast<std::size_t>(v);
        for (Eigen::Index t = 0; t < k; ++t) {
            const Eigen::VectorXd by_phi = phi.row(t).transpose();
            const Eigen::VectorXd by_lift = by_phi.cwiseQuotient(pw);
            if (order_of(vis::top_terms(phi, p, t, 1.0, all)) != order_of(vis::rank_terms(by_phi, all)))
                ++ranking_failures;
            if (order_of(vis::top_terms(phi, p, t, 0.0, all)) != order_of(vis::rank_terms(by_lift, all)))
                ++ranking_failures;
        }

        const Eigen::MatrixXd d = vis::intertopic_distances(phi);
        for (Eigen::Index i = 0; i < k; ++i) {
            if (vis::jensen_shannon(phi.row(i).transpose(), phi.row(i).transpose()) > kJsdTolerance) ++jsd_failures;
            for (Eigen::Index j = 0; j < k; ++j) {
                const double a = vis::jensen_shannon(phi.row(i).transpose(), phi.row(j).transpose());
                const double b = vis::jensen_shannon(phi.row(j).transpose(), phi.row(i).transpose());
                if (std::abs(a - b) > kJsdTolerance || a < 0 || a > std::log(2.0) + kJsdTolerance ||
                    std::abs(d(i, j) - a) > kJsdTolerance)
                    ++jsd_failures;
            }
        }

        if (std::abs(p.sum() - 1) > kSumTolerance) ++sum_failures;
        const Eigen::MatrixXd cond = vis::conditional_matrix(phi, p);
        if ((cond.colwise().sum().array() - 1).abs().maxCoeff() > kSumTolerance) ++sum_failures;

        Eigen::MatrixXd points(k, 2);
        for (Eigen::Index i = 0; i < k; ++i) points.row(i) << rng.uniform() * 2 - 1, rng.uniform() * 2 - 1;
        Eigen::MatrixXd planar(k, k), rebuilt(k, k);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j) planar(i, j) = (points.row(i) - points.row(j)).norm();
        const Eigen::MatrixXd layout = vis::mds_layout(planar);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j) rebuilt(i, j) = (layout.row(i) - layout.row(j)).norm();
        const double err = (rebuilt - planar).cwiseAbs().maxCoeff();
        worst_mds = std::max(worst_mds, err);
        if (err > kMdsTolerance) ++mds_failures;
    }
    const bool pass = ranking_failures == 0 && jsd_failures == 0 && sum_failures == 0 && mds_failures == 0;
    return {pass, fmt("%d models: ranking %d, jsd %d, sums %d, mds %d failures; worst mds error %.1e",
                      kRandomModels, ranking_failures, jsd_failures, sum_failures, mds_failures, worst_mds)};
}

Outcome worked_values() {
    const double w0 = lda::topic_weight(0, 0, 0, 0.1, 0.01, 2);
    const double w1 = lda::topic_weight(1, 0, 1, 0.1, 0.01, 2);
    const double split = w0 / (w0 + w1);

    Eigen::Matrix2d disjoint;
    disjoint << 1, 0, 0, 1;
    const double sal = vis::saliency(disjoint, Eigen::Vector2d(0.5, 0.5))(0);
    const double jsd = vis::jensen_shannon(Eigen::Vector2d(1, 0), Eigen::Vector2d(0.5, 0.5));
    const double rel = vis::relevance_score(0.2, 0.1, 0.6);

    struct Check {
        double got, stated, oracle;
    };
    const Check checks[] = {{split, kGibbsSplit, kGibbsSplitOracle},
                            {sal, kSaliency, kSaliencyOracle},
                            {jsd, kJsd, kJsdOracle},
                            {rel, kRelevance, kRelevanceOracle}};
    bool pass = true;
    for (const auto& c : checks) {
        pass = pass && std::abs(c.oracle - c.stated) <= kWorkedTolerance;
        pass = pass && std::abs(c.got - c.stated) <= kWorkedTolerance;
        pass = pass && std::abs(c.got - c.oracle) <= kOracleTolerance;
    }
    return {pass, fmt("gibbs %.6f, saliency %.6f, jsd %.6f, relevance %.6f", split, sal, jsd, rel)};
}

Outcome pipeline_determinism() {
    const fs::path corpus = fs::path(FACTS_SOURCE_DIR) / "data/mini_corpus";
    const auto start = Clock::now();
    testing::TempDir first, second;
    int status = 0;
    std::ostringstream summary;
    auto* const saved = std::cout.rdbuf(summary.rdbuf());
    for (const auto* dir : {&first, &second}) {
        fs::copy(corpus / "docs", *dir / "docs", fs::copy_options::recursive);
        fs::copy_file(corpus / "manifest.csv", *dir / "manifest.csv");
        fs::copy_file(corpus / "facts.json", *dir / "facts.json");
        status |= cli::run({"run", "--config", (*dir / "facts.json").string(), "--mock"});
    }
    std::cout.rdbuf(saved);
    const double elapsed = seconds_since(start);
    std::vector<std::string> differing;
    for (const char* rel : {"work/answers.csv", "work/model.json", "out/vis.json", "out/report.html"}) {
        const bool both = fs::is_regular_file(first / rel) && fs::is_regular_file(second / rel);
        if (!both || read_file(first / rel) != read_file(second / rel)) differing.emplace_back(rel);
    }
    std::string detail = fmt("exit %d, %.2fs for two runs (< %.0fs), ", status, elapsed, kPipelineSeconds);
    detail += differing.empty() ? "4 artifacts byte-identical" : "differs: " + differing.front();
    return {status == 0 && differing.empty() && elapsed < kPipelineSeconds, detail};
}

Outcome format_reproduction() {
    // Published theme weights as token-topic totals, out of rank order.
    Eigen::VectorXi totals(5);
    totals << 1740, 2920, 1450, 2030, 1860;
    lda::Rng rng(5);
    const auto m = testing::synthetic_model(rng, totals, 40);
    report::ReportConfig cfg;
    cfg.question = "How will AI change education?";
    const auto data = report::assemble_vis_data(m.model, m.dtm, cfg);
    const auto table = report::format_themes_table(report::interpret_clusters(data, cfg.question,
                                                                                report::mock_theme_responder()));
    std::istringstream lines(table);
    std::string line;
    std::getline(lines, line);  // header
    std::vector<std::string> weights;
    while (std::getline(lines, line)) {
        const auto a = line.find('\t'), b = line.find('\t', a + 1);
        weights.push_back(line.substr(a + 1, b - a - 1));
    }
    const std::vector<std::string> expected{"29.2%", "20.3%", "18.6%", "17.4%", "14.5%"};
    std::string shown;
    for (const auto& w : weights) shown += (shown.empty() ? "" : " ") + w;
    return {weights == expected, "weights " + shown};
}

Outcome ingest_properties() {
    lda::Rng rng(31337);
    int idempotence = 0, partition = 0, bounds = 0;
    for (int i = 0; i < kIngestCases; ++i) {
        const std::string raw = testing::random_raw_text(rng, i % 10 == 0 ? 4000 : 300);
        const std::string cleaned = ingest::clean_text(raw);
        if (ingest::clean_text(cleaned) != cleaned) ++idempotence;
        const std::size_t limit = i % 2 ? kChunkLimit : 1 + static_cast<std::size_t>(rng.below(i % 4 ? 60 : 10000));
        const auto chunks = ingest::chunk_text(cleaned, limit);
        if (ingest::rejoin_chunks(chunks) != cleaned) ++partition;
        for (const auto& c : chunks)
            if (c.char_count == 0 || c.char_count > limit) ++bounds;
    }
    return {idempotence == 0 && partition == 0 && bounds == 0,
            fmt("%d cases: idempotence %d, partition %d, bounds %d failures", kIngestCases, idempotence, partition,
                bounds)};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"exact-enumeration-oracle", exact_enumeration},
        {"synthetic-recovery", synthetic_recovery},
        {"metric-identities", metric_identities},
        {"worked-values", worked_values},
        {"pipeline-determinism", pipeline_determinism},
        {"format-reproduction", format_reproduction},
        {"ingest-properties", ingest_properties},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        failed += !outcome.pass;
        std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str());
        std::fflush(stdout);
    }
    return failed;
}
