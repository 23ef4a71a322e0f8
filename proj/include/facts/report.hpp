#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "facts/lda.hpp"
#include "facts/vectorize.hpp"

namespace facts::report {

inline constexpr int kSchemaVersion = 1;

struct CorpusStats {
    std::size_t documents = 0;   // distinct source documents with answers
    std::size_t answers = 0;     // answer-documents in the model
    std::int64_t tokens = 0;
    std::size_t vocabulary = 0;
    bool operator==(const CorpusStats&) const = default;
};

struct TopicSummary {
    int topic_id = 0;             // ordinal in the fitted model
    int display_rank = 0;         // 1 = largest proportion
    double proportion = 0;
    double x = 0;
    double y = 0;
    std::vector<std::size_t> top_terms;  // indices into VisData::terms, lambda = 1 order
    bool operator==(const TopicSummary&) const = default;
};

/// Per-topic arrays are indexed by topic_id.
struct TermEntry {
    std::string term;
    std::size_t vocab_index = 0;
    double overall_freq = 0;
    double saliency = 0;
    std::vector<double> est_freq;
    std::vector<double> log_prob;
    std::vector<double> log_lift;
    std::vector<double> conditional;
    bool operator==(const TermEntry&) const = default;
};

struct VisData {
    int schema_version = kSchemaVersion;
    std::string question;
    double lambda_default = 0.6;
    std::size_t top_r = 30;
    CorpusStats corpus_stats;
    std::vector<TopicSummary> topics;      // sorted by display_rank
    std::vector<TermEntry> terms;          // ascending vocab_index
    std::vector<std::size_t> salient_terms;  // indices into terms, by saliency
    bool operator==(const VisData&) const = default;
};

struct ReportConfig {
    std::string question;
    std::size_t top_r = 30;
    double lambda_default = 0.6;
};

/// Collects every metric the explorer shows. The term table holds each term
/// that ranks in some topic's top R for any lambda on a 0.01 grid, plus the R
/// most salient terms, so any grid ranking can be rebuilt client-side.
VisData assemble_vis_data(const lda::LdaModel& model, const vectorize::DocTermMatrix& dtm,
                          const ReportConfig& cfg);

nlohmann::json to_json(const VisData& data);
VisData vis_data_from_json(const nlohmann::json& j);

std::string serialize_vis_data(const VisData& data);
std::filesystem::path write_vis_json(const VisData& data, const std::filesystem::path& path);
VisData read_vis_json(const std::filesystem::path& path);

struct ExplorerBundle {
    std::string script;
    std::string style;
};

/// Explorer assets compiled into the binary.
const ExplorerBundle& builtin_explorer_bundle();

/// Reads `explorer.js` and `explorer.css` from `dir`; throws MissingBundle.
ExplorerBundle load_explorer_bundle(const std::filesystem::path& dir);

/// Escapes `<` so the payload cannot close its script element.
std::string escape_for_script(std::string_view json_text);

std::string render_html(const VisData& data, const ExplorerBundle& bundle);
std::filesystem::path emit_html(const VisData& data, const ExplorerBundle& bundle,
                                const std::filesystem::path& path);

struct ClusterTerms {
    int display_rank = 0;
    std::vector<std::string> terms;
};

/// Top `n` lambda = 1 terms per cluster in display order. Throws ConfigError
/// when n exceeds the shipped R or is zero.
std::vector<ClusterTerms> top_terms_table(const VisData& data, std::size_t n = 10);
std::string format_top_terms_table(const std::vector<ClusterTerms>& table);

struct ClusterTheme {
    int display_rank = 0;
    double weight = 0;
    std::string theme;
    bool operator==(const ClusterTheme&) const = default;
};

inline constexpr std::string_view kDefaultThemePromptTemplate =
    "Research question: {question}\n"
    "A topic model over answers to this question found a cluster that covers {weight} of the "
    "tokens. Its most important terms are: {terms}.\n"
    "Reply with a short theme of at most six words that interprets this cluster in the context "
    "of the research question. Reply with the theme only.\n";

struct ClusterPrompt {
    int display_rank = 0;
    double weight = 0;
    std::vector<std::string> terms;
    std::string prompt;
};

using ThemeResponder = std::function<std::string(const ClusterPrompt&)>;

/// Mock interpretation: `terms: <t1>, <t2>, <t3>`.
ThemeResponder mock_theme_responder();

std::string build_theme_prompt(std::string_view question, const ClusterTerms& cluster, double weight,
                               std::string_view prompt_template = kDefaultThemePromptTemplate);

/// One prompt per cluster; the first trimmed line of each reply becomes the
/// theme. Returned in display order.
std::vector<ClusterTheme> interpret_clusters(const VisData& data, std::string_view question,
                                             const ThemeResponder& responder, std::size_t n = 10,
                                             std::string_view prompt_template = kDefaultThemePromptTemplate);

/// Percentage with one decimal, e.g. 0.292 -> "29.2".
std::string format_percent(double proportion);

std::string format_themes_table(const std::vector<ClusterTheme>& themes);
std::string format_themes_csv(const std::vector<ClusterTheme>& themes);

}  // namespace facts::report
