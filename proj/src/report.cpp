#include "facts/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "facts/error.hpp"
#include "facts/io.hpp"
#include "facts/vismetrics.hpp"

namespace facts::report {

using nlohmann::json;

namespace {

#include "explorer_bundle.inc"


json finite_or_null(const std::vector<double>& values) {
    json out = json::array();
    for (double v : values) out.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    return out;
}

std::vector<double> doubles_from(const json& arr) {
    std::vector<double> out;
    for (const auto& v : arr)
        out.push_back(v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>());
    return out;
}

std::string trim(std::string_view s) {
    const auto ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    return std::string(s.substr(first, s.find_last_not_of(ws) - first + 1));
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

std::string html_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

VisData assemble_vis_data(const lda::LdaModel& model, const vectorize::DocTermMatrix& dtm,
                          const ReportConfig& cfg) {
    vis::check_lambda(cfg.lambda_default);
    if (cfg.top_r == 0) throw ConfigError("top_r must be positive");
    const Eigen::Index K = model.num_topics();
    const Eigen::Index V = model.num_terms();
    if (V != dtm.n_terms()) throw DimensionMismatch("model and vocabulary sizes differ");

    const Eigen::VectorXd proportions = vis::topic_proportions(model.token_topic_totals);
    const Eigen::VectorXd marginals = vis::term_marginals(model.phi, proportions);
    const Eigen::MatrixXd conditional = vis::conditional_matrix(model.phi, proportions);
    const Eigen::VectorXd salience = vis::saliency(model.phi, proportions);
    const Eigen::VectorXd term_counts = dtm.term_totals();
    const Eigen::MatrixXd layout = vis::mds_layout(vis::intertopic_distances(model.phi));

    VisData data;
    data.question = cfg.question;
    data.lambda_default = cfg.lambda_default;
    data.top_r = cfg.top_r;
    data.corpus_stats.answers = static_cast<std::size_t>(dtm.n_docs());
    data.corpus_stats.tokens = dtm.total_tokens();
    data.corpus_stats.vocabulary = static_cast<std::size_t>(V);
    {
        std::set<std::string_view> sources;
        for (const auto& id : dtm.doc_ids) sources.insert(id.source_id);
        data.corpus_stats.documents = sources.size();
    }

    // Every term any lambda-grid ranking can surface.
    std::set<Eigen::Index> members;
    for (Eigen::Index t = 0; t < K; ++t)
        for (int step = 0; step <= 100; ++step)
            for (const auto& ts : vis::top_terms(model.phi, proportions, t, step / 100.0, cfg.top_r))
                members.insert(ts.term);
    const auto salient = vis::rank_terms(salience, cfg.top_r);
    for (const auto& ts : salient) members.insert(ts.term);

    std::map<Eigen::Index, std::size_t> row_of;
    for (Eigen::Index w : members) {
        TermEntry e;
        e.term = dtm.vocab.term(static_cast<std::size_t>(w));
        e.vocab_index = static_cast<std::size_t>(w);
        e.overall_freq = term_counts(w);
        e.saliency = salience(w);
        for (Eigen::Index t = 0; t < K; ++t) {
            const double phi = model.phi(t, w);
            e.est_freq.push_back(vis::term_frequency_bars(model.phi, model.token_topic_totals, term_counts, w, t)
                                     .within_topic);
            e.log_prob.push_back(phi > 0 ? std::log(phi) : -std::numeric_limits<double>::infinity());
            e.log_lift.push_back(phi > 0 ? std::log(phi / marginals(w))
                                         : -std::numeric_limits<double>::infinity());
            e.conditional.push_back(conditional(t, w));
        }
        row_of[w] = data.terms.size();
        data.terms.push_back(std::move(e));
    }
    for (const auto& ts : salient) data.salient_terms.push_back(row_of.at(ts.term));

    for (Eigen::Index t = 0; t < K; ++t) {
        TopicSummary s;
        s.topic_id = static_cast<int>(t);
        s.proportion = proportions(t);
        s.x = layout(t, 0);
        s.y = layout(t, 1);
        for (const auto& ts : vis::top_terms(model.phi, proportions, t, 1.0, cfg.top_r))
            s.top_terms.push_back(row_of.at(ts.term));
        data.topics.push_back(std::move(s));
    }
    std::stable_sort(data.topics.begin(), data.topics.end(),
                     [](const TopicSummary& a, const TopicSummary& b) { return a.proportion > b.proportion; });
    for (std::size_t i = 0; i < data.topics.size(); ++i) data.topics[i].display_rank = static_cast<int>(i + 1);
    return data;
}

json to_json(const VisData& data) {
    json topics = json::array();
    for (const auto& t : data.topics)
        topics.push_back({{"id", t.topic_id},
                          {"display_rank", t.display_rank},
                          {"proportion", t.proportion},
                          {"x", t.x},
                          {"y", t.y},
                          {"terms", t.top_terms}});
    json terms = json::array();
    for (const auto& e : data.terms)
        terms.push_back({{"term", e.term},
                         {"vocab_index", e.vocab_index},
                         {"overall_freq", e.overall_freq},
                         {"saliency", e.saliency},
                         {"est_freq", finite_or_null(e.est_freq)},
                         {"log_prob", finite_or_null(e.log_prob)},
                         {"log_lift", finite_or_null(e.log_lift)},
                         {"conditional", finite_or_null(e.conditional)}});
    const auto& cs = data.corpus_stats;
    return {{"schema_version", data.schema_version},
            {"question", data.question},
            {"lambda_default", data.lambda_default},
            {"top_r", data.top_r},
            {"corpus_stats",
             {{"documents", cs.documents}, {"answers", cs.answers}, {"tokens", cs.tokens}, {"vocabulary", cs.vocabulary}}},
            {"topics", topics},
            {"terms", terms},
            {"salient_terms", data.salient_terms}};
}

VisData vis_data_from_json(const json& j) {
    try {
        VisData data;
        data.schema_version = j.at("schema_version").get<int>();
        if (data.schema_version != kSchemaVersion)
            throw Error("unsupported VisData schema_version " + std::to_string(data.schema_version));
        data.question = j.at("question").get<std::string>();
        data.lambda_default = j.at("lambda_default").get<double>();
        data.top_r = j.at("top_r").get<std::size_t>();
        const auto& cs = j.at("corpus_stats");
        data.corpus_stats = {cs.at("documents").get<std::size_t>(), cs.at("answers").get<std::size_t>(),
                             cs.at("tokens").get<std::int64_t>(), cs.at("vocabulary").get<std::size_t>()};
        for (const auto& t : j.at("topics")) {
            TopicSummary s;
            s.topic_id = t.at("id").get<int>();
            s.display_rank = t.at("display_rank").get<int>();
            s.proportion = t.at("proportion").get<double>();
            s.x = t.at("x").get<double>();
            s.y = t.at("y").get<double>();
            s.top_terms = t.at("terms").get<std::vector<std::size_t>>();
            data.topics.push_back(std::move(s));
        }
        for (const auto& t : j.at("terms")) {
            TermEntry e;
            e.term = t.at("term").get<std::string>();
            e.vocab_index = t.at("vocab_index").get<std::size_t>();
            e.overall_freq = t.at("overall_freq").get<double>();
            e.saliency = t.at("saliency").get<double>();
            e.est_freq = doubles_from(t.at("est_freq"));
            e.log_prob = doubles_from(t.at("log_prob"));
            e.log_lift = doubles_from(t.at("log_lift"));
            e.conditional = doubles_from(t.at("conditional"));
            data.terms.push_back(std::move(e));
        }
        data.salient_terms = j.at("salient_terms").get<std::vector<std::size_t>>();
        return data;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed VisData JSON: ") + e.what());
    }
}

std::string serialize_vis_data(const VisData& data) { return canonical_json(to_json(data)); }

std::filesystem::path write_vis_json(const VisData& data, const std::filesystem::path& path) {
    write_file(path, serialize_vis_data(data));
    return path;
}

VisData read_vis_json(const std::filesystem::path& path) {
    const json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw Error("not valid JSON: " + path.string());
    return vis_data_from_json(j);
}

const ExplorerBundle& builtin_explorer_bundle() {
    static const ExplorerBundle bundle{std::string(kExplorerScript), std::string(kExplorerStyle)};
    return bundle;
}

ExplorerBundle load_explorer_bundle(const std::filesystem::path& dir) {
    const auto script = dir / "explorer.js";
    const auto style = dir / "explorer.css";
    if (!std::filesystem::is_regular_file(script) || !std::filesystem::is_regular_file(style))
        throw MissingBundle("explorer bundle not found in " + dir.string() +
                            " (expects explorer.js and explorer.css)");
    return {read_file(script), read_file(style)};
}

std::string escape_for_script(std::string_view json_text) {
    std::string out;
    out.reserve(json_text.size());
    for (char c : json_text) {
        if (c == '<') out += "\\u003c";
        else out.push_back(c);
    }
    return out;
}

std::string render_html(const VisData& data, const ExplorerBundle& bundle) {
    if (bundle.script.empty()) throw MissingBundle("explorer bundle has no script");
    std::string script = bundle.script;
    replace_all(script, "</script", "<\\/script");
    std::string style = bundle.style;
    replace_all(style, "</style", "<\\/style");

    std::string html;
    html += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
    html += "<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n";
    html += "<title>Topic explorer: " + html_escape(data.question) + "</title>\n";
    html += "<style>\n" + style + "\n</style>\n</head>\n<body>\n";
    html += "<header><h1>Topic explorer</h1><p class=\"question\">" + html_escape(data.question) +
            "</p></header>\n";
    if (data.topics.size() <= 1)
        html += "<p class=\"placeholder\" id=\"degenerate-layout\">Only one topic was fitted, so the "
                "intertopic distance map has nothing to compare.</p>\n";
    html += "<main id=\"app\"><noscript>Enable JavaScript to explore the topics.</noscript></main>\n";
    html += "<script type=\"application/json\" id=\"visdata\">\n";
    html += escape_for_script(serialize_vis_data(data));
    html += "</script>\n<script>\n" + script + "\n</script>\n</body>\n</html>\n";
    return html;
}

std::filesystem::path emit_html(const VisData& data, const ExplorerBundle& bundle,
                                const std::filesystem::path& path) {
    write_file(path, render_html(data, bundle));
    return path;
}

std::vector<ClusterTerms> top_terms_table(const VisData& data, std::size_t n) {
    if (n == 0 || n > data.top_r)
        throw ConfigError("table size " + std::to_string(n) + " must lie in [1, " + std::to_string(data.top_r) + "]");
    std::vector<ClusterTerms> table;
    for (const auto& topic : data.topics) {
        ClusterTerms row;
        row.display_rank = topic.display_rank;
        for (std::size_t i = 0; i < std::min(n, topic.top_terms.size()); ++i)
            row.terms.push_back(data.terms.at(topic.top_terms[i]).term);
        table.push_back(std::move(row));
    }
    return table;
}

std::string format_top_terms_table(const std::vector<ClusterTerms>& table) {
    std::string out = "Cluster\tTerms\n";
    for (const auto& row : table) out += std::to_string(row.display_rank) + "\t" + join(row.terms, ", ") + "\n";
    return out;
}

ThemeResponder mock_theme_responder() {
    return [](const ClusterPrompt& cluster) {
        std::vector<std::string> head(cluster.terms.begin(),
                                      cluster.terms.begin() + static_cast<std::ptrdiff_t>(
                                                                  std::min<std::size_t>(3, cluster.terms.size())));
        return "terms: " + join(head, ", ");
    };
}

std::string build_theme_prompt(std::string_view question, const ClusterTerms& cluster, double weight,
                               std::string_view prompt_template) {
    std::string prompt(prompt_template);
    const std::string q_marker = "\x01question\x01";
    replace_all(prompt, "{question}", q_marker);
    replace_all(prompt, "{weight}", format_percent(weight) + "%");
    replace_all(prompt, "{terms}", join(cluster.terms, ", "));
    replace_all(prompt, q_marker, question);
    return prompt;
}

std::vector<ClusterTheme> interpret_clusters(const VisData& data, std::string_view question,
                                             const ThemeResponder& responder, std::size_t n,
                                             std::string_view prompt_template) {
    const auto table = top_terms_table(data, std::min(n, data.top_r));
    std::vector<ClusterTheme> themes;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double weight = data.topics[i].proportion;
        ClusterPrompt cp{table[i].display_rank, weight, table[i].terms,
                         build_theme_prompt(question, table[i], weight, prompt_template)};
        const std::string reply = trim(responder(cp));
        themes.push_back({table[i].display_rank, weight, trim(reply.substr(0, reply.find('\n')))});
    }
    return themes;
}

std::string format_percent(double proportion) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", proportion * 100.0);
    return buf;
}

std::string format_themes_table(const std::vector<ClusterTheme>& themes) {
    std::string out = "Cluster\tTopic weight\tTheme\n";
    for (const auto& t : themes)
        out += std::to_string(t.display_rank) + "\t" + format_percent(t.weight) + "%\t" + t.theme + "\n";
    return out;
}

std::string format_themes_csv(const std::vector<ClusterTheme>& themes) {
    std::string out = "cluster,weight_percent,theme\n";
    for (const auto& t : themes)
        out += csv::format_row({std::to_string(t.display_rank), format_percent(t.weight), t.theme});
    return out;
}

}  // namespace facts::report
