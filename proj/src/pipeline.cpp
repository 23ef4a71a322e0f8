#include "facts/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include <spdlog/spdlog.h>

#include "facts/error.hpp"
#include "facts/io.hpp"
#include "facts/report.hpp"
#include "facts/vectorize.hpp"
#include "facts/vismetrics.hpp"

namespace facts::pipeline {

using nlohmann::json;

void PipelineConfig::validate() const {
    vis::check_lambda(lambda_default);
    if (chunk_limit == 0) throw ConfigError("chunk size must be positive");
    if (top_r == 0) throw ConfigError("top-r must be positive");
    if (table_n == 0 || table_n > top_r) throw ConfigError("table-n must lie in [1, top-r]");
    if (min_token_length == 0) throw ConfigError("min token length must be positive");
    if (fetch.max_parallel == 0) throw ConfigError("harvest max_parallel must be at least 1");
    if (year && (*year < 1000 || *year > 9999)) throw ConfigError("year must have four digits");
    lda.validate();
    endpoint.validate();
}

namespace {

template <typename T>
void read(const json& obj, const char* key, T& target) {
    if (obj.contains(key) && !obj[key].is_null()) target = obj[key].get<T>();
}

void read_path(const json& obj, const char* key, fs::path& target, const fs::path& base) {
    if (obj.contains(key) && obj[key].is_string()) {
        fs::path p = obj[key].get<std::string>();
        target = p.is_absolute() ? p : base / p;
    }
}

}  // namespace

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    PipelineConfig cfg;
    try {
        read(j, "question", cfg.question);
        if (j.contains("year") && !j["year"].is_null()) cfg.year = j["year"].get<int>();
        read(j, "chunk_size", cfg.chunk_limit);
        read(j, "join_hyphenated", cfg.join_hyphenated);
        read(j, "extractor", cfg.extractor);
        read(j, "mock", cfg.mock_mode);

        if (j.contains("paths")) {
            const auto& p = j["paths"];
            read_path(p, "manifest", cfg.manifest, base_dir);
            read_path(p, "work_dir", cfg.work_dir, base_dir);
            read_path(p, "out_dir", cfg.out_dir, base_dir);
            fs::path tmp;
            read_path(p, "stopword_file", tmp, base_dir);
            if (!tmp.empty()) cfg.stopword_file = tmp;
            tmp.clear();
            read_path(p, "explorer_bundle", tmp, base_dir);
            if (!tmp.empty()) cfg.explorer_bundle = tmp;
        }
        if (j.contains("endpoint")) {
            const auto& e = j["endpoint"];
            read(e, "base_url", cfg.endpoint.base_url);
            read(e, "model", cfg.endpoint.model_name);
            if (e.contains("timeout_seconds")) cfg.endpoint.timeout = std::chrono::seconds(e["timeout_seconds"].get<long>());
            read(e, "max_parallel", cfg.endpoint.max_parallel);
            read(e, "max_retries", cfg.endpoint.max_retries);
            if (e.contains("retry_backoff_ms"))
                cfg.endpoint.retry_backoff = std::chrono::milliseconds(e["retry_backoff_ms"].get<long>());
            read(e, "generate_path", cfg.endpoint.generate_path);
            read(e, "prompt_field", cfg.endpoint.prompt_field);
            read(e, "model_field", cfg.endpoint.model_field);
            read(e, "response_field", cfg.endpoint.response_field);
            read(e, "temperature", cfg.endpoint.temperature);
        }
        if (j.contains("prompts")) {
            read(j["prompts"], "filter", cfg.filter_prompt);
            read(j["prompts"], "theme", cfg.theme_prompt);
        }
        if (j.contains("harvest")) {
            const auto& h = j["harvest"];
            read(h, "max_parallel", cfg.fetch.max_parallel);
            read(h, "attempts", cfg.fetch.attempts);
            if (h.contains("backoff_ms")) cfg.fetch.initial_backoff = std::chrono::milliseconds(h["backoff_ms"].get<long>());
            if (h.contains("timeout_seconds")) cfg.fetch.timeout = std::chrono::seconds(h["timeout_seconds"].get<long>());
        }
        if (j.contains("vectorize")) {
            read(j["vectorize"], "min_length", cfg.min_token_length);
            read(j["vectorize"], "min_doc_count", cfg.min_doc_count);
        }
        if (j.contains("lda")) {
            const auto& l = j["lda"];
            read(l, "k", cfg.lda.num_topics);
            read(l, "alpha", cfg.lda.alpha);
            read(l, "beta", cfg.lda.beta);
            read(l, "sweeps", cfg.lda.sweeps);
            read(l, "burn_in", cfg.lda.burn_in);
            read(l, "seed", cfg.lda.seed);
        }
        if (j.contains("report")) {
            read(j["report"], "top_r", cfg.top_r);
            read(j["report"], "table_n", cfg.table_n);
            read(j["report"], "lambda", cfg.lambda_default);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    return cfg;
}

PipelineConfig load_config(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
    const json j = json::parse(read_file(path), nullptr, false, true);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
    return config_from_json(j, fs::absolute(path).parent_path());
}

void apply_environment(PipelineConfig& cfg) {
    if (const char* url = std::getenv("FACTS_ENDPOINT"); url && *url) cfg.endpoint.base_url = url;
}

fs::path docs_dir(const PipelineConfig& cfg) { return cfg.work_dir / "docs"; }
fs::path cleaned_dir(const PipelineConfig& cfg) { return cfg.work_dir / "cleaned"; }
fs::path answers_csv(const PipelineConfig& cfg) { return cfg.work_dir / "answers.csv"; }
fs::path dtm_json(const PipelineConfig& cfg) { return cfg.work_dir / "dtm.json"; }
fs::path model_json(const PipelineConfig& cfg) { return cfg.work_dir / "model.json"; }
fs::path vis_json(const PipelineConfig& cfg) { return cfg.out_dir / "vis.json"; }
fs::path report_html(const PipelineConfig& cfg) { return cfg.out_dir / "report.html"; }
fs::path top_terms_txt(const PipelineConfig& cfg) { return cfg.out_dir / "top_terms.txt"; }
fs::path themes_txt(const PipelineConfig& cfg) { return cfg.out_dir / "themes.txt"; }
fs::path themes_csv(const PipelineConfig& cfg) { return cfg.out_dir / "themes.csv"; }

namespace {

void require_question(const PipelineConfig& cfg) {
    if (cfg.question.find_first_not_of(" \t\r\n") == std::string::npos) throw EmptyQuestion();
}

void require_file(const fs::path& path, std::string_view produced_by) {
    if (!fs::is_regular_file(path))
        throw MissingFile(path.string() + " (run `" + std::string(produced_by) + "` first)");
}

std::set<std::string> stopwords(const PipelineConfig& cfg) {
    return cfg.stopword_file ? vectorize::load_stopwords(*cfg.stopword_file) : vectorize::default_stopwords();
}

bool is_payload(const fs::path& p) {
    const auto name = p.filename().string();
    return !name.starts_with(".") && !name.ends_with(".cite.txt") && !name.ends_with(".part");
}

}  // namespace

json run_harvest(const PipelineConfig& cfg) {
    if (cfg.manifest.empty()) throw ConfigError("no manifest configured (paths.manifest)");
    const auto manifest = harvest::load_manifest(cfg.manifest, cfg.year);
    spdlog::info("manifest: {} refs selected, {} malformed rows", manifest.refs.size(), manifest.errors.size());

    const auto report = harvest::fetch_documents(manifest.refs, docs_dir(cfg), cfg.fetch,
                                                 fs::absolute(cfg.manifest).parent_path());
    for (const auto& ref : manifest.refs) harvest::write_citation_record(ref, docs_dir(cfg));
    for (const auto& [id, reason] : report.failures) spdlog::warn("{}: {}", id, reason);
    spdlog::info("harvest: {} downloaded, {} skipped, {} failed", report.downloaded, report.skipped, report.failed);
    return {{"stage", "harvest"},
            {"selected", manifest.refs.size()},
            {"malformed_rows", manifest.errors.size()},
            {"downloaded", report.downloaded},
            {"skipped", report.skipped},
            {"failed", report.failed}};
}

json run_analyze(const PipelineConfig& cfg) {
    require_question(cfg);
    const fs::path docs = docs_dir(cfg);
    if (!fs::is_directory(docs)) throw MissingFile(docs.string() + " (run `harvest` first)");

    std::vector<fs::path> payloads;
    for (const auto& entry : fs::directory_iterator(docs))
        if (entry.is_regular_file() && is_payload(entry.path())) payloads.push_back(entry.path());
    std::sort(payloads.begin(), payloads.end());

    std::vector<std::vector<ingest::Chunk>> chunks;
    std::size_t extraction_failures = 0;
    std::size_t total_chunks = 0;
    for (const auto& path : payloads) {
        const std::string source_id = path.stem().string();
        std::string raw;
        try {
            raw = ingest::extract_text(path, cfg.extractor);
        } catch (const Error& e) {
            spdlog::warn("{}: {}", source_id, e.what());
            ++extraction_failures;
            continue;
        }
        const auto doc = ingest::make_cleaned_document(source_id, raw, {cfg.join_hyphenated});
        write_file(cleaned_dir(cfg) / (source_id + ".txt"), doc.text);
        chunks.push_back(ingest::chunk_text(doc.text, cfg.chunk_limit, source_id));
        total_chunks += chunks.back().size();
    }
    spdlog::info("analyze: {} documents, {} chunks", chunks.size(), total_chunks);

    filter::ChunkResponder responder;
    if (cfg.mock_mode) {
        const auto words = stopwords(cfg);
        responder = filter::mock_responder({words.begin(), words.end()});
    } else {
        responder = filter::http_responder(cfg.endpoint, cfg.filter_prompt);
    }
    const auto records = filter::run_filter(chunks, cfg.question, responder, cfg.work_dir,
                                            {cfg.mock_mode ? 1u : cfg.endpoint.max_parallel});
    filter::export_answers_csv(records, answers_csv(cfg));
    const auto relevant = std::count_if(records.begin(), records.end(),
                                        [](const auto& r) { return r.verdict == filter::Verdict::Relevant; });
    spdlog::info("analyze: {} of {} chunks relevant", relevant, records.size());
    return {{"stage", "analyze"},
            {"documents", chunks.size()},
            {"extraction_failures", extraction_failures},
            {"chunks", records.size()},
            {"relevant", relevant}};
}

json run_model(const PipelineConfig& cfg) {
    require_file(answers_csv(cfg), "analyze");
    const auto answers = filter::load_answers_csv(answers_csv(cfg));

    vectorize::TokenConfig token_cfg;
    token_cfg.min_length = cfg.min_token_length;
    token_cfg.stopwords = stopwords(cfg);
    std::vector<vectorize::TokenizedDoc> docs;
    std::vector<vectorize::DocId> ids;
    for (const auto& a : answers) {
        docs.push_back(vectorize::tokenize(a.answer, token_cfg));
        ids.push_back({a.source_id, a.chunk_index});
    }
    const auto vocab = vectorize::build_vocabulary(docs, cfg.min_doc_count);
    const auto dtm = vectorize::build_dtm(docs, vocab, ids);
    write_file(dtm_json(cfg), canonical_json(vectorize::to_json(dtm)));
    spdlog::info("model: {} answer documents, {} terms, {} tokens", dtm.n_docs(), dtm.n_terms(), dtm.total_tokens());

    const auto model = lda::fit(dtm, cfg.lda);
    write_file(model_json(cfg), canonical_json(lda::to_json(model)));
    spdlog::info("model: final log-likelihood {:.3f}", model.log_likelihood.back());
    return {{"stage", "model"},
            {"documents", dtm.n_docs()},
            {"terms", dtm.n_terms()},
            {"tokens", dtm.total_tokens()},
            {"topics", cfg.lda.num_topics},
            {"log_likelihood", model.log_likelihood.back()}};
}

json run_report(const PipelineConfig& cfg) {
    require_question(cfg);
    require_file(dtm_json(cfg), "model");
    require_file(model_json(cfg), "model");
    const auto parse = [](const fs::path& p) {
        json j = json::parse(read_file(p), nullptr, false);
        if (j.is_discarded()) throw Error("not valid JSON: " + p.string());
        return j;
    };
    const auto dtm = vectorize::dtm_from_json(parse(dtm_json(cfg)));
    const auto model = lda::model_from_json(parse(model_json(cfg)));

    const auto data = report::assemble_vis_data(model, dtm, {cfg.question, cfg.top_r, cfg.lambda_default});
    report::write_vis_json(data, vis_json(cfg));
    const auto bundle = cfg.explorer_bundle ? report::load_explorer_bundle(*cfg.explorer_bundle)
                                            : report::builtin_explorer_bundle();
    report::emit_html(data, bundle, report_html(cfg));

    const auto table = report::top_terms_table(data, cfg.table_n);
    write_file(top_terms_txt(cfg), report::format_top_terms_table(table));

    report::ThemeResponder responder;
    if (cfg.mock_mode) {
        responder = report::mock_theme_responder();
    } else {
        cfg.endpoint.validate();
        responder = [endpoint = cfg.endpoint](const report::ClusterPrompt& c) {
            return filter::query_model(c.prompt, endpoint);
        };
    }
    const std::string tmpl = cfg.theme_prompt.empty() ? std::string(report::kDefaultThemePromptTemplate)
                                                      : cfg.theme_prompt;
    const auto themes = report::interpret_clusters(data, cfg.question, responder, cfg.table_n, tmpl);
    write_file(themes_txt(cfg), report::format_themes_table(themes));
    write_file(themes_csv(cfg), report::format_themes_csv(themes));
    spdlog::info("report: wrote {}", report_html(cfg).string());
    return {{"stage", "report"},
            {"topics", data.topics.size()},
            {"terms", data.terms.size()},
            {"html", report_html(cfg).string()}};
}

json run_all(const PipelineConfig& cfg) {
    json summary = {{"stage", "run"}};
    summary["harvest"] = run_harvest(cfg);
    summary["analyze"] = run_analyze(cfg);
    summary["model"] = run_model(cfg);
    summary["report"] = run_report(cfg);
    for (auto* stage : {"harvest", "analyze", "model", "report"}) summary[stage].erase("stage");
    return summary;
}

}  // namespace facts::pipeline
