#include "facts/filter.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "facts/error.hpp"
#include "facts/http.hpp"
#include "facts/io.hpp"
#include "facts/vectorize.hpp"

namespace facts::filter {

using nlohmann::json;

void ModelEndpointConfig::validate() const {
    if (timeout.count() <= 0) throw ConfigError("endpoint timeout must be positive");
    if (max_parallel < 1) throw ConfigError("endpoint max_parallel must be at least 1");
    if (!http::parse_url(base_url + generate_path))
        throw ConfigError("endpoint base_url is not an http(s) URL: " + base_url);
}

std::string_view to_string(Verdict v) {
    return v == Verdict::Relevant ? "relevant" : "not relevant";
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

std::string trim(std::string_view s) {
    const auto ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    return std::string(s.substr(first, s.find_last_not_of(ws) - first + 1));
}

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || text[i + 1] == ' ')) {
            if (auto s = trim(text.substr(start, i + 1 - start)); !s.empty()) out.push_back(std::move(s));
            start = i + 1;
        }
    }
    if (auto s = trim(text.substr(std::min(start, text.size()))); !s.empty()) out.push_back(std::move(s));
    return out;
}

using Key = std::pair<std::string, std::size_t>;

json record_to_json(const AnswerRecord& r) {
    return {{"source_id", r.source_id},
            {"chunk_index", r.chunk_index},
            {"verdict", std::string(to_string(r.verdict))},
            {"answer", r.answer}};
}

// Reads checkpointed records for `question`; a checkpoint written for a
// different question is ignored. Torn trailing lines are skipped.
std::map<Key, AnswerRecord> load_checkpoint(const fs::path& path, std::string_view question) {
    std::map<Key, AnswerRecord> done;
    std::ifstream in(path);
    if (!in) return done;
    std::string line;
    bool header_ok = false;
    while (std::getline(in, line)) {
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) continue;
        if (j.contains("question")) {
            header_ok = j["question"] == std::string(question);
            if (!header_ok) {
                spdlog::warn("checkpoint {} belongs to another question; ignoring it", path.string());
                return {};
            }
            continue;
        }
        if (!header_ok) continue;
        try {
            AnswerRecord r;
            r.source_id = j.at("source_id").get<std::string>();
            r.chunk_index = j.at("chunk_index").get<std::size_t>();
            r.verdict = j.at("verdict").get<std::string>() == "relevant" ? Verdict::Relevant
                                                                         : Verdict::NotRelevant;
            r.answer = j.at("answer").get<std::string>();
            if ((r.verdict == Verdict::Relevant) != !r.answer.empty()) continue;
            done[{r.source_id, r.chunk_index}] = std::move(r);
        } catch (const json::exception&) {
        }
    }
    return done;
}

}  // namespace

std::string build_prompt(std::string_view question, const ingest::Chunk& chunk,
                         std::string_view prompt_template) {
    if (trim(question).empty()) throw EmptyQuestion();
    std::string prompt(prompt_template);
    // Substitute the chunk last so braces inside the question are not re-expanded.
    const std::string marker = "\x01chunk\x01";
    replace_all(prompt, "{chunk}", marker);
    replace_all(prompt, "{question}", question);
    replace_all(prompt, marker, chunk.text);
    return prompt;
}

std::string query_model(std::string_view prompt, const ModelEndpointConfig& cfg) {
    cfg.validate();
    const auto url = http::parse_url(cfg.base_url + cfg.generate_path);
    json body = {{cfg.model_field, cfg.model_name},
                 {cfg.prompt_field, std::string(prompt)},
                 {"stream", false},
                 {"options", {{"temperature", cfg.temperature}}}};
    const std::string payload = body.dump(-1, ' ', false, json::error_handler_t::replace);

    std::string last_error;
    auto backoff = cfg.retry_backoff;
    for (unsigned attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        const http::Response res = http::post_json(*url, payload, cfg.timeout);
        if (res.status == 0) {
            last_error = "transport error: " + res.error;
            continue;
        }
        if (res.status >= 500) {
            last_error = "HTTP " + std::to_string(res.status);
            continue;
        }
        if (res.status < 200 || res.status >= 300)
            throw ModelUnavailable("model endpoint answered HTTP " + std::to_string(res.status));
        const json reply = json::parse(res.body, nullptr, false);
        if (reply.is_discarded() || !reply.is_object() || !reply.contains(cfg.response_field) ||
            !reply[cfg.response_field].is_string())
            throw MalformedResponse("response body lacks string field '" + cfg.response_field + "'");
        return reply[cfg.response_field].get<std::string>();
    }
    throw ModelUnavailable("model endpoint unavailable after " + std::to_string(cfg.max_retries + 1) +
                           " attempts: " + last_error);
}

Classification classify_response(std::string_view raw) {
    std::string answer = trim(raw);
    std::string normalized = answer;
    std::transform(normalized.begin(), normalized.end(), normalized.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    while (!normalized.empty() && is_ascii_punct(normalized.back())) normalized.pop_back();
    normalized = trim(normalized);
    if (normalized.starts_with(kSentinel) || answer.empty()) return {Verdict::NotRelevant, {}};
    return {Verdict::Relevant, std::move(answer)};
}

ChunkResponder http_responder(ModelEndpointConfig cfg, std::string prompt_template) {
    cfg.validate();
    return [cfg = std::move(cfg), tmpl = std::move(prompt_template)](std::string_view question,
                                                                     const ingest::Chunk& chunk) {
        return query_model(build_prompt(question, chunk, tmpl), cfg);
    };
}

ChunkResponder mock_responder(std::vector<std::string> stopwords) {
    vectorize::TokenConfig token_cfg;
    token_cfg.stopwords.insert(stopwords.begin(), stopwords.end());
    return [token_cfg](std::string_view question, const ingest::Chunk& chunk) -> std::string {
        const auto q = vectorize::tokenize(question, token_cfg);
        const std::set<std::string> keywords(q.begin(), q.end());
        std::string reply;
        for (const auto& sentence : split_sentences(chunk.text)) {
            const auto tokens = vectorize::tokenize(sentence, token_cfg);
            const bool hit = std::any_of(tokens.begin(), tokens.end(),
                                         [&](const std::string& t) { return keywords.contains(t); });
            if (!hit) continue;
            if (!reply.empty()) reply.push_back(' ');
            reply += sentence;
        }
        return reply.empty() ? std::string(kSentinel) : reply;
    };
}

fs::path checkpoint_path(const fs::path& work_dir) { return work_dir / "analysis" / "checkpoint.jsonl"; }

std::string format_analysis_file(const std::vector<AnswerRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += "## chunk " + std::to_string(r.chunk_index) + "\n";
        out += "verdict: " + std::string(to_string(r.verdict)) + "\n";
        out += r.answer + "\n\n";
    }
    return out;
}

std::vector<AnswerRecord> run_filter(const std::vector<std::vector<ingest::Chunk>>& documents,
                                     std::string_view question, const ChunkResponder& responder,
                                     const fs::path& work_dir, const FilterOptions& options) {
    if (trim(question).empty()) throw EmptyQuestion();

    std::vector<const ingest::Chunk*> chunks;
    for (const auto& doc : documents)
        for (const auto& c : doc) chunks.push_back(&c);
    std::sort(chunks.begin(), chunks.end(), [](const ingest::Chunk* a, const ingest::Chunk* b) {
        return std::tie(a->source_id, a->index) < std::tie(b->source_id, b->index);
    });
    if (chunks.empty()) return {};

    const fs::path ckpt = checkpoint_path(work_dir);
    ensure_directory(ckpt.parent_path());
    auto done = load_checkpoint(ckpt, question);

    std::vector<AnswerRecord> records(chunks.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const auto it = done.find({chunks[i]->source_id, chunks[i]->index});
        if (it != done.end()) records[i] = it->second;
        else pending.push_back(i);
    }
    if (!done.empty())
        spdlog::info("resuming filter: {} of {} chunks already answered", chunks.size() - pending.size(),
                     chunks.size());

    const bool fresh = done.empty();
    std::ofstream log(ckpt, fresh ? std::ios::trunc : std::ios::app);
    if (!log) throw WriteError("cannot open checkpoint " + ckpt.string());
    if (fresh) log << json{{"question", std::string(question)}}.dump() << '\n' << std::flush;

    std::mutex log_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr failure;
    std::size_t failure_at = pending.size();

    auto worker = [&] {
        while (!abort) {
            const std::size_t slot = next++;
            if (slot >= pending.size()) return;
            const std::size_t i = pending[slot];
            const ingest::Chunk& chunk = *chunks[i];
            try {
                auto c = classify_response(responder(question, chunk));
                AnswerRecord r{chunk.source_id, chunk.index, c.verdict, std::move(c.answer)};
                std::lock_guard lock(log_mutex);
                log << record_to_json(r).dump(-1, ' ', false, json::error_handler_t::replace) << '\n'
                    << std::flush;
                records[i] = std::move(r);
            } catch (...) {
                std::lock_guard lock(log_mutex);
                if (slot < failure_at) {
                    failure_at = slot;
                    failure = std::current_exception();
                }
                abort = true;
            }
        }
    };
    {
        const std::size_t n_threads =
            std::min<std::size_t>(std::max(1u, options.max_parallel), std::max<std::size_t>(1, pending.size()));
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
    }
    log.close();
    if (failure) std::rethrow_exception(failure);

    std::map<std::string, std::vector<AnswerRecord>> per_doc;
    for (const auto& r : records) per_doc[r.source_id].push_back(r);
    for (const auto& [source_id, recs] : per_doc)
        write_file(work_dir / "analysis" / (source_id + ".txt"), format_analysis_file(recs));
    return records;
}

fs::path export_answers_csv(const std::vector<AnswerRecord>& records, const fs::path& path) {
    std::vector<const AnswerRecord*> relevant;
    for (const auto& r : records)
        if (r.verdict == Verdict::Relevant) relevant.push_back(&r);
    std::stable_sort(relevant.begin(), relevant.end(), [](const AnswerRecord* a, const AnswerRecord* b) {
        return std::tie(a->source_id, a->chunk_index) < std::tie(b->source_id, b->chunk_index);
    });
    std::string out = std::string(kAnswersHeader) + "\n";
    for (const auto* r : relevant)
        out += csv::format_row({r->source_id, std::to_string(r->chunk_index), r->answer});
    write_file(path, out);
    return path;
}

std::vector<AnswerRecord> load_answers_csv(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw MissingFile(path.string());
    const auto rows = csv::parse(read_file(path));
    if (rows.empty() || csv::format_row(rows.front().fields) != std::string(kAnswersHeader) + "\n")
        throw Error("answers CSV lacks header '" + std::string(kAnswersHeader) + "': " + path.string());
    std::vector<AnswerRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i].fields;
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 3)
            throw Error(path.string() + ":" + std::to_string(rows[i].line) + ": expected 3 fields");
        AnswerRecord r;
        r.source_id = f[0];
        try {
            r.chunk_index = std::stoul(f[1]);
        } catch (const std::exception&) {
            throw Error(path.string() + ":" + std::to_string(rows[i].line) + ": bad chunk_index");
        }
        r.answer = f[2];
        r.verdict = r.answer.empty() ? Verdict::NotRelevant : Verdict::Relevant;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace facts::filter
