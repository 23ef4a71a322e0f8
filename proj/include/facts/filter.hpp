#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "facts/ingest.hpp"

namespace facts::filter {

inline constexpr std::string_view kSentinel = "NO ANSWER";

/// Default question/chunk prompt; `{question}` and `{chunk}` are substituted.
inline constexpr std::string_view kDefaultPromptTemplate =
    "You are assisting with a literature review.\n"
    "Research question: {question}\n\n"
    "Read the following excerpt from a scientific article. If it contains information "
    "that helps answer the research question, reply with a concise answer based only on "
    "the excerpt. If it contains no relevant information, reply with exactly NO ANSWER "
    "and nothing else.\n\n"
    "Excerpt:\n{chunk}\n";

struct ModelEndpointConfig {
    std::string base_url = "http://localhost:11434";
    std::string model_name = "llama3.1";
    std::chrono::seconds timeout{120};
    unsigned max_parallel = 1;
    unsigned max_retries = 2;
    std::chrono::milliseconds retry_backoff{500};
    std::string generate_path = "/api/generate";
    std::string prompt_field = "prompt";
    std::string model_field = "model";
    std::string response_field = "response";
    double temperature = 0.0;

    /// Throws ConfigError when timeout or max_parallel is not positive.
    void validate() const;
};

enum class Verdict { Relevant, NotRelevant };

std::string_view to_string(Verdict v);

struct Classification {
    Verdict verdict = Verdict::NotRelevant;
    std::string answer;
};

struct AnswerRecord {
    std::string source_id;
    std::size_t chunk_index = 0;
    Verdict verdict = Verdict::NotRelevant;
    std::string answer;  // empty iff NotRelevant

    bool operator==(const AnswerRecord&) const = default;
};

std::string build_prompt(std::string_view question, const ingest::Chunk& chunk,
                         std::string_view prompt_template = kDefaultPromptTemplate);

/// One non-streaming completion. Transport failures and 5xx statuses are
/// retried `max_retries` times before ModelUnavailable; a body without the
/// response field raises MalformedResponse immediately.
std::string query_model(std::string_view prompt, const ModelEndpointConfig& cfg);

Classification classify_response(std::string_view raw);

/// Produces the raw model reply for one chunk.
using ChunkResponder = std::function<std::string(std::string_view question, const ingest::Chunk&)>;

ChunkResponder http_responder(ModelEndpointConfig cfg,
                              std::string prompt_template = std::string(kDefaultPromptTemplate));

/// Offline stand-in for a model: a chunk is relevant when it shares a content
/// word with the question, and the reply echoes every sentence that does.
ChunkResponder mock_responder(std::vector<std::string> stopwords);

struct FilterOptions {
    unsigned max_parallel = 1;
};

/// Queries every chunk once and returns records ordered by
/// (source_id, chunk_index). Writes `analysis/<source_id>.txt` per document
/// and keeps `analysis/checkpoint.jsonl` so an interrupted run resumes
/// without re-querying answered chunks.
std::vector<AnswerRecord> run_filter(const std::vector<std::vector<ingest::Chunk>>& documents,
                                     std::string_view question, const ChunkResponder& responder,
                                     const std::filesystem::path& work_dir,
                                     const FilterOptions& options = {});

std::filesystem::path checkpoint_path(const std::filesystem::path& work_dir);

std::string format_analysis_file(const std::vector<AnswerRecord>& records);

inline constexpr std::string_view kAnswersHeader = "source_id,chunk_index,answer";

std::filesystem::path export_answers_csv(const std::vector<AnswerRecord>& records,
                                         const std::filesystem::path& path);

/// Reads the relevant answers back from an answers CSV.
std::vector<AnswerRecord> load_answers_csv(const std::filesystem::path& path);

}  // namespace facts::filter
