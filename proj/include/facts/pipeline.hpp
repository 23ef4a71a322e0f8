#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "facts/filter.hpp"
#include "facts/harvest.hpp"
#include "facts/ingest.hpp"
#include "facts/lda.hpp"

namespace facts::pipeline {

namespace fs = std::filesystem;

struct PipelineConfig {
    std::string question;
    std::optional<int> year;
    std::size_t chunk_limit = ingest::kDefaultChunkLimit;
    bool join_hyphenated = true;
    std::string extractor;  // command template with {input}
    bool mock_mode = false;

    filter::ModelEndpointConfig endpoint;
    std::string filter_prompt = std::string(filter::kDefaultPromptTemplate);
    std::string theme_prompt;  // empty: built-in default

    harvest::FetchOptions fetch;

    std::size_t min_token_length = 2;
    std::size_t min_doc_count = 1;
    std::optional<fs::path> stopword_file;

    lda::LdaConfig lda;

    std::size_t top_r = 30;
    std::size_t table_n = 10;
    double lambda_default = 0.6;

    fs::path manifest;
    fs::path work_dir = "work";
    fs::path out_dir = "out";
    std::optional<fs::path> explorer_bundle;

    /// Checks the numeric ranges shared by every stage; throws ConfigError.
    void validate() const;
};

/// Reads a JSON config. Relative paths resolve against the file's directory.
PipelineConfig load_config(const fs::path& path);
PipelineConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir);

/// FACTS_ENDPOINT, when set, replaces the endpoint base URL.
void apply_environment(PipelineConfig& cfg);

// Artifact locations shared by the stages.
fs::path docs_dir(const PipelineConfig& cfg);
fs::path cleaned_dir(const PipelineConfig& cfg);
fs::path answers_csv(const PipelineConfig& cfg);
fs::path dtm_json(const PipelineConfig& cfg);
fs::path model_json(const PipelineConfig& cfg);
fs::path vis_json(const PipelineConfig& cfg);
fs::path report_html(const PipelineConfig& cfg);
fs::path top_terms_txt(const PipelineConfig& cfg);
fs::path themes_txt(const PipelineConfig& cfg);
fs::path themes_csv(const PipelineConfig& cfg);

// Each stage returns a one-line machine-readable summary.
nlohmann::json run_harvest(const PipelineConfig& cfg);
nlohmann::json run_analyze(const PipelineConfig& cfg);
nlohmann::json run_model(const PipelineConfig& cfg);
nlohmann::json run_report(const PipelineConfig& cfg);
nlohmann::json run_all(const PipelineConfig& cfg);

}  // namespace facts::pipeline
