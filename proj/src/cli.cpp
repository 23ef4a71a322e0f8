#include "facts/cli.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "facts/error.hpp"
#include "facts/pipeline.hpp"

namespace facts::cli {

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> question;
    std::optional<int> year;
    std::optional<std::size_t> chunk_size;
    std::optional<int> k;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<int> sweeps;
    std::optional<int> burn_in;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::optional<std::size_t> top_r;
    std::optional<std::size_t> table_n;
    bool mock = false;
    std::optional<std::string> out;
    std::optional<std::string> work;
};

void add_flags(CLI::App& cmd, Flags& f) {
    cmd.add_option("--config", f.config, "Pipeline config file (JSON)");
    cmd.add_option("--question", f.question, "Research question put to every chunk");
    cmd.add_option("--year", f.year, "Only harvest documents published in this year");
    cmd.add_option("--chunk-size", f.chunk_size, "Chunk limit in characters (default 3500)");
    cmd.add_option("--k", f.k, "Number of topics (default 5)");
    cmd.add_option("--alpha", f.alpha, "Document-topic smoothing (default 0.1)");
    cmd.add_option("--beta", f.beta, "Topic-term smoothing (default 0.01)");
    cmd.add_option("--sweeps", f.sweeps, "Total Gibbs sweeps (default 1000)");
    cmd.add_option("--burn-in", f.burn_in, "Sweeps discarded before averaging (default 200)");
    cmd.add_option("--seed", f.seed, "Sampler seed");
    cmd.add_option("--lambda", f.lambda, "Default relevance weight in [0, 1] (default 0.6)");
    cmd.add_option("--top-r", f.top_r, "Terms shipped per topic (default 30)");
    cmd.add_option("--table-n", f.table_n, "Terms per cluster in the tables (default 10)");
    cmd.add_flag("--mock", f.mock, "Use the offline keyword model instead of the endpoint");
    cmd.add_option("--out", f.out, "Output directory for the report artifacts");
    cmd.add_option("--work", f.work, "Working directory for intermediate artifacts");
}

pipeline::PipelineConfig resolve(const Flags& f) {
    pipeline::PipelineConfig cfg = f.config.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(f.config);
    pipeline::apply_environment(cfg);
    if (f.question) cfg.question = *f.question;
    if (f.year) cfg.year = *f.year;
    if (f.chunk_size) cfg.chunk_limit = *f.chunk_size;
    if (f.k) cfg.lda.num_topics = *f.k;
    if (f.alpha) cfg.lda.alpha = *f.alpha;
    if (f.beta) cfg.lda.beta = *f.beta;
    if (f.sweeps) cfg.lda.sweeps = *f.sweeps;
    if (f.burn_in) cfg.lda.burn_in = *f.burn_in;
    if (f.seed) cfg.lda.seed = *f.seed;
    if (f.lambda) cfg.lambda_default = *f.lambda;
    if (f.top_r) cfg.top_r = *f.top_r;
    if (f.table_n) cfg.table_n = *f.table_n;
    if (f.mock) cfg.mock_mode = true;
    if (f.out) cfg.out_dir = *f.out;
    if (f.work) cfg.work_dir = *f.work;
    cfg.validate();
    return cfg;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Harvest documents, filter them with a language model, and explore their topics"};
    app.require_subcommand(1);

    struct Stage {
        const char* name;
        const char* help;
        nlohmann::json (*fn)(const pipeline::PipelineConfig&);
    };
    const Stage stages[] = {
        {"harvest", "Download manifest documents and write citation records (existing files are skipped)",
         pipeline::run_harvest},
        {"analyze", "Clean, chunk and filter documents; writes the answers CSV", pipeline::run_analyze},
        {"model", "Build the document-term matrix and fit LDA", pipeline::run_model},
        {"report", "Compute visualization metrics and write JSON, HTML and tables", pipeline::run_report},
        {"run", "Run harvest, analyze, model and report in order", pipeline::run_all},
    };

    Flags flags;
    std::vector<std::pair<CLI::App*, const Stage*>> commands;
    for (const auto& stage : stages) {
        auto* cmd = app.add_subcommand(stage.name, stage.help);
        add_flags(*cmd, flags);
        commands.emplace_back(cmd, &stage);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto cfg = resolve(flags);
        for (const auto& [cmd, stage] : commands) {
            if (!cmd->parsed()) continue;
            const auto summary = stage->fn(cfg);
            std::cout << summary.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << std::endl;
        }
        return 0;
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("facts");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace facts::cli
