#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "facts/cli.hpp"

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("facts"));
    spdlog::set_pattern("[%l] %v");
    return facts::cli::run(argc, argv);
}
