#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace pxcald::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPipeline = 3;

struct Overrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> noise;
    std::optional<int> order;
    std::optional<std::string> mode;
};

/// Resolved experiment configuration; one task per run.
struct ExperimentConfig {
    std::string task;
    std::filesystem::path config_path;
    std::filesystem::path base_dir;  // relative paths resolve against this
    nlohmann::json doc;              // effective config after overrides
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    double noise = 0.0;
};

bool is_task(const std::string& task);

/// Throws ValidationError (field path) on any problem.
ExperimentConfig load_config(const std::string& task, const std::filesystem::path& config_path,
                             const Overrides& overrides);

/// Runs the task. Every task writes report.json and manifest.json plus any task CSV.
/// Returns an exit code; diagnostics go to stderr.
int run(const ExperimentConfig& config);

/// load_config + run with exit-code mapping.
int run_cli(const std::string& task, const std::filesystem::path& config_path, const Overrides& overrides);

}  // namespace pxcald::cli
