#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltrnn/solver.hpp"

namespace ltrnn::cli {

/// Everything needed to repeat a run: the exact argument list plus the
/// resolved values the run ended up using.
class RunManifest {
public:
    RunManifest(std::string command, std::vector<std::string> argv);

    void add_input(const std::string& role, const std::filesystem::path& path);
    void add_output(const std::string& role, const std::filesystem::path& path);
    void set(const std::string& key, nlohmann::json value);
    void set_solver(const SolverConfig& resolved);

    /// Stamps the finish time and writes the JSON file.
    void write(const std::filesystem::path& path);

    [[nodiscard]] const nlohmann::json& json() const noexcept { return j_; }

private:
    nlohmann::json j_;
    std::chrono::system_clock::time_point start_;
};

nlohmann::json shape_json(const Shape& s);
nlohmann::json solver_json(const SolverConfig& cfg);

/// Argument list recorded in a manifest file.
std::vector<std::string> manifest_argv(const std::filesystem::path& path);

std::string code_version();

}  // namespace ltrnn::cli
