#include "manifest.hpp"

#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ltrnn/errors.hpp"

#ifndef LTRNN_VERSION
#define LTRNN_VERSION "unknown"
#endif

namespace ltrnn::cli {

namespace {

std::string iso_time(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

std::string code_version() { return LTRNN_VERSION; }

RunManifest::RunManifest(std::string command, std::vector<std::string> argv)
    : start_(std::chrono::system_clock::now()) {
    j_["command"] = std::move(command);
    j_["argv"] = std::move(argv);
    j_["code_version"] = code_version();
    j_["started"] = iso_time(start_);
    j_["inputs"] = nlohmann::json::object();
    j_["outputs"] = nlohmann::json::object();
}

void RunManifest::add_input(const std::string& role, const std::filesystem::path& path) {
    j_["inputs"][role] = std::filesystem::absolute(path).string();
}

void RunManifest::add_output(const std::string& role, const std::filesystem::path& path) {
    j_["outputs"][role] = std::filesystem::absolute(path).string();
}

void RunManifest::set(const std::string& key, nlohmann::json value) { j_[key] = std::move(value); }

void RunManifest::set_solver(const SolverConfig& resolved) { j_["solver"] = solver_json(resolved); }

void RunManifest::write(const std::filesystem::path& path) {
    const auto end = std::chrono::system_clock::now();
    j_["finished"] = iso_time(end);
    j_["elapsed_s"] = std::chrono::duration<double>(end - start_).count();
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << j_.dump(2) << '\n';
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

nlohmann::json shape_json(const Shape& s) { return s.dims(); }

nlohmann::json solver_json(const SolverConfig& cfg) {
    nlohmann::json j;
    j["beta"] = cfg.beta ? nlohmann::json(*cfg.beta) : nlohmann::json(nullptr);
    j["d"] = cfg.d ? nlohmann::json(*cfg.d) : nlohmann::json(nullptr);
    j["r_bar"] = cfg.r_bar ? nlohmann::json(*cfg.r_bar) : nlohmann::json(nullptr);
    j["tol"] = cfg.tol;
    j["t_max"] = cfg.t_max;
    j["power_iters"] = cfg.power_iters;
    j["power_tol"] = cfg.power_tol;
    j["compress_inner_iters"] = cfg.compress_inner_iters;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["prune_rel"] = cfg.prune_rel;
    return j;
}

std::vector<std::string> manifest_argv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open manifest '" + path.string() + "'");
    nlohmann::json j;
    try {
        is >> j;
        return j.at("argv").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed manifest '" + path.string() + "': " + e.what());
    }
}

}  // namespace ltrnn::cli
