#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ltrnn/solver.hpp"

namespace ltrnn::cli {

namespace fs = std::filesystem;

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kNotConverged = 2;

/// Solver flags shared by complete and bench.
struct SolverFlags {
    std::optional<double> beta;
    std::optional<std::size_t> d;
    std::optional<std::size_t> r_bar;
    double tol = 1e-5;
    int t_max = 200;
    std::uint64_t seed = 0;
    std::optional<unsigned> threads;
    double mem_cap_gib = 4.0;

    [[nodiscard]] SolverConfig config() const;
    [[nodiscard]] std::size_t mem_cap_bytes() const;
};

/// Matvec threads: the flag (or 1), capped by LTRNN_THREADS when set.
unsigned effective_threads(std::optional<unsigned> requested);

struct SynthOptions {
    std::string kind = "latent";  ///< latent | volume | tr
    std::string shape;
    Index rank = 5;
    std::size_t d = 0;
    double missing = 0.5;
    std::uint64_t seed = 0;
    fs::path out_dir;
};

struct CompleteOptions {
    fs::path observations;
    std::optional<fs::path> truth;
    fs::path out_dir;
    std::string shape;    ///< optional check against the file
    std::string reshape;  ///< solve in this shape
    SolverFlags solver;
    bool quiet = false;
};

struct EvalOptions {
    fs::path estimate;
    fs::path truth;
    std::optional<fs::path> basis;
    std::optional<fs::path> observations;
    std::optional<fs::path> out;
};

struct MaskOptions {
    fs::path input;
    fs::path out;
    double missing = 0.5;
    std::uint64_t seed = 0;
};

struct ImageOptions {
    std::string direction;  ///< to-tensor | to-png
    fs::path input;
    fs::path out;
};

struct BenchOptions {
    fs::path truth;
    std::vector<double> missing;
    std::vector<std::string> reshapes;
    fs::path out;
    std::uint64_t mask_seed = 0;
    SolverFlags solver;
};

struct SliceOptions {
    fs::path basis;
    std::string view_shape;  ///< defaults to the basis shape
    std::vector<std::string> fixed;  ///< "mode=index"
    fs::path out;
};

int cmd_synth(const SynthOptions& o, const std::vector<std::string>& argv);
int cmd_complete(const CompleteOptions& o, const std::vector<std::string>& argv);
int cmd_eval(const EvalOptions& o, const std::vector<std::string>& argv);
int cmd_mask(const MaskOptions& o, const std::vector<std::string>& argv);
int cmd_image(const ImageOptions& o, const std::vector<std::string>& argv);
int cmd_bench(const BenchOptions& o, const std::vector<std::string>& argv);
int cmd_slice(const SliceOptions& o, const std::vector<std::string>& argv);

}  // namespace ltrnn::cli
