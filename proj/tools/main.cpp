#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "ltrnn/errors.hpp"
#include "manifest.hpp"

namespace {

using namespace ltrnn::cli;

void add_solver_flags(CLI::App* cmd, SolverFlags& s) {
    cmd->add_option("--beta", s.beta, "latent-norm ball radius (default: scale of the observations)");
    cmd->add_option("--d", s.d, "unfolding depth (default: floor(N/2))");
    cmd->add_option("--rbar", s.r_bar, "compress when the total basis rank exceeds this (default: 25N)");
    cmd->add_option("--tol", s.tol, "stop when the relative change of X on the support drops below this")
        ->capture_default_str();
    cmd->add_option("--tmax", s.t_max, "iteration limit")->capture_default_str();
    cmd->add_option("--seed", s.seed, "power-iteration seed")->capture_default_str();
    cmd->add_option("--threads", s.threads, "matvec threads (capped by LTRNN_THREADS)");
    cmd->add_option("--mem-cap-gib", s.mem_cap_gib, "largest dense reconstruction allowed")->capture_default_str();
}

int run(const std::vector<std::string>& args);

int dispatch(CLI::App& app, const std::vector<std::string>& args) {
    SynthOptions synth;
    CompleteOptions complete;
    EvalOptions eval;
    MaskOptions mask;
    ImageOptions image;
    BenchOptions bench;
    SliceOptions slice;
    std::string manifest;

    app.require_subcommand(1);

    auto* c_synth = app.add_subcommand("synth", "generate a synthetic tensor and its observations");
    c_synth->add_option("--kind", synth.kind, "latent | volume | tr")->capture_default_str();
    c_synth->add_option("--shape", synth.shape, "comma-separated dimensions")->required();
    c_synth->add_option("--rank", synth.rank, "per-component rank (latent) or bond rank (tr)")->capture_default_str();
    c_synth->add_option("--d", synth.d, "unfolding depth of the latent components (0: floor(N/2))");
    c_synth->add_option("--missing", synth.missing, "fraction of entries left unobserved")->capture_default_str();
    c_synth->add_option("--seed", synth.seed)->capture_default_str();
    c_synth->add_option("--out-dir", synth.out_dir)->required();

    auto* c_complete = app.add_subcommand("complete", "recover a tensor from its observed entries");
    c_complete->add_option("--obs", complete.observations, "LTRNN-SPARSE observations")->required()->check(CLI::ExistingFile);
    c_complete->add_option("--truth", complete.truth, "LTRNN-DENSE ground truth for metrics")->check(CLI::ExistingFile);
    c_complete->add_option("--out-dir", complete.out_dir)->required();
    c_complete->add_option("--shape", complete.shape, "expected shape of the observations");
    c_complete->add_option("--reshape", complete.reshape, "solve in this shape (same element count)");
    c_complete->add_flag("--quiet", complete.quiet, "no progress lines on stderr");
    add_solver_flags(c_complete, complete.solver);

    auto* c_eval = app.add_subcommand("eval", "RSE / PSNR / SSIM of an estimate against the truth");
    c_eval->add_option("--est", eval.estimate)->required()->check(CLI::ExistingFile);
    c_eval->add_option("--truth", eval.truth)->required()->check(CLI::ExistingFile);
    c_eval->add_option("--basis", eval.basis, "basis file, to report SSDI")->check(CLI::ExistingFile);
    c_eval->add_option("--obs", eval.observations, "observations the basis was fitted to")->check(CLI::ExistingFile);
    c_eval->add_option("--out", eval.out, "also write the metrics JSON here");

    auto* c_mask = app.add_subcommand("mask", "sample observations from a dense tensor");
    c_mask->add_option("--in", mask.input)->required()->check(CLI::ExistingFile);
    c_mask->add_option("--out", mask.out)->required();
    c_mask->add_option("--missing", mask.missing)->capture_default_str();
    c_mask->add_option("--seed", mask.seed)->capture_default_str();

    auto* c_image = app.add_subcommand("image", "convert PNG images and frame directories to and from tensors");
    c_image->add_option("direction", image.direction, "to-tensor | to-png")->required();
    c_image->add_option("--in", image.input)->required()->check(CLI::ExistingPath);
    c_image->add_option("--out", image.out)->required();

    auto* c_bench = app.add_subcommand("bench", "run a (reshape x missing ratio) grid and write a CSV table");
    c_bench->add_option("--truth", bench.truth)->required()->check(CLI::ExistingFile);
    c_bench->add_option("--missing", bench.missing, "missing ratios")->required()->delimiter(',');
    c_bench->add_option("--reshape", bench.reshapes, "shape to solve in; repeat for several")->required();
    c_bench->add_option("--out", bench.out, "CSV path")->required();
    c_bench->add_option("--mask-seed", bench.mask_seed)->capture_default_str();
    add_solver_flags(c_bench, bench.solver);

    auto* c_slice = app.add_subcommand("slice", "evaluate one slice of a saved basis");
    c_slice->add_option("--basis", slice.basis)->required()->check(CLI::ExistingFile);
    c_slice->add_option("--view-shape", slice.view_shape, "index the tensor in this shape (same element count)");
    c_slice->add_option("--fix", slice.fixed, "mode=index, repeat for each fixed mode");
    c_slice->add_option("--out", slice.out, ".png for an image, anything else for LTRNN-DENSE")->required();

    auto* c_rerun = app.add_subcommand("rerun", "repeat the run recorded in a manifest");
    c_rerun->add_option("manifest", manifest)->required()->check(CLI::ExistingFile);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (c_synth->parsed()) return cmd_synth(synth, args);
    if (c_complete->parsed()) return cmd_complete(complete, args);
    if (c_eval->parsed()) return cmd_eval(eval, args);
    if (c_mask->parsed()) return cmd_mask(mask, args);
    if (c_image->parsed()) return cmd_image(image, args);
    if (c_bench->parsed()) return cmd_bench(bench, args);
    if (c_slice->parsed()) return cmd_slice(slice, args);
    if (c_rerun->parsed()) {
        auto recorded = manifest_argv(manifest);
        if (!recorded.empty() && recorded.front() == "rerun") throw ltrnn::ParameterError("manifest records a rerun");
        return run(recorded);
    }
    return kFailure;
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"Tensor completion with the latent tensor-ring nuclear norm"};
    app.name("ltrnn");
    try {
        return dispatch(app, args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kFailure;
    } catch (const ltrnn::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace

int main(int argc, char** argv) { return run(std::vector<std::string>(argv + 1, argv + argc)); }
