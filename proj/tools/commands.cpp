#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "ltrnn/basis_io.hpp"
#include "ltrnn/errors.hpp"
#include "ltrnn/image_io.hpp"
#include "ltrnn/metrics.hpp"
#include "ltrnn/synthetic.hpp"
#include "ltrnn/tensor_io.hpp"
#include "ltrnn/unfolding.hpp"
#include "manifest.hpp"

namespace ltrnn::cli {

using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << j.dump(2) << '\n';
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

// JSON has no infinity; PSNR of an exact match is written as the string "inf".
json psnr_json(double db) { return std::isinf(db) ? json("inf") : json(db); }

// %.17g round-trips doubles, so reruns can be compared textually.
std::string exact(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json dense_metrics(const DenseTensor& est, const DenseTensor& truth) {
    json m;
    m["rse"] = rse(est, truth);
    m["psnr_db"] = psnr_json(psnr(est, truth));
    SsimResult s = ssim(est, truth);
    m["ssim"] = s.value;
    m["ssim_window"] = s.window;
    m["ssim_window_reduced"] = s.window_reduced;
    m["ssim_slices"] = s.slices;
    m["ssim_protocol"] = kSsimProtocol;
    return m;
}

// RSE and PSNR from lazy evaluation in blocks, for runs whose full
// reconstruction is over the memory cap. SSIM needs whole slices and is skipped.
json lazy_metrics(const BasisFactorSet& basis, const DenseTensor& truth) {
    constexpr Index kBlock = Index{1} << 20;
    const Index numel = truth.shape().numel();
    double err = 0.0, norm = 0.0;
    std::vector<Index> idx;
    for (Index start = 0; start < numel; start += kBlock) {
        const Index count = std::min(kBlock, numel - start);
        idx.resize(static_cast<std::size_t>(count));
        for (Index i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = start + i;
        auto vals = reconstruct_at(basis, idx);
        for (Index i = 0; i < count; ++i) {
            const double t = truth[start + i];
            const double e = vals[static_cast<std::size_t>(i)] - t;
            err += e * e;
            norm += t * t;
        }
    }
    if (norm == 0.0) throw ParameterError("RSE undefined: truth tensor is all zero");
    json m;
    m["rse"] = std::sqrt(err) / std::sqrt(norm);
    const double mse = err / static_cast<double>(numel);
    m["psnr_db"] = psnr_json(mse == 0.0 ? std::numeric_limits<double>::infinity()
                                        : 10.0 * std::log10(255.0 * 255.0 / mse));
    m["ssim"] = nullptr;
    m["ssim_protocol"] = "skipped: reconstruction over the memory cap";
    return m;
}

json trace_json(const TraceRecord& r) {
    json j;
    j["t"] = r.t;
    j["F"] = r.objective;
    j["gamma"] = r.gamma;
    j["k_star"] = r.k_star;
    j["sigma_max"] = r.sigma_max;
    j["R"] = r.ranks;
    j["ssdi"] = r.ssdi;
    j["wall_ms"] = r.wall_ms;
    j["rel_change"] = r.rel_change;
    if (r.compressed) {
        j["compressed"] = true;
        j["F_before_compress"] = r.objective_before_compress;
        j["rank_before_compress"] = r.rank_before_compress;
        j["compress_fallbacks"] = r.compress_fallbacks;
    }
    return j;
}

Shape shape_for_solve(const Shape& original, const std::string& reshape) {
    if (reshape.empty()) return original;
    Shape target = parse_shape(reshape);
    if (target.numel() != original.numel())
        throw ShapeError("reshape " + reshape + " has " + std::to_string(target.numel()) + " elements, data has " +
                         std::to_string(original.numel()));
    return target;
}

std::size_t peak_ssdi(const SolverState& st) {
    std::size_t peak = 0;
    for (const auto& r : st.trace) peak = std::max(peak, r.ssdi);
    return peak;
}

bool fits(const Shape& s, std::size_t cap) {
    return static_cast<double>(s.numel()) * 8.0 <= static_cast<double>(cap);
}

}  // namespace

SolverConfig SolverFlags::config() const {
    SolverConfig c;
    c.beta = beta;
    c.d = d;
    c.r_bar = r_bar;
    c.tol = tol;
    c.t_max = t_max;
    c.seed = seed;
    c.threads = effective_threads(threads);
    return c;
}

std::size_t SolverFlags::mem_cap_bytes() const {
    if (!(mem_cap_gib > 0)) throw ParameterError("memory cap must be positive");
    return static_cast<std::size_t>(mem_cap_gib * 1024.0 * 1024.0 * 1024.0);
}

unsigned effective_threads(std::optional<unsigned> requested) {
    unsigned n = requested.value_or(1);
    if (const char* env = std::getenv("LTRNN_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1) throw ParameterError(std::string("bad LTRNN_THREADS value '") + env + "'");
        n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return std::max(1u, n);
}

int cmd_synth(const SynthOptions& o, const std::vector<std::string>& argv) {
    RunManifest man("synth", argv);
    const Shape shape = parse_shape(o.shape);
    ensure_dir(o.out_dir);

    DenseTensor truth;
    SparseTensor observed;
    if (o.kind == "latent") {
        SyntheticData data = gen_latent_lowrank({shape, o.d, o.rank, o.missing, o.seed});
        truth = std::move(data.truth);
        observed = std::move(data.observed);
    } else if (o.kind == "volume" || o.kind == "tr") {
        if (o.kind == "volume") {
            truth = smooth_volume(shape, o.seed);
        } else {
            std::vector<Index> ranks(shape.order(), o.rank);
            truth = tr_tensor(shape, ranks, o.seed);
        }
        observed = truth.restrict_to(sample_support(shape.numel(), o.missing, o.seed));
    } else {
        throw ParameterError("unknown --kind '" + o.kind + "' (expected latent, volume or tr)");
    }

    const fs::path truth_path = o.out_dir / "truth.dense";
    const fs::path obs_path = o.out_dir / "observed.sparse";
    save_dense(truth_path, truth);
    save_sparse(obs_path, observed);
    man.add_output("truth", truth_path);
    man.add_output("observations", obs_path);
    man.set("kind", o.kind);
    man.set("shape", shape_json(shape));
    man.set("rank", o.rank);
    man.set("d", o.d == 0 ? shape.order() / 2 : o.d);
    man.set("missing_ratio", o.missing);
    man.set("seed", o.seed);
    man.set("observed_count", observed.nnz());
    man.write(o.out_dir / "manifest.json");
    std::cout << "wrote " << observed.nnz() << " observations of " << shape.numel() << " entries to "
              << o.out_dir.string() << '\n';
    return kOk;
}

int cmd_complete(const CompleteOptions& o, const std::vector<std::string>& argv) {
    RunManifest man("complete", argv);
    SparseTensor observed = load_sparse(o.observations);
    man.add_input("observations", o.observations);
    const Shape original = observed.shape();
    if (!o.shape.empty() && !(parse_shape(o.shape) == original))
        throw ShapeError("--shape " + o.shape + " does not match the observation file");
    std::optional<DenseTensor> truth;
    if (o.truth) {
        truth = load_dense(*o.truth);
        man.add_input("truth", *o.truth);
        if (!(truth->shape() == original)) throw ShapeError("truth and observations have different shapes");
    }
    const Shape solve_shape = shape_for_solve(original, o.reshape);
    if (!o.reshape.empty()) observed = reshape(observed, solve_shape);
    man.set("shape", shape_json(original));
    man.set("solve_shape", shape_json(solve_shape));
    const std::size_t cap = o.solver.mem_cap_bytes();
    man.set("memory_cap_bytes", cap);

    ensure_dir(o.out_dir);
    const fs::path trace_path = o.out_dir / "trace.jsonl";
    std::ofstream trace(trace_path);
    if (!trace) throw IoError("cannot open '" + trace_path.string() + "' for writing");
    man.add_output("trace", trace_path);

    const SolverConfig cfg = o.solver.config().resolved(observed);
    man.set_solver(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    SolverState st = solve(observed, cfg, [&](const TraceRecord& r) {
        trace << trace_json(r).dump() << '\n';
        trace.flush();
        if (!o.quiet && (r.t % 10 == 0 || r.t == 1))
            std::cerr << "iter " << r.t << "  F " << r.objective << "  k* " << r.k_star << "  R " << json(r.ranks).dump()
                      << '\n';
    });
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!trace) throw IoError("write failed for '" + trace_path.string() + "'");

    const fs::path basis_path = o.out_dir / "basis.ltb";
    save_basis(basis_path, st.basis);
    man.add_output("basis", basis_path);

    json metrics;
    if (fits(original, cap)) {
        DenseTensor rec = reshape(reconstruct(st.basis, cap), original);
        const fs::path rec_path = o.out_dir / "recovered.dense";
        save_dense(rec_path, rec);
        man.add_output("recovered", rec_path);
        if (truth) metrics = dense_metrics(rec, *truth);
    } else {
        // Over the cap: keep the basis and one lazily evaluated slice over the first two modes.
        std::vector<std::optional<Index>> fixed(solve_shape.order(), Index{0});
        fixed[0] = fixed[1] = std::nullopt;
        const fs::path slice_path = o.out_dir / "recovered_slice.dense";
        save_dense(slice_path, reconstruct_slice(st.basis, fixed, cap));
        man.add_output("recovered_slice", slice_path);
        if (truth) metrics = lazy_metrics(st.basis, *truth);
        metrics["reconstruction"] = "lazy";
    }
    metrics["ssdi"] = st.basis.ssdi(observed.nnz());
    metrics["ssdi_peak"] = peak_ssdi(st);
    metrics["runtime_s"] = runtime;
    metrics["iterations"] = st.iter;
    metrics["converged"] = st.converged;
    metrics["stop_reason"] = st.stop_reason;
    metrics["beta"] = *cfg.beta;
    metrics["d"] = *cfg.d;
    if (!st.trace.empty()) metrics["final_objective"] = st.trace.back().objective;
    const fs::path metrics_path = o.out_dir / "metrics.json";
    write_json(metrics_path, metrics);
    man.add_output("metrics", metrics_path);
    man.write(o.out_dir / "manifest.json");

    std::cout << metrics.dump(2) << '\n';
    return st.converged ? kOk : kNotConverged;
}

int cmd_eval(const EvalOptions& o, const std::vector<std::string>& argv) {
    RunManifest man("eval", argv);
    DenseTensor est = load_dense(o.estimate), truth = load_dense(o.truth);
    man.add_input("estimate", o.estimate);
    man.add_input("truth", o.truth);
    if (!(est.shape() == truth.shape())) throw ShapeError("estimate and truth have different shapes");
    json m = dense_metrics(est, truth);
    if (o.basis) {
        if (!o.observations) throw ParameterError("--basis needs --obs to count the observed entries");
        BasisFactorSet basis = load_basis(*o.basis);
        m["ssdi"] = basis.ssdi(load_sparse(*o.observations).nnz());
        man.add_input("basis", *o.basis);
        man.add_input("observations", *o.observations);
    }
    if (o.out) {
        write_json(*o.out, m);
        man.add_output("metrics", *o.out);
        fs::path mp = *o.out;
        mp += ".manifest.json";
        man.write(mp);
    }
    std::cout << m.dump(2) << '\n';
    return kOk;
}

int cmd_mask(const MaskOptions& o, const std::vector<std::string>& argv) {
    RunManifest man("mask", argv);
    DenseTensor full = load_dense(o.input);
    SparseTensor obs = full.restrict_to(sample_support(full.shape().numel(), o.missing, o.seed));
    save_sparse(o.out, obs);
    man.add_input("tensor", o.input);
    man.add_output("observations", o.out);
    man.set("missing_ratio", o.missing);
    man.set("seed", o.seed);
    man.set("observed_count", obs.nnz());
    fs::path mp = o.out;
    mp += ".manifest.json";
    man.write(mp);
    std::cout << "kept " << obs.nnz() << " of " << full.shape().numel() << " entries\n";
    return kOk;
}

int cmd_image(const ImageOptions& o, const std::vector<std::string>& argv) {
    RunManifest man("image", argv);
    man.add_input("input", o.input);
    man.set("direction", o.direction);
    man.set("layout", "(height, width[, channel[, frame]]); pixel (y, x, c) at y + H*(x + W*c); 0-255");
    if (o.direction == "to-tensor") {
        DenseTensor t = fs::is_directory(o.input) ? load_png_sequence(o.input) : image_to_tensor(load_png(o.input));
        save_dense(o.out, t);
        man.set("shape", shape_json(t.shape()));
        std::cout << "shape " << json(t.shape().dims()).dump() << '\n';
    } else if (o.direction == "to-png") {
        DenseTensor t = load_dense(o.input);
        if (t.shape().order() == 4) {
            save_png_sequence(o.out, t);
        } else {
            save_png(o.out, tensor_to_image(t));
        }
        man.set("shape", shape_json(t.shape()));
    } else {
        throw ParameterError("unknown direction '" + o.direction + "' (expected to-tensor or to-png)");
    }
    man.add_output("output", o.out);
    fs::path mp = fs::is_directory(o.out) ? o.out / "manifest.json" : fs::path(o.out.string() + ".manifest.json");
    man.write(mp);
    return kOk;
}

int cmd_bench(const BenchOptions& o, const std::vector<std::string>& argv) {
    RunManifest man("bench", argv);
    DenseTensor truth = load_dense(o.truth);
    man.add_input("truth", o.truth);
    if (o.missing.empty() || o.reshapes.empty()) throw ParameterError("bench needs --missing and --reshape");
    const std::size_t cap = o.solver.mem_cap_bytes();

    std::ofstream csv(o.out);
    if (!csv) throw IoError("cannot open '" + o.out.string() + "' for writing");
    csv << "reshape,order,missing,RSE,PSNR_dB,SSIM,SSDI,RunTime_s,iterations,converged,beta,error\n";
    json rows = json::array();
    int failures = 0;
    for (const std::string& spec : o.reshapes) {
        for (double missing : o.missing) {
            std::string err;
            json row{{"reshape", spec}, {"missing", missing}};
            try {
                const Shape solve_shape = shape_for_solve(truth.shape(), spec);
                // Same mask for every reshape at a given ratio.
                SparseTensor obs = reshape(truth.restrict_to(sample_support(truth.shape().numel(), missing, o.mask_seed)),
                                           solve_shape);
                const SolverConfig cfg = o.solver.config().resolved(obs);
                const auto t0 = std::chrono::steady_clock::now();
                SolverState st = solve(obs, cfg);
                const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                json m = fits(truth.shape(), cap) ? dense_metrics(reshape(reconstruct(st.basis, cap), truth.shape()), truth)
                                                  : lazy_metrics(st.basis, truth);
                const double ssim_v = m["ssim"].is_null() ? std::nan("") : m["ssim"].get<double>();
                const double psnr_v = m["psnr_db"].is_string() ? std::numeric_limits<double>::infinity()
                                                               : m["psnr_db"].get<double>();
                csv << '"' << spec << "\"," << solve_shape.order() << ',' << exact(missing) << ','
                    << exact(m["rse"].get<double>()) << ',' << exact(psnr_v) << ',' << exact(ssim_v) << ','
                    << peak_ssdi(st) << ',' << exact(runtime) << ',' << st.iter << ',' << (st.converged ? 1 : 0)
                    << ',' << exact(*cfg.beta) << ",\n";
                row["metrics"] = m;
                row["ssdi_peak"] = peak_ssdi(st);
                row["runtime_s"] = runtime;
                row["iterations"] = st.iter;
                row["converged"] = st.converged;
                row["solver"] = solver_json(cfg);
            } catch (const Error& e) {
                ++failures;
                err = e.what();
                std::replace(err.begin(), err.end(), '"', '\'');
                csv << '"' << spec << "\",," << exact(missing) << ",,,,,,,,,\"" << err << "\"\n";
                row["error"] = err;
            }
            csv.flush();
            rows.push_back(row);
            std::cerr << "bench " << spec << " missing " << missing << (err.empty() ? " done" : " failed: " + err) << '\n';
        }
    }
    if (!csv) throw IoError("write failed for '" + o.out.string() + "'");
    man.add_output("table", o.out);
    man.set("mask_seed", o.mask_seed);
    man.set("rows", rows);
    man.set("ssdi_column", "peak SSDI over all iterations");
    man.set("ssim_protocol", kSsimProtocol);
    fs::path mp = o.out;
    mp += ".manifest.json";
    man.write(mp);
    return failures == static_cast<int>(rows.size()) ? kFailure : kOk;
}

int cmd_slice(const SliceOptions& o, const std::vector<std::string>& argv) {
    RunManifest man("slice", argv);
    BasisFactorSet basis = load_basis(o.basis);
    man.add_input("basis", o.basis);
    const Shape view = o.view_shape.empty() ? basis.shape() : parse_shape(o.view_shape);
    if (view.numel() != basis.shape().numel()) throw ShapeError("view shape has a different element count");

    std::vector<std::optional<Index>> fixed(view.order());
    for (const std::string& f : o.fixed) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) throw ParameterError("--fix expects mode=index, got '" + f + "'");
        const auto mode = static_cast<std::size_t>(std::stoul(f.substr(0, eq)));
        const Index idx = std::stoll(f.substr(eq + 1));
        if (mode >= view.order()) throw ParameterError("--fix mode " + std::to_string(mode) + " out of range");
        if (idx < 0 || idx >= view.dim(mode)) throw BoundsError("--fix index out of range in '" + f + "'");
        fixed[mode] = idx;
    }
    std::vector<Index> free_dims;
    std::vector<std::size_t> free_modes;
    for (std::size_t n = 0; n < view.order(); ++n)
        if (!fixed[n]) {
            free_modes.push_back(n);
            free_dims.push_back(view.dim(n));
        }
    if (free_modes.size() < 2) throw ParameterError("a slice needs at least two free modes");
    const Shape out_shape(free_dims);

    // Lazy evaluation at the slice's positions in the view shape.
    std::vector<Index> idx(static_cast<std::size_t>(out_shape.numel()));
    MultiIndex sub(out_shape.order()), full(view.order());
    for (Index l = 0; l < out_shape.numel(); ++l) {
        out_shape.delinearize(l, sub);
        for (std::size_t n = 0; n < view.order(); ++n) full[n] = fixed[n].value_or(0);
        for (std::size_t j = 0; j < free_modes.size(); ++j) full[free_modes[j]] = sub[j];
        idx[static_cast<std::size_t>(l)] = view.linearize(full);
    }
    DenseTensor slice(out_shape, reconstruct_at(basis, idx));
    if (o.out.extension() == ".png") {
        save_png(o.out, tensor_to_image(slice));
    } else {
        save_dense(o.out, slice);
    }
    man.add_output("slice", o.out);
    man.set("view_shape", shape_json(view));
    man.set("slice_shape", shape_json(out_shape));
    fs::path mp = o.out;
    mp += ".manifest.json";
    man.write(mp);
    return kOk;
}

}  // namespace ltrnn::cli
