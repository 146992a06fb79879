#include "ltrnn/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ltrnn/errors.hpp"

namespace ltrnn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

void require_same_support(const SparseTensor& a, const SparseTensor& b, const char* what) {
    if (!(a.shape() == b.shape())) throw ShapeError(std::string(what) + ": shape mismatch");
    if (!a.support().same_as(b.support())) throw SupportError(std::string(what) + ": support mismatch");
}

}  // namespace

double default_beta(const SparseTensor& t_omega, std::size_t d) {
    const auto& shape = t_omega.shape();
    if (t_omega.nnz() == 0) throw ParameterError("cannot derive beta from an empty observation set");
    const double fill = static_cast<double>(shape.numel()) / static_cast<double>(t_omega.nnz());
    Index side = std::numeric_limits<Index>::max();
    for (std::size_t k = 0; k < shape.order(); ++k) {
        CircularUnfolding u(shape, k, d);
        side = std::min({side, u.rows(), u.cols()});
    }
    return t_omega.frobenius_norm() * std::sqrt(fill) * std::sqrt(static_cast<double>(side));
}

SolverConfig SolverConfig::resolved(const SparseTensor& t_omega) const {
    SolverConfig c = *this;
    const std::size_t order = t_omega.shape().order();
    if (!c.d) c.d = order / 2;
    if (*c.d < 1 || *c.d >= order)
        throw ParameterError("d=" + std::to_string(*c.d) + " must satisfy 1 <= d < N=" + std::to_string(order));
    if (!c.r_bar) c.r_bar = 25 * order;
    if (*c.r_bar < order) throw ParameterError("r_bar must be >= N");
    if (!c.beta) {
        c.beta = default_beta(t_omega, *c.d);
        if (*c.beta == 0.0) c.beta = 1.0;  // all-zero observations
    }
    if (!(*c.beta > 0.0) || !std::isfinite(*c.beta)) throw ParameterError("beta must be positive");
    if (!(c.tol > 0.0)) throw ParameterError("tol must be positive");
    if (c.t_max < 1) throw ParameterError("t_max must be >= 1");
    if (c.power_iters < 1) throw ParameterError("power_iters must be >= 1");
    if (c.threads == 0) c.threads = 1;
    return c;
}

SolverState::SolverState(SparseTensor observations, SolverConfig cfg)
    : config(cfg.resolved(observations)),
      t_omega(std::move(observations)),
      x_omega(SparseTensor::zeros(t_omega.shape(), t_omega.support())),
      basis(t_omega.shape(), *config.d) {}

double objective(const SparseTensor& x, const SparseTensor& t) {
    require_same_support(x, t, "objective");
    auto xv = x.values();
    auto tv = t.values();
    double s = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) {
        const double r = xv[i] - tv[i];
        s += r * r;
    }
    return 0.5 * s;
}

SparseTensor gradient(const SolverState& state) {
    return sparse_axpy(1.0, state.x_omega, -1.0, state.t_omega);
}

std::uint64_t power_seed(std::uint64_t base, int t, std::size_t k) {
    return splitmix64(splitmix64(base) ^ (static_cast<std::uint64_t>(t) * 1024u + k));
}

AtomChoice select_atom_negated(const SparseTensor& neg_g, const SolverConfig& cfg, int t) {
    if (!cfg.d) throw ParameterError("select_atom needs a resolved config");
    const auto& shape = neg_g.shape();
    AtomChoice best;
    best.zero_gradient = true;
    double best_sigma = -1.0;
    for (std::size_t k = 0; k < shape.order(); ++k) {
        CircularUnfolding uf(shape, k, *cfg.d);
        SparseMatrixView view(neg_g, uf, cfg.threads);
        PowerOptions opt{cfg.power_iters, cfg.power_tol, power_seed(cfg.seed, t, k)};
        PowerResult pr = rank_one_svd(view, opt);
        best.mode_sigmas.push_back(pr.triplet.sigma);
        if (!pr.zero_matrix) best.zero_gradient = false;
        if (pr.triplet.sigma > best_sigma) {
            best_sigma = pr.triplet.sigma;
            best.k_star = k;
            best.triplet = std::move(pr.triplet);
        }
    }
    return best;
}

AtomChoice select_atom(const SparseTensor& g, const SolverConfig& cfg, int t) {
    std::vector<double> neg(g.values().begin(), g.values().end());
    for (double& v : neg) v = -v;
    return select_atom_negated(g.with_values(std::move(neg)), cfg, t);
}

SparseTensor atom_to_sparse(const SingularTriplet& triplet, std::size_t k_star, const SolverConfig& cfg,
                            const Shape& shape, const Support& support) {
    if (!cfg.beta || !cfg.d) throw ParameterError("atom_to_sparse needs a resolved config");
    CircularUnfolding uf(shape, k_star, *cfg.d);
    return fold_rank_one_at(uf, *cfg.beta, triplet.u, triplet.v, support);
}

double line_search(const SparseTensor& x, const SparseTensor& s, const SparseTensor& t) {
    require_same_support(x, s, "line_search");
    require_same_support(x, t, "line_search");
    auto xv = x.values();
    auto sv = s.values();
    auto tv = t.values();
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) {
        const double dir = sv[i] - xv[i];
        a += dir * dir;
        b += (xv[i] - tv[i]) * dir;
    }
    b *= 2.0;
    if (a == 0.0) return 0.0;
    const double g = -b / (2.0 * a);
    return std::clamp(g, 0.0, 1.0);
}

void apply_update(SolverState& state, std::size_t k_star, const SingularTriplet& triplet, double gamma,
                  const SparseTensor& s_omega) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("step size must lie in [0, 1]");
    require_same_support(state.x_omega, s_omega, "apply_update");
    const double beta = *state.config.beta;
    auto xv = state.x_omega.mutable_values();
    auto sv = s_omega.values();
    for (std::size_t i = 0; i < xv.size(); ++i) xv[i] = (1.0 - gamma) * xv[i] + gamma * sv[i];
    state.basis.scale(1.0 - gamma);
    state.basis.append(k_star, triplet.u, triplet.v, gamma * beta);
    state.basis.prune(state.config.prune_rel * beta);
}

int CompressionReport::fallbacks() const {
    int n = 0;
    for (const auto& m : modes) n += m.fallback ? 1 : 0;
    return n;
}

namespace {

// Sampling operator of one mode inside the compression step:
//   A(J)_i = Q_U(row_i, :) J Q_V(col_i, :)^T   for i in Omega.
// Q_U and Q_V are stored transposed so each row is a contiguous column.
class CoreSampler {
public:
    CoreSampler(const CircularUnfolding& uf, const Support& support, Eigen::MatrixXd qut, Eigen::MatrixXd qvt)
        : qut_(std::move(qut)), qvt_(std::move(qvt)), rows_side_(uf.rows() <= uf.cols()) {
        row_.resize(support.size());
        col_.resize(support.size());
        for (std::size_t i = 0; i < support.size(); ++i) {
            const auto rc = uf.coords_of_linear(support[i]);
            row_[i] = static_cast<std::uint32_t>(rc.row);
            col_[i] = static_cast<std::uint32_t>(rc.col);
        }
    }

    [[nodiscard]] Index core_rows() const { return qut_.rows(); }
    [[nodiscard]] Index core_cols() const { return qvt_.rows(); }

    /// out_i = A(J)_i
    void apply(const Eigen::MatrixXd& j, std::span<double> out) const {
        if (rows_side_) {
            const Eigen::MatrixXd lt = j.transpose() * qut_;  // (Q_U J)^T, p_v x m
            for (std::size_t i = 0; i < row_.size(); ++i) out[i] = lt.col(row_[i]).dot(qvt_.col(col_[i]));
        } else {
            const Eigen::MatrixXd rt = j * qvt_;  // J Q_V^T, p_u x n
            for (std::size_t i = 0; i < row_.size(); ++i) out[i] = qut_.col(row_[i]).dot(rt.col(col_[i]));
        }
    }

    /// A^*(r) = Q_U^T M_r Q_V, where M_r is the sparse unfolded residual.
    [[nodiscard]] Eigen::MatrixXd adjoint(std::span<const double> r) const {
        if (rows_side_) {
            Eigen::MatrixXd wt = Eigen::MatrixXd::Zero(qvt_.rows(), qut_.cols());  // (M Q_V)^T
            for (std::size_t i = 0; i < row_.size(); ++i) wt.col(row_[i]) += r[i] * qvt_.col(col_[i]);
            return qut_ * wt.transpose();
        }
        Eigen::MatrixXd zt = Eigen::MatrixXd::Zero(qut_.rows(), qvt_.cols());  // (M^T Q_U)^T
        for (std::size_t i = 0; i < row_.size(); ++i) zt.col(col_[i]) += r[i] * qut_.col(row_[i]);
        return zt * qvt_.transpose();
    }

    /// Residual b + A(J) - t and its squared norm / 2, with gradient A^*(residual).
    double value_and_gradient(const Eigen::MatrixXd& j, std::span<const double> b, std::span<const double> t,
                              std::span<double> scratch, Eigen::MatrixXd* grad) const {
        apply(j, scratch);
        double f = 0.0;
        for (std::size_t i = 0; i < scratch.size(); ++i) {
            scratch[i] = b[i] + scratch[i] - t[i];
            f += scratch[i] * scratch[i];
        }
        if (grad) *grad = adjoint(scratch);
        return 0.5 * f;
    }

    const Eigen::MatrixXd& qut() const { return qut_; }
    const Eigen::MatrixXd& qvt() const { return qvt_; }

private:
    Eigen::MatrixXd qut_, qvt_;
    bool rows_side_;
    std::vector<std::uint32_t> row_, col_;
};

Eigen::MatrixXd project_nuclear_ball(const Eigen::MatrixXd& j, double radius) {
    SvdResult svd = dense_svd(j);
    if (svd.s.sum() <= radius) return j;
    const Eigen::VectorXd s = project_l1_ball_nonneg(svd.s, radius);
    const Index p = s.size();
    return svd.u.leftCols(p) * s.asDiagonal() * svd.v.leftCols(p).transpose();
}

// Largest eigenvalue of A^*A by a few power steps on the core space.
double estimate_lipschitz(const CoreSampler& a, std::size_t nnz, std::uint64_t seed) {
    Eigen::VectorXd start = random_unit_vector(a.core_rows() * a.core_cols(), seed);
    Eigen::MatrixXd j = Eigen::Map<Eigen::MatrixXd>(start.data(), a.core_rows(), a.core_cols());
    std::vector<double> buf(nnz);
    double l = 0.0;
    for (int it = 0; it < 15; ++it) {
        a.apply(j, buf);
        Eigen::MatrixXd next = a.adjoint(buf);
        l = next.norm();
        if (l == 0.0) return 0.0;
        j = next / l;
    }
    return l;
}

ModeCompression compress_mode(SolverState& st, std::size_t k) {
    auto& basis = st.basis;
    auto& mf = basis.mode(k);
    const auto& uf = basis.unfolding(k);
    const Support& support = st.t_omega.support();
    const double beta = *st.config.beta;
    ModeCompression rep;
    rep.rank_before = mf.rank();

    // x_omega currently equals the full iterate; turn it into B_k.
    auto b = st.x_omega.mutable_values();
    basis.accumulate_mode(k, support, b, -1.0);

    const Index r = static_cast<Index>(mf.rank());
    Eigen::MatrixXd qut, qvt, j0;
    {
        Eigen::MatrixXd um(uf.rows(), r), vm(uf.cols(), r);
        Eigen::VectorXd sig(r);
        for (Index c = 0; c < r; ++c) {
            um.col(c) = mf.u[c];
            vm.col(c) = mf.v[c];
            sig[c] = mf.sigma[c];
            mf.u[c] = Eigen::VectorXd();
            mf.v[c] = Eigen::VectorXd();
        }
        mf = ModeFactors{};
        QrResult qu = thin_qr(um);
        um.resize(0, 0);
        QrResult qv = thin_qr(vm);
        vm.resize(0, 0);
        j0 = qu.r * sig.asDiagonal() * qv.r.transpose();
        qut = qu.q.transpose();
        qu.q.resize(0, 0);
        qvt = qv.q.transpose();
    }
    CoreSampler sampler(uf, support, std::move(qut), std::move(qvt));

    auto tv = st.t_omega.values();
    std::vector<double> scratch(support.size());
    const double radius = dense_svd(j0).s.sum();

    Eigen::MatrixXd grad;
    double f0 = sampler.value_and_gradient(j0, b, tv, scratch, &grad);
    rep.objective_before = f0;
    Eigen::MatrixXd best = j0;
    double best_f = f0;

    const double lip = estimate_lipschitz(sampler, support.size(), power_seed(st.config.seed, st.iter, k) ^ 0x5bd1e995u);
    if (lip > 0.0 && std::isfinite(lip)) {
        const double step = 1.0 / lip;
        Eigen::MatrixXd j = j0;
        for (int it = 0; it < st.config.compress_inner_iters; ++it) {
            j = project_nuclear_ball(j - step * grad, radius);
            const double f = sampler.value_and_gradient(j, b, tv, scratch, &grad);
            if (!std::isfinite(f) || !j.allFinite()) {
                rep.fallback = true;
                best = j0;
                best_f = f0;
                break;
            }
            if (f < best_f) {
                best_f = f;
                best = j;
            }
        }
    } else if (!std::isfinite(lip)) {
        rep.fallback = true;
    }

    SvdResult svd = dense_svd(best);
    const double cutoff = st.config.prune_rel * beta;
    Index keep = 0;
    while (keep < svd.s.size() && svd.s[keep] >= cutoff) ++keep;
    // Exact zeros are rare once the inner solve has run, so also drop the
    // trailing singular values whose removal keeps F at or below its value
    // before this mode was touched. Bisection on the kept count.
    if (keep > 0 && best_f <= f0) {
        auto truncated_f = [&](Index r) {
            const Eigen::MatrixXd jr =
                svd.u.leftCols(r) * svd.s.head(r).asDiagonal() * svd.v.leftCols(r).transpose();
            return sampler.value_and_gradient(jr, b, tv, scratch, nullptr);
        };
        Index lo = 0, hi = keep;  // truncated_f(hi) <= f0 holds
        while (lo < hi) {
            const Index mid = (lo + hi) / 2;
            if (truncated_f(mid) <= f0)
                hi = mid;
            else
                lo = mid + 1;
        }
        keep = hi;
    }
    for (Index c = 0; c < keep; ++c) {
        mf.u.push_back(sampler.qut().transpose() * svd.u.col(c));
        mf.v.push_back(sampler.qvt().transpose() * svd.v.col(c));
        mf.sigma.push_back(svd.s[c]);
    }
    rep.rank_after = mf.rank();

    basis.accumulate_mode(k, support, b, 1.0);
    rep.objective_after = objective(st.x_omega, st.t_omega);
    return rep;
}

}  // namespace

CompressionReport compress_basis(SolverState& state) {
    CompressionReport rep;
    // Rebuild X_Omega from the basis so every B_k below is exact.
    {
        auto fresh = state.basis.evaluate_on(state.t_omega.support());
        auto xv = state.x_omega.mutable_values();
        std::copy(fresh.begin(), fresh.end(), xv.begin());
    }
    rep.objective_before = objective(state.x_omega, state.t_omega);
    for (std::size_t k = 0; k < state.basis.order(); ++k) {
        if (state.basis.mode(k).rank() == 0) {
            rep.modes.push_back({});
            continue;
        }
        rep.modes.push_back(compress_mode(state, k));
    }
    rep.objective_after = objective(state.x_omega, state.t_omega);
    return rep;
}

SolverState solve(SparseTensor t_omega, const SolverConfig& cfg, const TraceSink& sink) {
    if (t_omega.nnz() == 0) throw ParameterError("observation set is empty");
    SolverState st(std::move(t_omega), cfg);
    const auto& c = st.config;
    const auto& support = st.t_omega.support();
    const auto& shape = st.t_omega.shape();
    const auto start = std::chrono::steady_clock::now();
    double f = objective(st.x_omega, st.t_omega);

    for (int t = 1; t <= c.t_max; ++t) {
        st.iter = t;
        TraceRecord rec;
        rec.t = t;

        AtomChoice atom;
        {
            SparseTensor neg = sparse_axpy(1.0, st.t_omega, -1.0, st.x_omega);
            atom = select_atom_negated(neg, c, t);
        }
        if (atom.zero_gradient || atom.triplet.sigma == 0.0) {
            rec.objective = f;
            rec.objective_before_compress = f;
            rec.ranks = st.basis.ranks();
            rec.ssdi = st.basis.ssdi(support.size());
            rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            st.trace.push_back(rec);
            if (sink) sink(rec);
            st.converged = true;
            st.stop_reason = "zero gradient";
            break;
        }
        rec.k_star = atom.k_star;
        rec.sigma_max = atom.triplet.sigma;

        const double x_norm = st.x_omega.frobenius_norm();
        // A compression can only follow when the appended atom pushes the rank
        // sum past r_bar; keep X_Omega^(t) then, to measure the exact change.
        std::vector<double> x_prev;
        if (st.basis.total_rank() + 1 > *c.r_bar) x_prev.assign(st.x_omega.values().begin(), st.x_omega.values().end());
        double step_sq = 0.0;
        {
            SparseTensor s = atom_to_sparse(atom.triplet, atom.k_star, c, shape, support);
            const double gamma = line_search(st.x_omega, s, st.t_omega);
            rec.gamma = gamma;
            auto xv = st.x_omega.values();
            auto sv = s.values();
            for (std::size_t i = 0; i < xv.size(); ++i) {
                const double step = gamma * (sv[i] - xv[i]);
                step_sq += step * step;
            }
            apply_update(st, atom.k_star, atom.triplet, gamma, s);
        }
        f = objective(st.x_omega, st.t_omega);
        rec.objective_before_compress = f;
        rec.rank_before_compress = st.basis.total_rank();

        if (st.basis.total_rank() > *c.r_bar) {
            CompressionReport cr = compress_basis(st);
            rec.compressed = true;
            rec.compress_fallbacks = cr.fallbacks();
            f = objective(st.x_omega, st.t_omega);
            auto xv = st.x_omega.values();
            step_sq = 0.0;
            for (std::size_t i = 0; i < xv.size(); ++i) step_sq += (xv[i] - x_prev[i]) * (xv[i] - x_prev[i]);
        }
        const double step_norm = std::sqrt(step_sq);

        rec.objective = f;
        rec.ranks = st.basis.ranks();
        rec.ssdi = st.basis.ssdi(support.size());
        rec.rel_change = x_norm > 0.0 ? step_norm / x_norm : step_norm;
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        st.trace.push_back(rec);
        if (sink) sink(rec);

        if (rec.rel_change <= c.tol) {
            st.converged = true;
            st.stop_reason = "tolerance";
            break;
        }
    }
    if (!st.converged) st.stop_reason = "t_max reached";
    return st;
}

DenseTensor reconstruct(const BasisFactorSet& basis, std::size_t cap_bytes) {
    const auto& shape = basis.shape();
    const double bytes = 8.0 * static_cast<double>(shape.numel());
    if (bytes > static_cast<double>(cap_bytes))
        throw MemoryCapError("dense reconstruction of " + shape.to_string() + " needs " +
                             std::to_string(static_cast<std::size_t>(bytes)) + " bytes, above the cap of " +
                             std::to_string(cap_bytes) + "; use slice extraction instead");
    DenseTensor out(shape);
    auto v = out.values();
    for (std::size_t k = 0; k < basis.order(); ++k) {
        const auto& m = basis.mode(k);
        if (m.rank() == 0) continue;
        const auto& uf = basis.unfolding(k);
        for (Index l = 0; l < shape.numel(); ++l) {
            const auto rc = uf.coords_of_linear(l);
            double s = 0.0;
            for (std::size_t j = 0; j < m.rank(); ++j) s += m.sigma[j] * m.u[j][rc.row] * m.v[j][rc.col];
            v[static_cast<std::size_t>(l)] += s;
        }
    }
    return out;
}

std::vector<double> reconstruct_at(const BasisFactorSet& basis, std::span<const Index> indices) {
    std::vector<double> out;
    out.reserve(indices.size());
    for (Index l : indices) out.push_back(basis.value_at(l));
    return out;
}

DenseTensor reconstruct_slice(const BasisFactorSet& basis, const std::vector<std::optional<Index>>& fixed,
                              std::size_t cap_bytes) {
    const auto& shape = basis.shape();
    if (fixed.size() != shape.order()) throw ParameterError("slice spec needs one entry per mode");
    std::vector<Index> free_dims;
    std::vector<std::size_t> free_modes;
    for (std::size_t n = 0; n < fixed.size(); ++n) {
        if (fixed[n]) {
            if (*fixed[n] < 0 || *fixed[n] >= shape.dim(n))
                throw BoundsError("slice coordinate out of range for mode " + std::to_string(n));
        } else {
            free_dims.push_back(shape.dim(n));
            free_modes.push_back(n);
        }
    }
    if (free_dims.size() < 2) throw ParameterError("a slice needs at least two free modes");
    Shape slice_shape(free_dims);
    if (8.0 * static_cast<double>(slice_shape.numel()) > static_cast<double>(cap_bytes))
        throw MemoryCapError("slice " + slice_shape.to_string() + " exceeds the memory cap");
    DenseTensor out(slice_shape);
    MultiIndex full(shape.order()), local(free_dims.size());
    for (std::size_t n = 0; n < fixed.size(); ++n)
        if (fixed[n]) full[n] = *fixed[n];
    for (Index l = 0; l < slice_shape.numel(); ++l) {
        slice_shape.delinearize(l, local);
        for (std::size_t j = 0; j < free_modes.size(); ++j) full[free_modes[j]] = local[j];
        out[l] = basis.value_at(shape.linearize(full));
    }
    return out;
}

}  // namespace ltrnn
