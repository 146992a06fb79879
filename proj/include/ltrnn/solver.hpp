#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ltrnn/basis.hpp"
#include "ltrnn/errors.hpp"
#include "ltrnn/linalg.hpp"
#include "ltrnn/tensor.hpp"

namespace ltrnn {

struct SolverConfig {
    /// Radius of the latent-norm ball. Unset: default_beta() of the observations.
    std::optional<double> beta;
    /// Unfolding depth. Unset: floor(N / 2).
    std::optional<std::size_t> d;
    /// Compression threshold on sum_k R_k. Unset: 25 * N.
    std::optional<std::size_t> r_bar;
    double tol = 1e-5;
    int t_max = 200;
    int power_iters = 50;
    double power_tol = 1e-6;
    int compress_inner_iters = 20;
    std::uint64_t seed = 0;
    /// Matvec worker threads (1 = sequential, bit-reproducible).
    unsigned threads = 1;
    /// Columns whose weight drops below prune_rel * beta are discarded.
    double prune_rel = 1e-14;

    /// Copy with every optional filled in for the given observations.
    /// Throws ParameterError when a value violates beta > 0, 1 <= d < N,
    /// r_bar >= N or tol > 0.
    [[nodiscard]] SolverConfig resolved(const SparseTensor& t_omega) const;
};

/// ||T_Omega||_F * sqrt(prod I_n / |Omega|) * sqrt(min_k min(m_k, n_k)).
double default_beta(const SparseTensor& t_omega, std::size_t d);

struct TraceRecord {
    int t = 0;
    double objective = 0.0;  ///< F after the iteration
    double gamma = 0.0;
    std::size_t k_star = 0;
    double sigma_max = 0.0;
    std::vector<std::size_t> ranks;
    std::size_t ssdi = 0;
    double wall_ms = 0.0;
    double rel_change = 0.0;
    bool compressed = false;
    /// F just before compression (equals objective when not compressed).
    double objective_before_compress = 0.0;
    std::size_t rank_before_compress = 0;
    int compress_fallbacks = 0;
};

struct SolverState {
    SolverConfig config;  ///< resolved
    SparseTensor t_omega;
    SparseTensor x_omega;
    BasisFactorSet basis;
    int iter = 0;
    bool converged = false;
    std::string stop_reason;
    std::vector<TraceRecord> trace;

    SolverState(SparseTensor observations, SolverConfig cfg);
};

/// F = 1/2 ||x - t||^2 over the shared support.
double objective(const SparseTensor& x, const SparseTensor& t);

/// grad F = P_Omega(X) - P_Omega(T), on Omega.
SparseTensor gradient(const SolverState& state);

struct AtomChoice {
    std::size_t k_star = 0;
    SingularTriplet triplet;
    /// sigma_max of -grad unfolded at each mode
    std::vector<double> mode_sigmas;
    /// -grad was identically zero; there is no descent direction.
    bool zero_gradient = false;
};

/// Seed of the power iteration for mode k at iteration t.
std::uint64_t power_seed(std::uint64_t base, int t, std::size_t k);

/// Maximizes sigma_max(-grad_<k,d>) over k. Ties go to the smallest k.
AtomChoice select_atom(const SparseTensor& g, const SolverConfig& cfg, int t = 0);
/// Same, from the negated gradient (t - x), which the solver already holds.
AtomChoice select_atom_negated(const SparseTensor& neg_g, const SolverConfig& cfg, int t = 0);

/// S_Omega = (fold_k(beta u v^T))_Omega.
SparseTensor atom_to_sparse(const SingularTriplet& triplet, std::size_t k_star, const SolverConfig& cfg,
                            const Shape& shape, const Support& support);

/// Exact minimizer over [0, 1] of F(x + gamma (s - x)).
double line_search(const SparseTensor& x, const SparseTensor& s, const SparseTensor& t);

/// x <- (1 - gamma) x + gamma s, every Sigma_k scaled by (1 - gamma), atom
/// (u, v, gamma beta) appended to mode k_star, vanished columns pruned.
void apply_update(SolverState& state, std::size_t k_star, const SingularTriplet& triplet, double gamma,
                  const SparseTensor& s_omega);

struct ModeCompression {
    std::size_t rank_before = 0;
    std::size_t rank_after = 0;
    double objective_before = 0.0;
    double objective_after = 0.0;
    bool fallback = false;  ///< inner solve failed, J0 kept
};

struct CompressionReport {
    std::vector<ModeCompression> modes;
    double objective_before = 0.0;
    double objective_after = 0.0;
    [[nodiscard]] int fallbacks() const;
};

/// Basis size reduction: per mode, re-fit the small core J inside the span
/// of the current factors with ||J||_* <= ||J0||_*, then re-factor by SVD.
/// Updates state.basis and refreshes state.x_omega from it.
CompressionReport compress_basis(SolverState& state);

using TraceSink = std::function<void(const TraceRecord&)>;

/// Frank-Wolfe completion. Starts from X = 0 and runs until the relative
/// change of X_Omega drops below tol, the gradient vanishes, or t_max.
SolverState solve(SparseTensor t_omega, const SolverConfig& cfg, const TraceSink& sink = {});

/// Thrown when a dense reconstruction would exceed the memory cap.
class MemoryCapError : public Error {
public:
    using Error::Error;
};

inline constexpr std::size_t kDefaultMemoryCap = std::size_t{4} << 30;

/// Full X = sum_k fold_k(U_k Sigma_k V_k^T). Refuses when 8 * numel exceeds cap_bytes.
DenseTensor reconstruct(const BasisFactorSet& basis, std::size_t cap_bytes = kDefaultMemoryCap);

/// X at the requested linear indices.
std::vector<double> reconstruct_at(const BasisFactorSet& basis, std::span<const Index> indices);

/// Slice with some modes fixed (set) and the rest free; free modes keep
/// their order. At least two modes must be free.
DenseTensor reconstruct_slice(const BasisFactorSet& basis, const std::vector<std::optional<Index>>& fixed,
                              std::size_t cap_bytes = kDefaultMemoryCap);

}  // namespace ltrnn
