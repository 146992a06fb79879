#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ltrnn/tensor.hpp"
#include "ltrnn/unfolding.hpp"

namespace ltrnn {

/// Rank-R factors (U, Sigma, V) of one mode's component, stored column by
/// column so appending an atom never copies the existing columns.
struct ModeFactors {
    std::vector<Eigen::VectorXd> u;  ///< each of length m_k
    std::vector<Eigen::VectorXd> v;  ///< each of length n_k
    std::vector<double> sigma;       ///< nonnegative weights

    [[nodiscard]] std::size_t rank() const noexcept { return sigma.size(); }
};

/// Per-mode factors whose folded sum X = sum_k fold_k(U_k Sigma_k V_k^T)
/// is the solver iterate. The full tensor is never formed here.
class BasisFactorSet {
public:
    BasisFactorSet(Shape shape, std::size_t d);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t depth() const noexcept { return d_; }
    [[nodiscard]] std::size_t order() const noexcept { return modes_.size(); }
    [[nodiscard]] const CircularUnfolding& unfolding(std::size_t k) const { return unfoldings_.at(k); }
    [[nodiscard]] const ModeFactors& mode(std::size_t k) const { return modes_.at(k); }
    [[nodiscard]] ModeFactors& mode(std::size_t k) { return modes_.at(k); }

    [[nodiscard]] std::vector<std::size_t> ranks() const;
    [[nodiscard]] std::size_t total_rank() const;
    /// Sum of all Sigma entries; an upper bound on the latent norm of X.
    [[nodiscard]] double sigma_l1() const;

    void append(std::size_t k, Eigen::VectorXd u, Eigen::VectorXd v, double sigma);
    /// Multiplies every Sigma entry of every mode by c.
    void scale(double c);
    /// Drops columns whose weight is below threshold. Returns how many were dropped.
    std::size_t prune(double threshold);

    /// sum_k (m_k R_k + R_k + n_k R_k) + omega_count, from the rank counters.
    [[nodiscard]] std::size_t ssdi(std::size_t omega_count) const;
    /// Same quantity recounted from the lengths of the stored vectors.
    [[nodiscard]] std::size_t allocated_entries() const;

    /// X at one linear index.
    [[nodiscard]] double value_at(Index linear) const;
    /// Mode k's contribution fold_k(U_k Sigma_k V_k^T) at one linear index.
    [[nodiscard]] double mode_value_at(std::size_t k, Index linear) const;
    /// out[i] += sign * (mode k contribution at support[i]).
    void accumulate_mode(std::size_t k, const Support& support, std::span<double> out, double sign = 1.0) const;
    /// X restricted to the support.
    [[nodiscard]] std::vector<double> evaluate_on(const Support& support) const;

private:
    Shape shape_;
    std::size_t d_;
    std::vector<CircularUnfolding> unfoldings_;
    std::vector<ModeFactors> modes_;
};

}  // namespace ltrnn
