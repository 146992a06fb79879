#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ltrnn/shape.hpp"

namespace ltrnn {

/// Anything exposing y = M x and z = M^T y.
template <typename Op>
concept LinearOperator = requires(const Op& op, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    { op.rows() } -> std::convertible_to<Index>;
    { op.cols() } -> std::convertible_to<Index>;
    op.apply(x, y);
    op.apply_transpose(x, y);
};

/// Dense matrix adapter, mostly for tests and small problems.
class DenseOperator {
public:
    explicit DenseOperator(Eigen::MatrixXd m) : m_(std::move(m)) {}
    [[nodiscard]] Index rows() const noexcept { return m_.rows(); }
    [[nodiscard]] Index cols() const noexcept { return m_.cols(); }
    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const { y.noalias() = m_ * x; }
    void apply_transpose(const Eigen::VectorXd& x, Eigen::VectorXd& y) const { y.noalias() = m_.transpose() * x; }

private:
    Eigen::MatrixXd m_;
};

struct SingularTriplet {
    double sigma = 0.0;
    Eigen::VectorXd u;
    Eigen::VectorXd v;
};

struct PowerOptions {
    int max_iters = 50;
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

struct PowerResult {
    SingularTriplet triplet;
    int iterations = 0;
    bool converged = false;
    /// Set when M is identically zero; sigma is 0 and u, v are arbitrary unit vectors.
    bool zero_matrix = false;
    /// sigma estimate after each iteration (non-decreasing in exact arithmetic).
    std::vector<double> sigma_history;
};

/// Seeded standard-normal start vector of length n, normalized.
Eigen::VectorXd random_unit_vector(Index n, std::uint64_t seed);

/// Flips (u, v) together so the first nonzero component of u is positive.
/// Components below 1e-12 of the largest magnitude count as zero.
void canonicalize_signs(SingularTriplet& t);

/// Top singular triplet by alternating power iteration
/// u <- M v / |M v|, v <- M^T u / |M^T u|, started from a seeded random v.
/// Stops once the relative change of sigma drops below tol or after
/// max_iters rounds.
template <LinearOperator Op>
PowerResult rank_one_svd(const Op& m, const PowerOptions& opt = {}) {
    const Index rows = m.rows();
    const Index cols = m.cols();
    Eigen::VectorXd u(rows), v = random_unit_vector(cols, opt.seed), mtu(cols);
    PowerResult res;
    double sigma = 0.0;
    for (int it = 0; it < opt.max_iters; ++it) {
        m.apply(v, u);
        const double un = u.norm();
        if (un == 0.0) break;
        u /= un;
        m.apply_transpose(u, mtu);
        const double next = mtu.norm();
        if (next == 0.0) break;
        v = mtu / next;
        res.iterations = it + 1;
        res.sigma_history.push_back(next);
        const bool done = it > 0 && std::abs(next - sigma) <= opt.tol * next;
        sigma = next;
        if (done) {
            res.converged = true;
            break;
        }
    }
    if (sigma == 0.0) {
        res.zero_matrix = true;
        res.triplet.sigma = 0.0;
        res.triplet.u = Eigen::VectorXd::Unit(rows, 0);
        res.triplet.v = Eigen::VectorXd::Unit(cols, 0);
        return res;
    }
    res.triplet.sigma = sigma;
    res.triplet.u = std::move(u);
    res.triplet.v = std::move(v);
    canonicalize_signs(res.triplet);
    return res;
}

struct QrResult {
    Eigen::MatrixXd q;  ///< m x p, orthonormal columns, p = min(m, r)
    Eigen::MatrixXd r;  ///< p x r, upper triangular
};

/// Thin Householder QR.
QrResult thin_qr(const Eigen::MatrixXd& a);

struct SvdResult {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;  ///< descending
    Eigen::MatrixXd v;
};

/// Full SVD of a small dense matrix.
SvdResult dense_svd(const Eigen::MatrixXd& j);

/// Euclidean projection of a nonnegative vector onto {s >= 0, sum(s) <= radius}.
Eigen::VectorXd project_l1_ball_nonneg(const Eigen::VectorXd& s, double radius);

}  // namespace ltrnn
