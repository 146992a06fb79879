#include <algorithm>
#include <random>

#include "doctest.h"
#include "ltrnn/linalg.hpp"
#include "ltrnn/unfolding.hpp"

using namespace ltrnn;

namespace {

// One-sided Jacobi SVD, singular values only, written independently of Eigen's solvers.
std::vector<double> jacobi_singular_values(Eigen::MatrixXd a) {
    const Index n = a.cols();
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (Index p = 0; p < n - 1; ++p)
            for (Index q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (Index i = 0; i < a.rows(); ++i) {
                    alpha += a(i, p) * a(i, p);
                    beta += a(i, q) * a(i, q);
                    gamma += a(i, p) * a(i, q);
                }
                if (gamma == 0.0) continue;
                off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
                for (Index i = 0; i < a.rows(); ++i) {
                    const double x = a(i, p), y = a(i, q);
                    a(i, p) = c * x - s * y;
                    a(i, q) = s * x + c * y;
                }
            }
        if (off < 1e-15) break;
    }
    std::vector<double> sv;
    for (Index j = 0; j < n; ++j) sv.push_back(a.col(j).norm());
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

Eigen::MatrixXd gaussian(Index m, Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(m, n);
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    return a;
}

}  // namespace

TEST_CASE("power iteration on tiny matrices") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 1.0;
    PowerResult r = rank_one_svd(DenseOperator(d), {200, 1e-14, 1});
    CHECK(r.triplet.sigma == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(r.triplet.u[0]) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.triplet.u[0] > 0);
    CHECK(r.triplet.v[0] > 0);

    Eigen::MatrixXd one = Eigen::MatrixXd::Zero(3, 3);
    one(0, 1) = 3.0;
    PowerResult s = rank_one_svd(DenseOperator(one));
    CHECK(s.triplet.sigma == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(s.triplet.u[0] == doctest::Approx(1.0));
    CHECK(s.triplet.v[1] == doctest::Approx(1.0));

    PowerResult z = rank_one_svd(DenseOperator(Eigen::MatrixXd::Zero(4, 2)));
    CHECK(z.zero_matrix);
    CHECK(z.triplet.sigma == 0.0);
    CHECK(z.triplet.u.norm() == doctest::Approx(1.0));
    CHECK(z.triplet.v.norm() == doctest::Approx(1.0));
}

TEST_CASE("power iteration on a sparse 200x300 matrix") {
    // Sparse random entries plus a planted spike so that sigma1 / sigma2 >= 1.1.
    std::mt19937_64 rng(21);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    Shape s{200, 300};
    std::vector<std::pair<Index, double>> entries;
    Eigen::VectorXd a = gaussian(200, 1, 1).col(0).normalized(), b = gaussian(300, 1, 2).col(0).normalized();
    for (Index l = 0; l < s.numel(); ++l) {
        if (unit(rng) < 0.05) entries.emplace_back(l, normal(rng) + 400.0 * a[l % 200] * b[l / 200]);
    }
    SparseTensor t(s, std::move(entries));
    CircularUnfolding uf(s, 0, 1);
    SparseMatrixView view(t, uf);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(200, 300);
    for (std::size_t i = 0; i < t.nnz(); ++i) dense(t.index(i) % 200, t.index(i) / 200) = t.values()[i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
    const auto& sv = svd.singularValues();
    REQUIRE(sv[0] / sv[1] >= 1.1);

    PowerResult r = rank_one_svd(view, {50, 1e-6, 99});
    CHECK(std::abs(r.triplet.sigma - sv[0]) <= 1e-6 * sv[0]);
    CHECK(r.triplet.u.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.triplet.v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // sigma = u^T M v
    CHECK(r.triplet.u.dot(dense * r.triplet.v) == doctest::Approx(r.triplet.sigma).epsilon(1e-12));
    for (std::size_t i = 1; i < r.sigma_history.size(); ++i)
        CHECK(r.sigma_history[i] >= r.sigma_history[i - 1] * (1 - 1e-14));
}

TEST_CASE("power iteration properties") {
    Eigen::MatrixXd m = gaussian(30, 20, 4);
    PowerResult r = rank_one_svd(DenseOperator(m), {500, 1e-13, 7});
    PowerResult scaled = rank_one_svd(DenseOperator(-3.0 * m), {500, 1e-13, 7});
    CHECK(scaled.triplet.sigma == doctest::Approx(3.0 * r.triplet.sigma).epsilon(1e-10));

    // Same seed gives the same result, bit for bit.
    PowerResult again = rank_one_svd(DenseOperator(m), {500, 1e-13, 7});
    CHECK(again.triplet.sigma == r.triplet.sigma);
    CHECK(again.triplet.u == r.triplet.u);

    // Exact rank one is recovered in a couple of steps.
    Eigen::VectorXd a = gaussian(12, 1, 5).col(0).normalized(), b = gaussian(9, 1, 6).col(0).normalized();
    PowerResult one = rank_one_svd(DenseOperator(2.5 * a * b.transpose()), {50, 1e-12, 3});
    CHECK(one.triplet.sigma == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(std::abs(one.triplet.u.dot(a)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one.iterations <= 3);

    // Sign rule: the first nonzero entry of u is positive.
    SingularTriplet t{1.0, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(2)};
    t.u << 0.0, -0.6, 0.8;
    canonicalize_signs(t);
    CHECK(t.u[1] == 0.6);
    CHECK(t.v[0] == -1.0);
}

TEST_CASE("thin QR") {
    Eigen::MatrixXd col(2, 1);
    col << 3, 4;
    QrResult q = thin_qr(col);
    CHECK(std::abs(q.q(0, 0)) == doctest::Approx(0.6));
    CHECK(std::abs(q.q(1, 0)) == doctest::Approx(0.8));
    CHECK(std::abs(q.r(0, 0)) == doctest::Approx(5.0));

    Eigen::MatrixXd a = gaussian(50, 8, 8);
    QrResult f = thin_qr(a);
    CHECK(f.q.rows() == 50);
    CHECK(f.q.cols() == 8);
    CHECK(f.r.rows() == 8);
    CHECK((f.q * f.r - a).norm() < 1e-10 * a.norm());
    CHECK((f.q.transpose() * f.q - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-10);
    CHECK(f.r.triangularView<Eigen::StrictlyLower>().toDenseMatrix().isZero(0.0));

    QrResult o = thin_qr(f.q);
    for (Index j = 0; j < 8; ++j) CHECK(std::abs(o.r(j, j)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((o.r.cwiseAbs() - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-10);

    // Rank deficiency shows up on the diagonal of R.
    Eigen::MatrixXd def = a;
    def.col(3) = def.col(1);
    QrResult fd = thin_qr(def);
    CHECK((fd.q * fd.r - def).norm() < 1e-10 * def.norm());
    CHECK(std::abs(fd.r(3, 3)) < 1e-10 * def.norm());
}

TEST_CASE("dense SVD against an independent Jacobi implementation") {
    SvdResult id = dense_svd(Eigen::MatrixXd::Identity(5, 5));
    for (Index i = 0; i < 5; ++i) CHECK(id.s[i] == doctest::Approx(1.0));
    SvdResult zero = dense_svd(Eigen::MatrixXd::Zero(4, 4));
    CHECK(zero.s.isZero(0.0));

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Eigen::MatrixXd j = gaussian(10, 10, 100 + seed);
        SvdResult r = dense_svd(j);
        CHECK((r.u * r.s.asDiagonal() * r.v.transpose() - j).norm() < 1e-10 * j.norm());
        for (Index i = 1; i < r.s.size(); ++i) CHECK(r.s[i] <= r.s[i - 1]);
        auto oracle = jacobi_singular_values(j);
        for (Index i = 0; i < 10; ++i) CHECK(std::abs(r.s[i] - oracle[static_cast<std::size_t>(i)]) < 1e-9);
    }
}

TEST_CASE("projection onto the nonnegative l1 ball") {
    Eigen::VectorXd s(4);
    s << 3, 1, 0.5, 0;
    CHECK(project_l1_ball_nonneg(s, 10) == s);
    Eigen::VectorXd p = project_l1_ball_nonneg(s, 2);
    CHECK(p.sum() == doctest::Approx(2.0));
    CHECK(p[0] == doctest::Approx(2.0));
    CHECK(p[1] == 0.0);

    // Optimality: brute-force over a fine grid of thresholds gives the same point.
    Eigen::VectorXd q(3);
    q << 0.9, 0.7, 0.2;
    Eigen::VectorXd pq = project_l1_ball_nonneg(q, 1.0);
    double best = 1e9;
    Eigen::VectorXd arg;
    for (double th = 0; th <= 1.0; th += 1e-5) {
        Eigen::VectorXd c = (q.array() - th).cwiseMax(0.0).matrix();
        if (c.sum() > 1.0 + 1e-12) continue;
        const double dist = (c - q).squaredNorm();
        if (dist < best) {
            best = dist;
            arg = c;
        }
    }
    CHECK((pq - arg).cwiseAbs().maxCoeff() < 1e-4);
}
