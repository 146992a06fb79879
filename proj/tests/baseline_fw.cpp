#include "baseline_fw.hpp"

#include <algorithm>
#include <cmath>

#include "ltrnn/linalg.hpp"
#include "ltrnn/solver.hpp"

namespace ltrnn::baseline {

namespace {

struct ModeIndex {
    std::vector<std::uint32_t> row, col;
    Index rows = 0, cols = 0;
};

// Mode-k unfolding of a third-order tensor: row = i_k,
// col = i_{k+1} + I_{k+1} * i_{k+2} (mode numbers mod 3).
ModeIndex mode_index(const SparseTensor& t, std::size_t k) {
    const Index dims[3] = {t.shape().dim(0), t.shape().dim(1), t.shape().dim(2)};
    const std::size_t k1 = (k + 1) % 3, k2 = (k + 2) % 3;
    ModeIndex m;
    m.rows = dims[k];
    m.cols = dims[k1] * dims[k2];
    m.row.resize(t.nnz());
    m.col.resize(t.nnz());
    for (std::size_t e = 0; e < t.nnz(); ++e) {
        const Index l = t.index(e);
        const Index i[3] = {l % dims[0], (l / dims[0]) % dims[1], l / (dims[0] * dims[1])};
        m.row[e] = static_cast<std::uint32_t>(i[k]);
        m.col[e] = static_cast<std::uint32_t>(i[k1] + dims[k1] * i[k2]);
    }
    return m;
}

struct Top {
    double sigma = 0.0;
    Eigen::VectorXd u, v;
};

Top top_pair(const ModeIndex& m, const std::vector<double>& val, int iters, double tol, std::uint64_t seed) {
    Top r;
    Eigen::VectorXd v = random_unit_vector(m.cols, seed), u(m.rows), w(m.cols);
    double sigma = 0.0;
    for (int it = 0; it < iters; ++it) {
        u.setZero();
        for (std::size_t e = 0; e < val.size(); ++e) u[m.row[e]] += val[e] * v[m.col[e]];
        const double un = u.norm();
        if (un == 0.0) break;
        u /= un;
        w.setZero();
        for (std::size_t e = 0; e < val.size(); ++e) w[m.col[e]] += val[e] * u[m.row[e]];
        const double wn = w.norm();
        if (wn == 0.0) break;
        v = w / wn;
        const bool stop = it > 0 && std::abs(wn - sigma) <= tol * wn;
        sigma = wn;
        if (stop) break;
    }
    r.sigma = sigma;
    r.u = u;
    r.v = v;
    return r;
}

}  // namespace

std::vector<Step> mode_k_latent_fw(const SparseTensor& t_omega, double beta, int iters, int power_iters,
                                   double power_tol, std::uint64_t seed) {
    const std::size_t n = t_omega.nnz();
    std::vector<ModeIndex> modes;
    for (std::size_t k = 0; k < 3; ++k) modes.push_back(mode_index(t_omega, k));
    auto tv = t_omega.values();
    std::vector<double> x(n, 0.0), neg(n), s(n);
    std::vector<Step> steps;
    for (int t = 1; t <= iters; ++t) {
        for (std::size_t e = 0; e < n; ++e) neg[e] = tv[e] - x[e];
        Top best;
        best.sigma = -1.0;
        std::size_t k_star = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            Top c = top_pair(modes[k], neg, power_iters, power_tol, power_seed(seed, t, k));
            if (c.sigma > best.sigma) {
                best = std::move(c);
                k_star = k;
            }
        }
        if (best.sigma <= 0.0) break;
        const ModeIndex& m = modes[k_star];
        for (std::size_t e = 0; e < n; ++e) s[e] = beta * best.u[m.row[e]] * best.v[m.col[e]];
        double a = 0.0, b = 0.0;
        for (std::size_t e = 0; e < n; ++e) {
            const double dir = s[e] - x[e];
            a += dir * dir;
            b += (x[e] - tv[e]) * dir;
        }
        b *= 2.0;
        const double gamma = a == 0.0 ? 0.0 : std::clamp(-b / (2.0 * a), 0.0, 1.0);
        for (std::size_t e = 0; e < n; ++e) x[e] = (1.0 - gamma) * x[e] + gamma * s[e];
        steps.push_back({k_star, best.sigma, gamma});
    }
    return steps;
}

}  // namespace ltrnn::baseline
