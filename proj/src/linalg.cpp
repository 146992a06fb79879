#include "ltrnn/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "ltrnn/errors.hpp"

namespace ltrnn {

Eigen::VectorXd random_unit_vector(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal(rng);
    const double nv = v.norm();
    if (nv == 0.0) return Eigen::VectorXd::Unit(n, 0);
    return v / nv;
}

void canonicalize_signs(SingularTriplet& t) {
    if (t.u.size() == 0) return;
    const double cutoff = 1e-12 * t.u.cwiseAbs().maxCoeff();
    for (Index i = 0; i < t.u.size(); ++i) {
        if (std::abs(t.u[i]) > cutoff) {
            if (t.u[i] < 0) {
                t.u = -t.u;
                t.v = -t.v;
            }
            return;
        }
    }
}

QrResult thin_qr(const Eigen::MatrixXd& a) {
    const Index m = a.rows();
    const Index r = a.cols();
    const Index p = std::min(m, r);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    QrResult out;
    out.q = qr.householderQ() * Eigen::MatrixXd::Identity(m, p);
    out.r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    return out;
}

SvdResult dense_svd(const Eigen::MatrixXd& j) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Eigen::VectorXd project_l1_ball_nonneg(const Eigen::VectorXd& s, double radius) {
    if (radius < 0) throw ParameterError("ball radius must be nonnegative");
    Eigen::VectorXd clipped = s.cwiseMax(0.0);
    if (clipped.sum() <= radius) return clipped;
    // Sort-based simplex projection: find theta with sum(max(s - theta, 0)) = radius.
    std::vector<double> sorted(clipped.data(), clipped.data() + clipped.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumsum += sorted[i];
        const double t = (cumsum - radius) / static_cast<double>(i + 1);
        if (sorted[i] - t > 0) theta = t;
    }
    return (clipped.array() - theta).cwiseMax(0.0).matrix();
}

}  // namespace ltrnn
