#include "ltrnn/basis.hpp"

#include <numeric>

#include "ltrnn/errors.hpp"

namespace ltrnn {

BasisFactorSet::BasisFactorSet(Shape shape, std::size_t d) : shape_(std::move(shape)), d_(d) {
    for (std::size_t k = 0; k < shape_.order(); ++k) unfoldings_.emplace_back(shape_, k, d);
    modes_.resize(shape_.order());
}

std::vector<std::size_t> BasisFactorSet::ranks() const {
    std::vector<std::size_t> r;
    for (const auto& m : modes_) r.push_back(m.rank());
    return r;
}

std::size_t BasisFactorSet::total_rank() const {
    std::size_t s = 0;
    for (const auto& m : modes_) s += m.rank();
    return s;
}

double BasisFactorSet::sigma_l1() const {
    double s = 0.0;
    for (const auto& m : modes_)
        for (double w : m.sigma) s += w;
    return s;
}

void BasisFactorSet::append(std::size_t k, Eigen::VectorXd u, Eigen::VectorXd v, double sigma) {
    const auto& uf = unfoldings_.at(k);
    if (u.size() != uf.rows() || v.size() != uf.cols())
        throw ShapeError("atom factor lengths do not match unfolding of mode " + std::to_string(k));
    if (sigma < 0) throw ParameterError("atom weight must be nonnegative");
    auto& m = modes_[k];
    m.u.push_back(std::move(u));
    m.v.push_back(std::move(v));
    m.sigma.push_back(sigma);
}

void BasisFactorSet::scale(double c) {
    for (auto& m : modes_)
        for (double& w : m.sigma) w *= c;
}

std::size_t BasisFactorSet::prune(double threshold) {
    std::size_t dropped = 0;
    for (auto& m : modes_) {
        std::size_t keep = 0;
        for (std::size_t j = 0; j < m.rank(); ++j) {
            if (m.sigma[j] < threshold) {
                ++dropped;
                continue;
            }
            if (keep != j) {
                m.u[keep] = std::move(m.u[j]);
                m.v[keep] = std::move(m.v[j]);
                m.sigma[keep] = m.sigma[j];
            }
            ++keep;
        }
        m.u.resize(keep);
        m.v.resize(keep);
        m.sigma.resize(keep);
    }
    return dropped;
}

std::size_t BasisFactorSet::ssdi(std::size_t omega_count) const {
    std::size_t s = omega_count;
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        const auto r = modes_[k].rank();
        s += static_cast<std::size_t>(unfoldings_[k].rows()) * r + r +
             static_cast<std::size_t>(unfoldings_[k].cols()) * r;
    }
    return s;
}

std::size_t BasisFactorSet::allocated_entries() const {
    std::size_t s = 0;
    for (const auto& m : modes_) {
        for (const auto& c : m.u) s += static_cast<std::size_t>(c.size());
        for (const auto& c : m.v) s += static_cast<std::size_t>(c.size());
        s += m.sigma.size();
    }
    return s;
}

double BasisFactorSet::mode_value_at(std::size_t k, Index linear) const {
    const auto& m = modes_[k];
    if (m.rank() == 0) return 0.0;
    const auto rc = unfoldings_[k].coords_of_linear(linear);
    double s = 0.0;
    for (std::size_t j = 0; j < m.rank(); ++j) s += m.sigma[j] * m.u[j][rc.row] * m.v[j][rc.col];
    return s;
}

double BasisFactorSet::value_at(Index linear) const {
    if (linear < 0 || linear >= shape_.numel()) throw BoundsError("linear index out of range");
    double s = 0.0;
    for (std::size_t k = 0; k < modes_.size(); ++k) s += mode_value_at(k, linear);
    return s;
}

void BasisFactorSet::accumulate_mode(std::size_t k, const Support& support, std::span<double> out,
                                     double sign) const {
    const auto& m = modes_.at(k);
    if (m.rank() == 0) return;
    const auto& uf = unfoldings_[k];
    for (std::size_t i = 0; i < support.size(); ++i) {
        const auto rc = uf.coords_of_linear(support[i]);
        double s = 0.0;
        for (std::size_t j = 0; j < m.rank(); ++j) s += m.sigma[j] * m.u[j][rc.row] * m.v[j][rc.col];
        out[i] += sign * s;
    }
}

std::vector<double> BasisFactorSet::evaluate_on(const Support& support) const {
    std::vector<double> out(support.size(), 0.0);
    for (std::size_t k = 0; k < modes_.size(); ++k) accumulate_mode(k, support, out);
    return out;
}

}  // namespace ltrnn
