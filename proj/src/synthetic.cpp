#include "ltrnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "ltrnn/errors.hpp"
#include "ltrnn/unfolding.hpp"

namespace ltrnn {

std::size_t observed_count(Index numel, double missing_ratio) {
    if (!(missing_ratio >= 0.0 && missing_ratio < 1.0))
        throw ParameterError("missing ratio must lie in [0, 1)");
    return static_cast<std::size_t>(std::llround((1.0 - missing_ratio) * static_cast<double>(numel)));
}

Support sample_support(Index numel, double missing_ratio, std::uint64_t seed) {
    const std::size_t count = observed_count(numel, missing_ratio);
    std::vector<Index> perm(static_cast<std::size_t>(numel));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, perm.size() - 1);
        std::swap(perm[i], perm[pick(rng)]);
    }
    perm.resize(count);
    perm.shrink_to_fit();
    std::sort(perm.begin(), perm.end());
    return Support(std::move(perm), numel);
}

SyntheticData gen_latent_lowrank(const SyntheticSpec& spec) {
    const auto& shape = spec.shape;
    const std::size_t d = spec.d == 0 ? shape.order() / 2 : spec.d;
    if (spec.rank < 1) throw ParameterError("rank must be >= 1");
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal;

    DenseTensor truth(shape);
    auto tv = truth.values();
    for (std::size_t k = 0; k < shape.order(); ++k) {
        CircularUnfolding uf(shape, k, d);
        if (spec.rank > std::min(uf.rows(), uf.cols()))
            throw ParameterError("rank " + std::to_string(spec.rank) + " exceeds unfolding size of mode " +
                                 std::to_string(k));
        Eigen::MatrixXd a(uf.rows(), spec.rank), b(uf.cols(), spec.rank);
        for (Index j = 0; j < a.size(); ++j) a.data()[j] = normal(rng);
        for (Index j = 0; j < b.size(); ++j) b.data()[j] = normal(rng);
        // Row-major copies so each entry reads two contiguous rank-length rows.
        Eigen::MatrixXd at = a.transpose(), bt = b.transpose();
        for (Index l = 0; l < shape.numel(); ++l) {
            const auto rc = uf.coords_of_linear(l);
            tv[static_cast<std::size_t>(l)] += at.col(rc.row).dot(bt.col(rc.col));
        }
    }
    Support support = sample_support(shape.numel(), spec.missing_ratio, spec.seed ^ 0xA5A5A5A5DEADBEEFull);
    SparseTensor observed = truth.restrict_to(support);
    return {std::move(truth), std::move(observed)};
}

DenseTensor smooth_volume(const Shape& shape, std::uint64_t seed, int blobs) {
    const std::size_t order = shape.order();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Separable blobs: each is a product of 1D Gaussians, one per mode.
    std::vector<std::vector<std::vector<double>>> profiles(static_cast<std::size_t>(blobs));
    std::vector<double> weight(static_cast<std::size_t>(blobs));
    for (int b = 0; b < blobs; ++b) {
        auto& prof = profiles[static_cast<std::size_t>(b)];
        prof.resize(order);
        for (std::size_t n = 0; n < order; ++n) {
            const double len = static_cast<double>(shape.dim(n));
            const double centre = unit(rng) * len;
            const double width = (0.05 + 0.2 * unit(rng)) * len;
            prof[n].resize(static_cast<std::size_t>(shape.dim(n)));
            for (Index i = 0; i < shape.dim(n); ++i) {
                const double z = (static_cast<double>(i) - centre) / width;
                prof[n][static_cast<std::size_t>(i)] = std::exp(-0.5 * z * z);
            }
        }
        weight[static_cast<std::size_t>(b)] = 0.3 + 0.7 * unit(rng);
    }

    DenseTensor out(shape);
    MultiIndex idx(order);
    double peak = 0.0;
    for (Index l = 0; l < shape.numel(); ++l) {
        shape.delinearize(l, idx);
        double s = 0.0;
        for (int b = 0; b < blobs; ++b) {
            double p = weight[static_cast<std::size_t>(b)];
            for (std::size_t n = 0; n < order; ++n) p *= profiles[static_cast<std::size_t>(b)][n][static_cast<std::size_t>(idx[n])];
            s += p;
        }
        out[l] = s;
        peak = std::max(peak, s);
    }
    if (peak > 0.0)
        for (double& v : out.values()) v *= 255.0 / peak;
    return out;
}

}  // namespace ltrnn
