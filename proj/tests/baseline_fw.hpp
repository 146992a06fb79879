#pragma once

#include <cstdint>
#include <vector>

#include "ltrnn/tensor.hpp"

namespace ltrnn::baseline {

struct Step {
    std::size_t k_star = 0;
    double sigma_max = 0.0;
    double gamma = 0.0;
};

/// Frank-Wolfe over the latent nuclear-norm ball of a third-order tensor,
/// written against plain mode-k unfoldings (row i_k, columns the other two
/// modes in cyclic order) without the library's unfolding or solver code.
/// Runs exactly `iters` steps with no basis compression.
std::vector<Step> mode_k_latent_fw(const SparseTensor& t_omega, double beta, int iters, int power_iters,
                                   double power_tol, std::uint64_t seed);

}  // namespace ltrnn::baseline
