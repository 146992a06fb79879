#pragma once

#include <cstdint>

#include "ltrnn/tensor.hpp"

namespace ltrnn {

struct SyntheticSpec {
    Shape shape;
    std::size_t d = 0;  ///< 0 picks floor(N / 2)
    Index rank = 1;
    double missing_ratio = 0.5;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    DenseTensor truth;
    SparseTensor observed;
};

/// Number of observed entries for a missing ratio: round((1 - ratio) * numel).
std::size_t observed_count(Index numel, double missing_ratio);

/// Uniform sample of observed_count(numel, ratio) linear indices without
/// replacement (seeded Fisher-Yates prefix), returned sorted.
Support sample_support(Index numel, double missing_ratio, std::uint64_t seed);

/// X = sum_k X_k where (X_k)_<k,d> = A_k B_k^T with i.i.d. N(0,1) factors of
/// width `rank`, observed on a uniformly sampled support.
SyntheticData gen_latent_lowrank(const SyntheticSpec& spec);

/// Smooth test volume on [0, 255]: a weighted sum of axis-aligned Gaussian
/// blobs, rescaled so the peak is 255. Used by the reshaping experiments
/// where natural-image smoothness matters.
DenseTensor smooth_volume(const Shape& shape, std::uint64_t seed, int blobs = 24);

}  // namespace ltrnn
