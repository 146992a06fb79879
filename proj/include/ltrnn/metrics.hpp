#pragma once

#include <cstddef>
#include <span>

#include "ltrnn/basis.hpp"
#include "ltrnn/tensor.hpp"

namespace ltrnn {

/// ||est - truth||_F / ||truth||_F. Throws when truth is all zero.
double rse(const DenseTensor& est, const DenseTensor& truth);

/// 10 log10(255^2 / MSE) for data on the 0-255 scale; +inf when MSE is 0.
double psnr(const DenseTensor& est, const DenseTensor& truth);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;
};

struct SsimResult {
    double value = 0.0;
    /// Window actually used (smaller than requested when the image is).
    int window = 0;
    bool window_reduced = false;
    /// Number of 2D slices averaged.
    std::size_t slices = 0;
};

/// Mean SSIM of one height x width image stored first-coordinate-fastest
/// (pixel (h, w) at h + height * w). Gaussian window, valid positions only.
SsimResult ssim_2d(std::span<const double> est, std::span<const double> truth, std::size_t height,
                   std::size_t width, const SsimOptions& opt = {});

/// For order-2 inputs the 2D SSIM; for higher orders the mean over every
/// slice spanned by the first two modes (trailing modes enumerate slices).
SsimResult ssim(const DenseTensor& est, const DenseTensor& truth, const SsimOptions& opt = {});

/// Storage size during iteration: basis entries plus observed-entry count.
std::size_t ssdi(const BasisFactorSet& basis, std::size_t omega_count);

/// Label written next to SSIM values in reports.
inline constexpr const char* kSsimProtocol =
    "mean of per-slice 2D SSIM over trailing modes; gaussian window 11x11 sigma 1.5; K1=0.01 K2=0.03 L=255";

}  // namespace ltrnn
