#include "ltrnn/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "ltrnn/errors.hpp"

namespace ltrnn {

namespace {

void require_same_shape(const DenseTensor& a, const DenseTensor& b) {
    if (!(a.shape() == b.shape()))
        throw ShapeError("metric operands differ in shape: " + a.shape().to_string() + " vs " +
                         b.shape().to_string());
}

double squared_error(const DenseTensor& a, const DenseTensor& b) {
    auto av = a.values();
    auto bv = b.values();
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
        const double d = av[i] - bv[i];
        s += d * d;
    }
    return s;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> w(static_cast<std::size_t>(size));
    const double c = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        w[static_cast<std::size_t>(i)] = std::exp(-((i - c) * (i - c)) / (2.0 * sigma * sigma));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (double& x : w) x /= sum;
    return w;
}

// Separable "valid" filtering of a height x width image (h fastest).
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t height, std::size_t width,
                                 const std::vector<double>& w) {
    const std::size_t n = w.size();
    const std::size_t oh = height - n + 1;
    const std::size_t ow = width - n + 1;
    std::vector<double> tmp(oh * width);
    for (std::size_t x = 0; x < width; ++x)
        for (std::size_t y = 0; y < oh; ++y) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += w[i] * img[(y + i) + height * x];
            tmp[y + oh * x] = s;
        }
    std::vector<double> out(oh * ow);
    for (std::size_t x = 0; x < ow; ++x)
        for (std::size_t y = 0; y < oh; ++y) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += w[i] * tmp[y + oh * (x + i)];
            out[y + oh * x] = s;
        }
    return out;
}

}  // namespace

double rse(const DenseTensor& est, const DenseTensor& truth) {
    require_same_shape(est, truth);
    const double tn = truth.frobenius_norm();
    if (tn == 0.0) throw ParameterError("RSE undefined: reference tensor has zero norm");
    return std::sqrt(squared_error(est, truth)) / tn;
}

double psnr(const DenseTensor& est, const DenseTensor& truth) {
    require_same_shape(est, truth);
    const double mse = squared_error(est, truth) / static_cast<double>(truth.shape().numel());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

SsimResult ssim_2d(std::span<const double> est, std::span<const double> truth, std::size_t height,
                   std::size_t width, const SsimOptions& opt) {
    if (est.size() != height * width || truth.size() != height * width)
        throw ShapeError("ssim: buffer size does not match image size");
    SsimResult res;
    res.window = opt.window;
    const std::size_t smallest = std::min(height, width);
    if (static_cast<std::size_t>(opt.window) > smallest) {
        res.window = static_cast<int>(smallest);
        res.window_reduced = true;
    }
    res.slices = 1;
    const auto w = gaussian_kernel(res.window, opt.sigma);
    const std::size_t n = height * width;
    std::vector<double> x(est.begin(), est.end()), y(truth.begin(), truth.end());
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, height, width, w);
    const auto my = filter_valid(y, height, width, w);
    const auto mxx = filter_valid(xx, height, width, w);
    const auto myy = filter_valid(yy, height, width, w);
    const auto mxy = filter_valid(xy, height, width, w);
    const double c1 = (opt.k1 * opt.dynamic_range) * (opt.k1 * opt.dynamic_range);
    const double c2 = (opt.k2 * opt.dynamic_range) * (opt.k2 * opt.dynamic_range);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = mxx[i] - mx[i] * mx[i];
        const double vy = myy[i] - my[i] * my[i];
        const double cxy = mxy[i] - mx[i] * my[i];
        sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    res.value = sum / static_cast<double>(mx.size());
    return res;
}

SsimResult ssim(const DenseTensor& est, const DenseTensor& truth, const SsimOptions& opt) {
    require_same_shape(est, truth);
    const auto& shape = truth.shape();
    const auto height = static_cast<std::size_t>(shape.dim(0));
    const auto width = static_cast<std::size_t>(shape.dim(1));
    const std::size_t plane = height * width;
    const std::size_t slices = static_cast<std::size_t>(shape.numel()) / plane;
    SsimResult total;
    double sum = 0.0;
    for (std::size_t s = 0; s < slices; ++s) {
        auto r = ssim_2d(est.values().subspan(s * plane, plane), truth.values().subspan(s * plane, plane), height,
                         width, opt);
        sum += r.value;
        total.window = r.window;
        total.window_reduced = r.window_reduced;
    }
    total.slices = slices;
    total.value = sum / static_cast<double>(slices);
    return total;
}

std::size_t ssdi(const BasisFactorSet& basis, std::size_t omega_count) { return basis.ssdi(omega_count); }

}  // namespace ltrnn
