#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "ltrnn/errors.hpp"
#include "ltrnn/metrics.hpp"

using namespace ltrnn;

namespace {

DenseTensor random_image(const Shape& s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> px(0.0, 255.0);
    DenseTensor t(s);
    for (double& v : t.values()) v = px(rng);
    return t;
}

// Direct transcription of mean SSIM: for each window position, 2D Gaussian
// weighted statistics computed straight from their definitions.
double ssim_oracle(const DenseTensor& x, const DenseTensor& y, int win, double sigma) {
    const Index h = x.shape().dim(0), w = x.shape().dim(1);
    std::vector<double> g(static_cast<std::size_t>(win * win));
    double gs = 0.0;
    const double c = (win - 1) / 2.0;
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
            const double r2 = (i - c) * (i - c) + (j - c) * (j - c);
            g[static_cast<std::size_t>(i * win + j)] = std::exp(-r2 / (2 * sigma * sigma));
            gs += g[static_cast<std::size_t>(i * win + j)];
        }
    const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
    double total = 0.0;
    int count = 0;
    for (Index r0 = 0; r0 + win <= h; ++r0)
        for (Index q0 = 0; q0 + win <= w; ++q0) {
            double mx = 0, my = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double wt = g[static_cast<std::size_t>(i * win + j)] / gs;
                    mx += wt * x[(r0 + i) + h * (q0 + j)];
                    my += wt * y[(r0 + i) + h * (q0 + j)];
                }
            double vx = 0, vy = 0, cxy = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double wt = g[static_cast<std::size_t>(i * win + j)] / gs;
                    const double dx = x[(r0 + i) + h * (q0 + j)] - mx, dy = y[(r0 + i) + h * (q0 + j)] - my;
                    vx += wt * dx * dx;
                    vy += wt * dy * dy;
                    cxy += wt * dx * dy;
                }
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    return total / count;
}

}  // namespace

TEST_CASE("RSE") {
    DenseTensor t = random_image(Shape{6, 7}, 1);
    CHECK(rse(t, t) == 0.0);
    CHECK(rse(DenseTensor(t.shape()), t) == doctest::Approx(1.0));
    for (double c : {0.0, 0.5, 2.0, 3.7}) {
        DenseTensor s(t.shape());
        for (Index l = 0; l < s.shape().numel(); ++l) s[l] = c * t[l];
        CHECK(rse(s, t) == doctest::Approx(std::abs(c - 1.0)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(rse(t, DenseTensor(t.shape())), ParameterError);
    CHECK_THROWS_AS(rse(t, DenseTensor(Shape{7, 6})), ShapeError);
}

TEST_CASE("PSNR") {
    DenseTensor zero(Shape{4, 4});
    DenseTensor full(Shape{4, 4});
    for (double& v : full.values()) v = 255.0;
    CHECK(psnr(zero, full) == doctest::Approx(0.0));
    DenseTensor tenth(Shape{4, 4});
    for (double& v : tenth.values()) v = 255.0 / std::sqrt(10.0);
    CHECK(psnr(tenth, zero) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(psnr(full, full) == std::numeric_limits<double>::infinity());

    DenseTensor a = random_image(Shape{5, 9}, 2), b = random_image(Shape{5, 9}, 3);
    double se = 0;
    for (Index l = 0; l < 45; ++l) se += (a[l] - b[l]) * (a[l] - b[l]);
    CHECK(psnr(a, b) == doctest::Approx(10 * std::log10(255.0 * 255.0 * 45 / se)).epsilon(1e-12));
}

TEST_CASE("SSIM basics") {
    DenseTensor a = random_image(Shape{32, 40}, 4);
    SsimResult same = ssim(a, a);
    CHECK(same.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.window == 11);
    CHECK_FALSE(same.window_reduced);

    DenseTensor c1(Shape{16, 16}), c2(Shape{16, 16});
    for (double& v : c1.values()) v = 100.0;
    for (double& v : c2.values()) v = 150.0;
    // Constant images: only the luminance term differs from 1.
    const double k1 = std::pow(0.01 * 255, 2);
    const double lum = (2 * 100.0 * 150.0 + k1) / (100.0 * 100.0 + 150.0 * 150.0 + k1);
    CHECK(ssim(c1, c2).value == doctest::Approx(lum).epsilon(1e-12));
    CHECK(ssim(c1, c2).value < 1.0);
}

TEST_CASE("SSIM agrees with the pixelwise definition and is symmetric") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        DenseTensor a = random_image(Shape{20, 17}, 10 + seed);
        DenseTensor b = a;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, 30.0);
        for (double& v : b.values()) v += noise(rng);
        const double fast = ssim(a, b).value;
        CHECK(fast == doctest::Approx(ssim_oracle(a, b, 11, 1.5)).epsilon(1e-10));
        CHECK(std::abs(ssim(a, b).value - ssim(b, a).value) < 1e-12);
    }
}

TEST_CASE("SSIM window shrinks for small images and averages slices") {
    DenseTensor a = random_image(Shape{8, 12}, 5), b = random_image(Shape{8, 12}, 6);
    SsimResult r = ssim(a, b);
    CHECK(r.window == 8);
    CHECK(r.window_reduced);
    CHECK(r.value == doctest::Approx(ssim_oracle(a, b, 8, 1.5)).epsilon(1e-10));

    DenseTensor x = random_image(Shape{14, 15, 2, 3}, 7), y = random_image(Shape{14, 15, 2, 3}, 8);
    SsimResult v = ssim(x, y);
    CHECK(v.slices == 6);
    double mean = 0.0;
    const std::size_t plane = 14 * 15;
    for (std::size_t s = 0; s < 6; ++s) {
        std::vector<double> xs(x.values().begin() + s * plane, x.values().begin() + (s + 1) * plane);
        std::vector<double> ys(y.values().begin() + s * plane, y.values().begin() + (s + 1) * plane);
        mean += ssim_oracle(DenseTensor(Shape{14, 15}, xs), DenseTensor(Shape{14, 15}, ys), 11, 1.5);
    }
    CHECK(v.value == doctest::Approx(mean / 6).epsilon(1e-10));
}

TEST_CASE("SSDI counts basis entries plus observations") {
    BasisFactorSet empty(Shape{3, 4, 5}, 1);
    CHECK(ssdi(empty, 100) == 100);

    // One atom in a 12 x 20 unfolding.
    BasisFactorSet one(Shape{3, 4, 4, 5}, 2);
    const auto& uf = one.unfolding(1);
    REQUIRE(uf.rows() == 12);
    REQUIRE(uf.cols() == 20);
    one.append(1, Eigen::VectorXd::Unit(12, 0), Eigen::VectorXd::Unit(20, 0), 1.0);
    CHECK(ssdi(one, 50) == 33 + 50);
    CHECK(one.allocated_entries() + 50 == ssdi(one, 50));
}
