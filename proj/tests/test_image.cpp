#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "ltrnn/errors.hpp"
#include "ltrnn/image_io.hpp"

using namespace ltrnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("ltrnn_test_image_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Image random_image(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> px(0, 255);
    Image img{h, w, c, {}};
    img.pixels.resize(h * w * c);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(px(rng));
    return img;
}

void write_png16(const fs::path& path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = 3;
    img.height = 2;
    img.format = PNG_FORMAT_LINEAR_Y;
    std::vector<png_uint_16> px(6, 1000);
    REQUIRE(png_image_write_to_file(&img, path.c_str(), 0, px.data(), 0, nullptr));
}

}  // namespace

TEST_CASE("PNG round trip is bit-identical") {
    fs::path dir = scratch_dir("roundtrip");
    for (std::size_t c : {1u, 2u, 3u, 4u}) {
        Image img = random_image(13, 17, c, c);
        fs::path p = dir / ("img" + std::to_string(c) + ".png");
        save_png(p, img);
        Image back = load_png(p);
        CHECK(back.height == 13);
        CHECK(back.width == 17);
        CHECK(back.channels == c);
        CHECK(back.pixels == img.pixels);

        DenseTensor t = image_to_tensor(back);
        Image again = tensor_to_image(t);
        CHECK(again.pixels == img.pixels);
    }
}

TEST_CASE("image tensor layout") {
    Image gray = random_image(5, 7, 1, 9);
    DenseTensor g = image_to_tensor(gray);
    CHECK(g.shape() == Shape{5, 7});
    CHECK(g.at(std::vector<Index>{2, 3}) == gray.pixels[2 * 7 + 3]);

    Image rgb = random_image(4, 6, 3, 10);
    DenseTensor t = image_to_tensor(rgb);
    CHECK(t.shape() == Shape{4, 6, 3});
    CHECK(t.at(std::vector<Index>{3, 5, 2}) == rgb.pixels[(3 * 6 + 5) * 3 + 2]);
    for (double v : t.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 255.0);
    }

    DenseTensor wild(Shape{2, 2}, {-4.0, 300.0, 127.5, 12.4});
    Image clamped = tensor_to_image(wild);
    CHECK(clamped.pixels[0] == 0);
    CHECK(clamped.pixels[2] == 255);  // pixel (1, 0) is linear index 1
    CHECK(clamped.pixels[1] == 128);
    CHECK(clamped.pixels[3] == 12);
}

TEST_CASE("frame directories stack into (H, W, C, F)") {
    fs::path dir = scratch_dir("frames");
    std::vector<Image> frames;
    for (int f = 0; f < 5; ++f) {
        frames.push_back(random_image(6, 8, 3, 100 + f));
        char name[32];
        std::snprintf(name, sizeof name, "f%03d.png", f);
        save_png(dir / name, frames.back());
    }
    DenseTensor seq = load_png_sequence(dir);
    CHECK(seq.shape() == Shape{6, 8, 3, 5});
    CHECK(seq.at(std::vector<Index>{1, 2, 0, 4}) == frames[4].pixels[(1 * 8 + 2) * 3 + 0]);

    fs::path out = dir / "out";
    save_png_sequence(out, seq);
    DenseTensor back = load_png_sequence(out);
    CHECK(back.shape() == seq.shape());
    CHECK(std::equal(back.values().begin(), back.values().end(), seq.values().begin()));
    CHECK(fs::exists(out / "frame_0000.png"));

    save_png(dir / "zz_odd.png", random_image(6, 9, 3, 1));
    CHECK_THROWS_AS(load_png_sequence(dir), IoError);
}

TEST_CASE("non-PNG and 16-bit inputs are rejected") {
    fs::path dir = scratch_dir("reject");
    {
        std::ofstream jpg(dir / "photo.jpg", std::ios::binary);
        const unsigned char jfif[] = {0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10, 'J', 'F', 'I', 'F', 0, 1};
        jpg.write(reinterpret_cast<const char*>(jfif), sizeof jfif);
    }
    CHECK_THROWS_AS(load_png(dir / "photo.jpg"), IoError);
    CHECK_THROWS_AS(load_png(dir / "missing.png"), IoError);

    write_png16(dir / "deep.png");
    CHECK_THROWS_AS(load_png(dir / "deep.png"), IoError);

    // Truncated file: valid signature, nothing after it.
    {
        std::ofstream cut(dir / "cut.png", std::ios::binary);
        const unsigned char sig[] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A, 0, 0, 0};
        cut.write(reinterpret_cast<const char*>(sig), sizeof sig);
    }
    CHECK_THROWS_AS(load_png(dir / "cut.png"), IoError);
}
