#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ltrnn/tensor.hpp"

namespace ltrnn {

/// 8-bit raster, row-major interleaved as stored in PNG.
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;  ///< 1 gray, 2 gray+alpha, 3 RGB, 4 RGBA
    std::vector<std::uint8_t> pixels;
};

/// Reads an 8-bit PNG. Anything that is not a PNG, or uses 16-bit samples,
/// is rejected with IoError. Palette images are expanded to RGB(A).
Image load_png(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const Image& img);

/// Gray image -> (H, W); otherwise (H, W, C). Values 0-255.
DenseTensor image_to_tensor(const Image& img);
/// Inverse of image_to_tensor. Values are rounded and clamped to 0-255.
Image tensor_to_image(const DenseTensor& t);

/// Sorted *.png files of a directory stacked into (H, W, C, F).
DenseTensor load_png_sequence(const std::filesystem::path& dir);
/// Writes an (H, W, C, F) tensor as frame_0000.png, frame_0001.png, ...
void save_png_sequence(const std::filesystem::path& dir, const DenseTensor& t);

}  // namespace ltrnn
