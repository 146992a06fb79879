#include "ltrnn/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "ltrnn/errors.hpp"

namespace ltrnn {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct ReadHandles {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~ReadHandles() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct WriteHandles {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~WriteHandles() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

// libpng reports errors by longjmp; everything touched after setjmp is
// allocated beforehand so no C++ destructors are skipped.
bool read_png_raw(std::FILE* fp, ReadHandles& h, Image& img, char* err) {
    if (setjmp(png_jmpbuf(h.png))) {
        std::snprintf(err, 256, "corrupt or unsupported PNG data");
        return false;
    }
    png_init_io(h.png, fp);
    png_set_sig_bytes(h.png, 8);
    png_read_info(h.png, h.info);
    const int depth = png_get_bit_depth(h.png, h.info);
    const int color = png_get_color_type(h.png, h.info);
    if (depth == 16) {
        std::snprintf(err, 256, "16-bit PNG samples are not supported (expected 8-bit, 0-255)");
        return false;
    }
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(h.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(h.png);
    if (png_get_valid(h.png, h.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(h.png);
    png_set_interlace_handling(h.png);
    png_read_update_info(h.png, h.info);
    img.width = png_get_image_width(h.png, h.info);
    img.height = png_get_image_height(h.png, h.info);
    img.channels = png_get_channels(h.png, h.info);
    if (png_get_rowbytes(h.png, h.info) != img.width * img.channels) {
        std::snprintf(err, 256, "unexpected PNG row layout");
        return false;
    }
    return true;
}

bool read_png_rows(ReadHandles& h, std::vector<png_bytep>& rows, char* err) {
    if (setjmp(png_jmpbuf(h.png))) {
        std::snprintf(err, 256, "corrupt or truncated PNG data");
        return false;
    }
    png_read_image(h.png, rows.data());
    png_read_end(h.png, nullptr);
    return true;
}

bool write_png_raw(std::FILE* fp, WriteHandles& h, const Image& img, std::vector<png_bytep>& rows) {
    if (setjmp(png_jmpbuf(h.png))) return false;
    static const int kColor[] = {0, PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA, PNG_COLOR_TYPE_RGB,
                                 PNG_COLOR_TYPE_RGB_ALPHA};
    png_init_io(h.png, fp);
    png_set_IHDR(h.png, h.info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 kColor[img.channels], PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(h.png, h.info);
    png_write_image(h.png, rows.data());
    png_write_end(h.png, nullptr);
    return true;
}

}  // namespace

Image load_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open '" + path.string() + "'");
    unsigned char sig[8] = {};
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw IoError(path.string() + ": not a PNG file (only lossless PNG input is accepted)");

    ReadHandles h;
    h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!h.png) throw IoError("libpng initialisation failed");
    h.info = png_create_info_struct(h.png);
    if (!h.info) throw IoError("libpng initialisation failed");

    Image img;
    std::vector<png_bytep> rows;
    char err[256] = {};
    if (!read_png_raw(fp.get(), h, img, err)) throw IoError(path.string() + ": " + err);
    img.pixels.resize(img.height * img.width * img.channels);
    rows.resize(img.height);
    for (std::size_t y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + y * img.width * img.channels;
    if (!read_png_rows(h, rows, err)) throw IoError(path.string() + ": " + err);
    return img;
}

void save_png(const std::filesystem::path& path, const Image& img) {
    if (img.channels < 1 || img.channels > 4) throw ParameterError("PNG images need 1 to 4 channels");
    if (img.pixels.size() != img.height * img.width * img.channels)
        throw ShapeError("pixel buffer does not match image size");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open '" + path.string() + "' for writing");
    WriteHandles h;
    h.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!h.png) throw IoError("libpng initialisation failed");
    h.info = png_create_info_struct(h.png);
    if (!h.info) throw IoError("libpng initialisation failed");
    std::vector<png_bytep> rows(img.height);
    for (std::size_t y = 0; y < img.height; ++y)
        rows[y] = const_cast<png_bytep>(img.pixels.data() + y * img.width * img.channels);
    if (!write_png_raw(fp.get(), h, img, rows)) throw IoError(path.string() + ": failed writing PNG");
}

DenseTensor image_to_tensor(const Image& img) {
    const auto h = static_cast<Index>(img.height);
    const auto w = static_cast<Index>(img.width);
    const auto c = static_cast<Index>(img.channels);
    DenseTensor t = c == 1 ? DenseTensor(Shape{h, w}) : DenseTensor(Shape{h, w, c});
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x)
            for (Index ch = 0; ch < c; ++ch)
                t[y + h * (x + w * ch)] = img.pixels[static_cast<std::size_t>((y * w + x) * c + ch)];
    return t;
}

Image tensor_to_image(const DenseTensor& t) {
    const auto& s = t.shape();
    if (s.order() > 3) throw ShapeError("a single image needs an order-2 or order-3 tensor");
    Image img;
    img.height = static_cast<std::size_t>(s.dim(0));
    img.width = static_cast<std::size_t>(s.dim(1));
    img.channels = s.order() == 3 ? static_cast<std::size_t>(s.dim(2)) : 1;
    if (img.channels > 4) throw ShapeError("images have at most 4 channels, got " + std::to_string(img.channels));
    img.pixels.resize(img.height * img.width * img.channels);
    const auto h = static_cast<Index>(img.height);
    const auto w = static_cast<Index>(img.width);
    const auto c = static_cast<Index>(img.channels);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x)
            for (Index ch = 0; ch < c; ++ch) {
                const double v = std::clamp(std::round(t[y + h * (x + w * ch)]), 0.0, 255.0);
                img.pixels[static_cast<std::size_t>((y * w + x) * c + ch)] = static_cast<std::uint8_t>(v);
            }
    return img;
}

DenseTensor load_png_sequence(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        auto ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (e.is_regular_file() && ext == ".png") files.push_back(e.path());
    }
    if (files.empty()) throw IoError(dir.string() + ": no PNG frames found");
    std::sort(files.begin(), files.end());
    Image first = load_png(files[0]);
    const auto h = static_cast<Index>(first.height);
    const auto w = static_cast<Index>(first.width);
    const auto c = static_cast<Index>(first.channels);
    const auto f = static_cast<Index>(files.size());
    DenseTensor t(Shape{h, w, c, f});
    const Index frame = h * w * c;
    for (Index fi = 0; fi < f; ++fi) {
        Image img = fi == 0 ? std::move(first) : load_png(files[static_cast<std::size_t>(fi)]);
        if (static_cast<Index>(img.height) != h || static_cast<Index>(img.width) != w ||
            static_cast<Index>(img.channels) != c)
            throw IoError(files[static_cast<std::size_t>(fi)].string() + ": frame size differs from the first frame");
        DenseTensor one = image_to_tensor(img);
        std::copy(one.values().begin(), one.values().end(), t.values().begin() + fi * frame);
    }
    return t;
}

void save_png_sequence(const std::filesystem::path& dir, const DenseTensor& t) {
    const auto& s = t.shape();
    if (s.order() != 4) throw ShapeError("an image sequence needs an (H, W, C, F) tensor");
    std::filesystem::create_directories(dir);
    const Index frame = s.dim(0) * s.dim(1) * s.dim(2);
    for (Index fi = 0; fi < s.dim(3); ++fi) {
        std::vector<double> v(t.values().begin() + fi * frame, t.values().begin() + (fi + 1) * frame);
        DenseTensor one(Shape{s.dim(0), s.dim(1), s.dim(2)}, std::move(v));
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04lld.png", static_cast<long long>(fi));
        save_png(dir / name, tensor_to_image(one));
    }
}

}  // namespace ltrnn
