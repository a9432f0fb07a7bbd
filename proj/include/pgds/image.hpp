#pragma once
// Minimal image decoding for curation: binary/ASCII netpbm (PGM, PPM) and
// PNG through libpng. Everything is reduced to one grayscale channel.

#include <cstddef>
#include <filesystem>
#include <vector>

namespace pgds {

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;  // row-major, nominal range [0, 255]

    GrayImage() = default;
    GrayImage(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), pixels(w * h, fill) {}

    double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
    double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
    bool empty() const { return width == 0 || height == 0; }
};

// Throws RuntimeFailure for unreadable or unsupported files.
GrayImage read_image(const std::filesystem::path& path);

// 8-bit binary PGM (P5); values are rounded and clamped to [0, 255].
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

// Resampling with pixel-center alignment, clamped at the borders. Used by the
// perceptual hash and by test fixtures.
GrayImage resize_bilinear(const GrayImage& src, std::size_t width, std::size_t height);

}  // namespace pgds
