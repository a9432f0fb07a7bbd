#pragma once
// Synthetic images shared by the curation tests and acceptance checks.

#include <cmath>
#include <cstdint>

#include "pgds/common.hpp"
#include "pgds/image.hpp"

namespace testing {

inline pgds::GrayImage gradient_image(std::size_t w, std::size_t h) {
    pgds::GrayImage img(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            img.at(x, y) = 255.0 * (0.6 * double(x) / double(w) + 0.4 * std::sin(3.0 * double(y) / double(h)));
        }
    }
    return img;
}

// 8x8 grid of random gray levels, smoothly upsampled; distinct seeds give
// unrelated hashes.
inline pgds::GrayImage block_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    pgds::Rng rng(seed);
    pgds::GrayImage grid(8, 8);
    for (double& p : grid.pixels) p = rng.uniform(0, 255);
    return pgds::resize_bilinear(grid, w, h);
}

}  // namespace testing
