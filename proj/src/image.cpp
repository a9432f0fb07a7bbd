#include "pgds/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "pgds/common.hpp"

namespace pgds {

namespace {

double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

// Reads the next whitespace-delimited header token, skipping '#' comments.
bool next_token(std::istream& in, std::string& token) {
    token.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    return !token.empty();
}

GrayImage read_netpbm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("cannot open image '" + path.string() + "'");
    std::string magic, tok;
    next_token(in, magic);
    const bool color = magic == "P3" || magic == "P6";
    const bool ascii = magic == "P2" || magic == "P3";
    if (!(magic == "P2" || magic == "P3" || magic == "P5" || magic == "P6")) {
        throw RuntimeFailure("unsupported netpbm variant in '" + path.string() + "'");
    }
    std::size_t dims[3] = {0, 0, 0};
    for (auto& d : dims) {
        if (!next_token(in, tok)) throw RuntimeFailure("truncated netpbm header in '" + path.string() + "'");
        d = std::stoul(tok);
    }
    const std::size_t width = dims[0], height = dims[1], maxval = dims[2];
    if (width == 0 || height == 0 || maxval == 0 || maxval > 65535) {
        throw RuntimeFailure("invalid netpbm header in '" + path.string() + "'");
    }
    const std::size_t channels = color ? 3 : 1;
    const double scale = 255.0 / static_cast<double>(maxval);
    std::vector<double> raw(width * height * channels);
    if (ascii) {
        for (double& v : raw) {
            if (!next_token(in, tok)) throw RuntimeFailure("truncated netpbm data in '" + path.string() + "'");
            v = static_cast<double>(std::stoul(tok));
        }
    } else {
        const std::size_t bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> buf(raw.size() * bytes);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
            throw RuntimeFailure("truncated netpbm data in '" + path.string() + "'");
        }
        for (std::size_t i = 0; i < raw.size(); ++i) {
            raw[i] = bytes == 2 ? static_cast<double>((buf[2 * i] << 8) | buf[2 * i + 1]) : buf[i];
        }
    }
    GrayImage img(width, height);
    for (std::size_t i = 0; i < width * height; ++i) {
        img.pixels[i] = color ? luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]) * scale : raw[i] * scale;
    }
    return img;
}

GrayImage read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw RuntimeFailure("cannot decode png '" + path.string() + "': " + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw RuntimeFailure("cannot decode png '" + path.string() + "': " + msg);
    }
    GrayImage img(image.width, image.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = buffer[i];
    return img;
}

}  // namespace

GrayImage read_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw RuntimeFailure("cannot open image '" + path.string() + "'");
    unsigned char sig[8] = {};
    probe.read(reinterpret_cast<char*>(sig), 8);
    if (probe.gcount() >= 2 && sig[0] == 'P' && sig[1] >= '2' && sig[1] <= '6') return read_netpbm(path);
    if (probe.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
    throw RuntimeFailure("unsupported image format: '" + path.string() + "'");
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    for (double v : image.pixels) {
        out.put(static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L))));
    }
}

GrayImage resize_bilinear(const GrayImage& src, std::size_t width, std::size_t height) {
    if (src.empty() || width == 0 || height == 0) throw ValidationError("resize_bilinear: zero-dimension image");
    GrayImage dst(width, height);
    const double sx = static_cast<double>(src.width) / static_cast<double>(width);
    const double sy = static_cast<double>(src.height) / static_cast<double>(height);
    auto coord = [](double pos, std::size_t limit, std::size_t& i0, std::size_t& i1, double& t) {
        pos = std::clamp(pos, 0.0, static_cast<double>(limit - 1));
        i0 = static_cast<std::size_t>(std::floor(pos));
        i1 = std::min(i0 + 1, limit - 1);
        t = pos - static_cast<double>(i0);
    };
    for (std::size_t y = 0; y < height; ++y) {
        std::size_t y0, y1;
        double ty;
        coord((static_cast<double>(y) + 0.5) * sy - 0.5, src.height, y0, y1, ty);
        for (std::size_t x = 0; x < width; ++x) {
            std::size_t x0, x1;
            double tx;
            coord((static_cast<double>(x) + 0.5) * sx - 0.5, src.width, x0, x1, tx);
            // a + (b - a) * t keeps constant regions exactly constant.
            const double top = src.at(x0, y0) + (src.at(x1, y0) - src.at(x0, y0)) * tx;
            const double bot = src.at(x0, y1) + (src.at(x1, y1) - src.at(x0, y1)) * tx;
            dst.at(x, y) = top + (bot - top) * ty;
        }
    }
    return dst;
}

}  // namespace pgds
