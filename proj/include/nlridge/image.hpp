#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlridge/rng.hpp"

namespace nlridge {

/// 2-D grayscale image, double-precision intensities in nominal range
/// [0, 255], stored row-major. Values are kept unclipped throughout the
/// pipeline; clipping happens only at file write and in clipped().
struct GrayImage {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int h, int w, double fill = 0.0)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {
        if (h < 1 || w < 1) throw std::invalid_argument("GrayImage: dimensions must be >= 1");
    }

    static GrayImage constant(int h, int w, double value) { return GrayImage(h, w, value); }

    double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
    const double* row(int r) const { return pixels.data() + static_cast<std::size_t>(r) * width; }
    double* row(int r) { return pixels.data() + static_cast<std::size_t>(r) * width; }

    std::size_t size() const { return pixels.size(); }
    bool same_size(const GrayImage& other) const {
        return height == other.height && width == other.width;
    }
};

struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Adds i.i.d. N(0, sigma^2) noise; deterministic for a fixed seed, output
/// not clipped. Pixels are visited row-major with a fresh sampler, so the
/// noise field depends only on (sigma, seed, image size).
inline GrayImage add_gaussian_noise(const GrayImage& img, const NoiseSpec& spec) {
    if (spec.sigma < 0.0) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
    GrayImage out = img;
    if (spec.sigma == 0.0) return out;
    GaussianSampler sampler(spec.seed);
    for (double& p : out.pixels) p += spec.sigma * sampler.standard();
    return out;
}

/// Peak signal-to-noise ratio in dB against peak 255. Returns +infinity when
/// the images are identical.
inline double psnr(const GrayImage& reference, const GrayImage& test) {
    if (!reference.same_size(test))
        throw std::invalid_argument("psnr: image dimensions differ");
    double sq = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference.pixels[i] - test.pixels[i];
        sq += d * d;
    }
    const double mse = sq / static_cast<double>(reference.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

inline GrayImage clipped(const GrayImage& img) {
    GrayImage out = img;
    for (double& p : out.pixels) p = std::clamp(p, 0.0, 255.0);
    return out;
}

namespace detail {

inline int next_pnm_token(std::istream& in, std::string& token) {
    token.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {  // comment runs to end of line
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            if (!token.empty()) return 0;
        } else {
            token.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    return token.empty() ? -1 : 0;
}

inline int parse_pnm_int(std::istream& in, const std::string& what) {
    std::string tok;
    if (next_pnm_token(in, tok) != 0) throw std::runtime_error("PGM: missing " + what);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw std::runtime_error("PGM: invalid " + what + " '" + tok + "'");
    }
}

}  // namespace detail

/// Reads an 8-bit binary PGM (P5). Color (P6/PPM) and ASCII (P2) inputs are
/// rejected rather than converted; 16-bit PGMs are rejected as unsupported.
inline GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::string magic;
    if (detail::next_pnm_token(in, magic) != 0) throw std::runtime_error("PGM: empty file '" + path + "'");
    if (magic == "P6" || magic == "P3")
        throw std::runtime_error("'" + path + "' is a color PPM; only grayscale input is accepted");
    if (magic != "P5")
        throw std::runtime_error("'" + path + "' is not a binary PGM (magic '" + magic + "')");
    const int width = detail::parse_pnm_int(in, "width");
    const int height = detail::parse_pnm_int(in, "height");
    const int maxval = detail::parse_pnm_int(in, "maxval");
    if (width < 1 || height < 1) throw std::runtime_error("PGM: bad dimensions in '" + path + "'");
    if (maxval > 255) throw std::runtime_error("PGM: only 8-bit images supported ('" + path + "')");
    if (maxval < 1) throw std::runtime_error("PGM: bad maxval in '" + path + "'");
    // header ends with exactly one whitespace byte, already consumed by the tokenizer
    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw std::runtime_error("PGM: truncated pixel data in '" + path + "'");
    GrayImage img(height, width);
    for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = static_cast<double>(raw[i]);
    return img;
}

/// Writes an 8-bit binary PGM; values are clipped to [0, 255] and rounded.
inline void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, 255.0);
        raw[i] = static_cast<unsigned char>(std::lround(v));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw std::runtime_error("PGM: write failed for '" + path + "'");
}

inline GrayImage load_image(const std::string& path) {
    return load_pgm(path);
}

inline void save_image(const GrayImage& img, const std::string& path) {
    save_pgm(img, path);
}

}  // namespace nlridge
