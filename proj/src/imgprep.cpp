#include "deepfuse/imgprep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "deepfuse/error.hpp"

namespace deepfuse::imgprep {

GrayImage::GrayImage(std::size_t height, std::size_t width, std::vector<std::uint8_t> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (height_ == 0 || width_ == 0) {
        throw ShapeError("image dimensions must be positive");
    }
    if (pixels_.size() != height_ * width_) {
        throw ShapeError("image holds " + std::to_string(pixels_.size()) + " pixels, expected " +
                         std::to_string(height_ * width_));
    }
}

GrayImage::GrayImage(std::size_t height, std::size_t width, std::uint8_t fill)
    : GrayImage(height, width, std::vector<std::uint8_t>(height * width, fill)) {}

namespace {

std::uint8_t to_pixel(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::size_t clamp_index(long i, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1));
}

}  // namespace

GrayImage gaussian_blur(const GrayImage& img, int radius) {
    if (radius <= 0) {
        return img;
    }
    // Same sigma rule OpenCV uses for a ksize = 2r+1 window.
    const double sigma = 0.3 * ((2.0 * radius + 1.0 - 1.0) * 0.5 - 1.0) + 0.8;
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(i + radius)] = w;
        total += w;
    }
    for (double& w : taps) {
        w /= total;
    }

    const std::size_t h = img.height();
    const std::size_t w = img.width();
    std::vector<double> horiz(h * w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += taps[static_cast<std::size_t>(i + radius)] * img(r, clamp_index(static_cast<long>(c) + i, w));
            }
            horiz[r * w + c] = acc;
        }
    }
    std::vector<std::uint8_t> out(h * w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += taps[static_cast<std::size_t>(i + radius)] *
                       horiz[clamp_index(static_cast<long>(r) + i, h) * w + c];
            }
            out[r * w + c] = to_pixel(acc);
        }
    }
    return GrayImage(h, w, std::move(out));
}

Mask threshold(const GrayImage& img, int level) {
    Mask m(img.pixels().size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = img.pixels()[i] > level ? 1 : 0;
    }
    return m;
}

namespace {

// Out-of-image neighbours are ignored, so the border neither grows nor erodes.
Mask morph(const Mask& mask, std::size_t h, std::size_t w, bool grow) {
    Mask out(mask.size());
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            bool v = mask[r * w + c] != 0;
            auto visit = [&](std::size_t rr, std::size_t cc) {
                bool n = mask[rr * w + cc] != 0;
                v = grow ? (v || n) : (v && n);
            };
            if (r > 0) visit(r - 1, c);
            if (r + 1 < h) visit(r + 1, c);
            if (c > 0) visit(r, c - 1);
            if (c + 1 < w) visit(r, c + 1);
            out[r * w + c] = v ? 1 : 0;
        }
    }
    return out;
}

}  // namespace

Mask dilate(const Mask& mask, std::size_t height, std::size_t width) { return morph(mask, height, width, true); }

Mask erode(const Mask& mask, std::size_t height, std::size_t width) { return morph(mask, height, width, false); }

std::vector<std::size_t> largest_component(const Mask& mask, std::size_t h, std::size_t w) {
    std::vector<char> visited(mask.size(), 0);
    std::vector<std::size_t> best;
    std::vector<std::size_t> current;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < mask.size(); ++start) {
        if (!mask[start] || visited[start]) {
            continue;
        }
        current.clear();
        stack.assign(1, start);
        visited[start] = 1;
        while (!stack.empty()) {
            std::size_t p = stack.back();
            stack.pop_back();
            current.push_back(p);
            const std::size_t r = p / w;
            const std::size_t c = p % w;
            auto push = [&](std::size_t q) {
                if (mask[q] && !visited[q]) {
                    visited[q] = 1;
                    stack.push_back(q);
                }
            };
            if (r > 0) push(p - w);
            if (r + 1 < h) push(p + w);
            if (c > 0) push(p - 1);
            if (c + 1 < w) push(p + 1);
        }
        // Components are discovered in raster order of their first pixel, so
        // strict > keeps the earlier one on equal area.
        if (current.size() > best.size()) {
            best = current;
        }
    }
    std::sort(best.begin(), best.end());
    return best;
}

CropBounds find_crop_bounds(const GrayImage& img, const CropParams& p) {
    if (p.threshold <= 0 || p.threshold >= 255) {
        throw ConfigError("crop threshold must lie strictly between 0 and 255");
    }
    if (p.morph_iterations < 0 || p.blur_radius < 0) {
        throw ConfigError("morphology iterations and blur radius must be non-negative");
    }
    if (img.height() < 8 || img.width() < 8) {
        throw CropError("image " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                        " is smaller than 8x8");
    }
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    Mask mask = threshold(gaussian_blur(img, p.blur_radius), p.threshold);
    for (int i = 0; i < p.morph_iterations; ++i) {
        mask = dilate(mask, h, w);
    }
    for (int i = 0; i < p.morph_iterations; ++i) {
        mask = erode(mask, h, w);
    }
    std::vector<std::size_t> comp = largest_component(mask, h, w);
    if (comp.empty()) {
        throw CropError("no foreground above threshold " + std::to_string(p.threshold));
    }
    CropBounds b{std::numeric_limits<std::size_t>::max(), 0, std::numeric_limits<std::size_t>::max(), 0};
    for (std::size_t q : comp) {
        const std::size_t r = q / w;
        const std::size_t c = q % w;
        b.top = std::min(b.top, r);
        b.bottom = std::max(b.bottom, r);
        b.left = std::min(b.left, c);
        b.right = std::max(b.right, c);
    }
    return b;
}

GrayImage crop(const GrayImage& img, const CropBounds& b) {
    if (b.top > b.bottom || b.left > b.right || b.bottom >= img.height() || b.right >= img.width()) {
        throw ShapeError("crop bounds outside the image");
    }
    const std::size_t h = b.bottom - b.top + 1;
    const std::size_t w = b.right - b.left + 1;
    std::vector<std::uint8_t> out;
    out.reserve(h * w);
    for (std::size_t r = b.top; r <= b.bottom; ++r) {
        for (std::size_t c = b.left; c <= b.right; ++c) {
            out.push_back(img(r, c));
        }
    }
    return GrayImage(h, w, std::move(out));
}

GrayImage crop_extreme_points(const GrayImage& img, const CropParams& p) {
    return resize_bicubic(crop(img, find_crop_bounds(img, p)), p.target_size);
}

double cubic_kernel(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) {
        return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    }
    if (x < 2.0) {
        return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    }
    return 0.0;
}

GrayImage resize_bicubic(const GrayImage& img, Size size) {
    if (size.height == 0 || size.width == 0) {
        throw ShapeError("resize target must be positive");
    }
    const std::size_t sh = img.height();
    const std::size_t sw = img.width();
    const double sy = static_cast<double>(sh) / static_cast<double>(size.height);
    const double sx = static_cast<double>(sw) / static_cast<double>(size.width);

    struct Taps {
        long base;
        double w[4];
    };
    auto taps_for = [](double src) {
        Taps t{};
        const double fl = std::floor(src);
        t.base = static_cast<long>(fl) - 1;
        const double frac = src - fl;
        for (int i = 0; i < 4; ++i) {
            t.w[i] = cubic_kernel(frac - static_cast<double>(i - 1));
        }
        return t;
    };
    std::vector<Taps> col_taps(size.width);
    for (std::size_t x = 0; x < size.width; ++x) {
        col_taps[x] = taps_for((static_cast<double>(x) + 0.5) * sx - 0.5);
    }

    std::vector<std::uint8_t> out(size.height * size.width);
    for (std::size_t y = 0; y < size.height; ++y) {
        const Taps ty = taps_for((static_cast<double>(y) + 0.5) * sy - 0.5);
        for (std::size_t x = 0; x < size.width; ++x) {
            const Taps& tx = col_taps[x];
            double acc = 0.0;
            for (int i = 0; i < 4; ++i) {
                const std::size_t r = clamp_index(ty.base + i, sh);
                double row_acc = 0.0;
                for (int j = 0; j < 4; ++j) {
                    row_acc += tx.w[j] * img(r, clamp_index(tx.base + j, sw));
                }
                acc += ty.w[i] * row_acc;
            }
            out[y * size.width + x] = to_pixel(acc);
        }
    }
    return GrayImage(size.height, size.width, std::move(out));
}

GrayImage prepare(const GrayImage& img, const CropParams& p, bool* cropped) {
    try {
        GrayImage out = crop_extreme_points(img, p);
        if (cropped) *cropped = true;
        return out;
    } catch (const CropError&) {
        if (cropped) *cropped = false;
        return resize_bicubic(img, p.target_size);
    }
}

namespace {

GrayImage rotate_clockwise(const GrayImage& img) {
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    GrayImage out(w, h);
    for (std::size_t r = 0; r < w; ++r) {
        for (std::size_t c = 0; c < h; ++c) {
            out(r, c) = img(h - 1 - c, r);
        }
    }
    return out;
}

GrayImage mirror(const GrayImage& img) {
    GrayImage out(img.height(), img.width());
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 0; c < img.width(); ++c) {
            out(r, c) = img(r, img.width() - 1 - c);
        }
    }
    return out;
}

}  // namespace

GrayImage augment(const GrayImage& img, int k_rot, bool hflip) {
    if (k_rot < 0 || k_rot > 3) {
        throw ConfigError("rotation count must be 0..3");
    }
    GrayImage out = img;
    for (int i = 0; i < k_rot; ++i) {
        out = rotate_clockwise(out);
    }
    return hflip ? mirror(out) : out;
}

std::vector<GrayImage> augment_all(const GrayImage& img) {
    std::vector<GrayImage> out{img};
    for (int k = 1; k <= 3; ++k) {
        out.push_back(augment(img, k, false));
        out.push_back(augment(img, k, true));
    }
    return out;
}

}  // namespace deepfuse::imgprep
