#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace deepfuse::imgprep {

/// 8-bit grayscale raster, row-major.
class GrayImage {
public:
    GrayImage(std::size_t height, std::size_t width, std::vector<std::uint8_t> pixels);
    GrayImage(std::size_t height, std::size_t width, std::uint8_t fill = 0);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }

    std::uint8_t operator()(std::size_t r, std::size_t c) const noexcept { return pixels_[r * width_ + c]; }
    std::uint8_t& operator()(std::size_t r, std::size_t c) noexcept { return pixels_[r * width_ + c]; }

    const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t height_;
    std::size_t width_;
    std::vector<std::uint8_t> pixels_;
};

struct Size {
    std::size_t height = 224;
    std::size_t width = 224;
};

struct CropParams {
    int threshold = 45;         // foreground: blurred intensity > threshold
    int morph_iterations = 2;   // dilations, then the same number of erosions
    int blur_radius = 2;        // Gaussian window 2r+1; 0 disables
    Size target_size{};
};

/// Inclusive pixel bounds of the largest foreground component.
struct CropBounds {
    std::size_t top = 0;
    std::size_t bottom = 0;
    std::size_t left = 0;
    std::size_t right = 0;

    friend bool operator==(const CropBounds&, const CropBounds&) = default;
};

/// Binary mask, 1 = foreground.
using Mask = std::vector<std::uint8_t>;

GrayImage gaussian_blur(const GrayImage& img, int radius);
Mask threshold(const GrayImage& img, int level);
Mask dilate(const Mask& mask, std::size_t height, std::size_t width);  // 3x3 cross
Mask erode(const Mask& mask, std::size_t height, std::size_t width);   // 3x3 cross

/// Pixels (as flat indices) of the largest 4-connected foreground component.
/// Ties on area go to the component whose first pixel in raster order comes
/// first. Empty when the mask has no foreground.
std::vector<std::size_t> largest_component(const Mask& mask, std::size_t height, std::size_t width);

/// Blur, threshold, dilate/erode, then the extreme points of the largest
/// component. Throws CropError on an empty foreground or an image smaller
/// than 8x8.
CropBounds find_crop_bounds(const GrayImage& img, const CropParams& p);

GrayImage crop(const GrayImage& img, const CropBounds& bounds);

/// Crop to the extreme points and resize to `p.target_size`.
GrayImage crop_extreme_points(const GrayImage& img, const CropParams& p);

/// Cubic convolution (a = -0.5), pixel-centre alignment, edge-clamped
/// addressing, output rounded and clamped to [0, 255].
GrayImage resize_bicubic(const GrayImage& img, Size size);

/// Keys cubic convolution kernel with a = -0.5.
double cubic_kernel(double x);

/// crop_extreme_points, falling back to a whole-image resize when the crop
/// fails. `cropped` (if given) reports which path ran.
GrayImage prepare(const GrayImage& img, const CropParams& p, bool* cropped = nullptr);

/// `k_rot` clockwise quarter turns, then an optional horizontal mirror.
GrayImage augment(const GrayImage& img, int k_rot, bool hflip);

/// The original followed by the three rotations, each without and with a
/// horizontal flip: 7 images per input.
std::vector<GrayImage> augment_all(const GrayImage& img);

// Binary PGM (P5, maxval 255).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

}  // namespace deepfuse::imgprep
