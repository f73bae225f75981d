#pragma once

#include "kcut/core_model.hpp"

namespace kcut {

// 8-bit image, interleaved channels (1 = gray, 3 = RGB), row-major.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 3;
    std::vector<std::uint8_t> pixels;

    int size() const { return height * width; }
    std::uint8_t at(int y, int x, int c) const { return pixels[(static_cast<size_t>(y) * width + x) * channels + c]; }
};

enum class ImageFormat { Png, Jpeg, Unknown };
ImageFormat sniff_format(const std::string& bytes);

// Decodes PNG or JPEG; channels is 3 (or 1 when gray is requested).
Image decode_image(const std::string& bytes, bool gray = false);
Image read_image(const std::string& path, bool gray = false);
std::string encode_png(const Image& img);
void write_png(const std::string& path, const Image& img);

// Box-filter downscale so that height*width <= max_pixels.
Image downscale_to(const Image& img, int max_pixels);

// sRGB in [0,1] (n x 3) to CIE Lab (D65).
Mat rgb_to_lab(const Mat& rgb);

enum class ColorSpace { Rgb, Lab };

struct FeatureOptions {
    ColorSpace color = ColorSpace::Lab;
    double beta_xy = 0.0;  // weight of normalized (x, y) coordinates
};

// Per-pixel features with each color channel scaled to [0,1]; x and y are
// scaled to [0,1] then multiplied by beta_xy. Grid is set.
Dataset image_features(const Image& img, const FeatureOptions& opt = {});
Dataset image_features(const Mat& rgb, const Grid& grid, const FeatureOptions& opt = {});
Mat image_rgb(const Image& img);  // n x 3 in [0,1]
Image image_from_rgb(const Mat& rgb, int height, int width);

// Label mask as gray levels spread over 0..255, and a tinted overlay.
Image label_mask(const std::vector<int>& labels, int K, int height, int width);
Image label_overlay(const Image& img, const std::vector<int>& labels, double alpha = 0.45);

}  // namespace kcut
