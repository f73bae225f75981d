#include "kcut/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <jpeglib.h>

namespace kcut {

ImageFormat sniff_format(const std::string& b) {
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (b.size() >= 8 && std::equal(png_sig, png_sig + 8, reinterpret_cast<const unsigned char*>(b.data())))
        return ImageFormat::Png;
    if (b.size() >= 3 && static_cast<unsigned char>(b[0]) == 0xFF && static_cast<unsigned char>(b[1]) == 0xD8 &&
        static_cast<unsigned char>(b[2]) == 0xFF)
        return ImageFormat::Jpeg;
    return ImageFormat::Unknown;
}

namespace {

Image decode_png(const std::string& bytes, bool gray) {
    png_image im{};
    im.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&im, bytes.data(), bytes.size()))
        throw ParameterError(std::string("cannot decode PNG: ") + im.message);
    im.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    Image out;
    out.height = static_cast<int>(im.height);
    out.width = static_cast<int>(im.width);
    out.channels = gray ? 1 : 3;
    out.pixels.resize(PNG_IMAGE_SIZE(im));
    if (!png_image_finish_read(&im, nullptr, out.pixels.data(), 0, nullptr)) {
        std::string msg = im.message;
        png_image_free(&im);
        throw ParameterError("cannot decode PNG: " + msg);
    }
    return out;
}

struct JpegError {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_fail(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

Image decode_jpeg(const std::string& bytes, bool gray) {
    jpeg_decompress_struct cinfo;
    JpegError err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_fail;
    Image out;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw ParameterError(std::string("cannot decode JPEG: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);
    out.height = static_cast<int>(cinfo.output_height);
    out.width = static_cast<int>(cinfo.output_width);
    out.channels = static_cast<int>(cinfo.output_components);
    out.pixels.resize(static_cast<size_t>(out.height) * out.width * out.channels);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out.pixels.data() + static_cast<size_t>(cinfo.output_scanline) * out.width * out.channels;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot open image '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

Image decode_image(const std::string& bytes, bool gray) {
    switch (sniff_format(bytes)) {
    case ImageFormat::Png: return decode_png(bytes, gray);
    case ImageFormat::Jpeg: return decode_jpeg(bytes, gray);
    default: throw ParameterError("unsupported image format (expected PNG or JPEG)");
    }
}

Image read_image(const std::string& path, bool gray) { return decode_image(slurp(path), gray); }

std::string encode_png(const Image& img) {
    if (img.channels != 1 && img.channels != 3) throw ParameterError("PNG output supports 1 or 3 channels");
    png_image im{};
    im.version = PNG_IMAGE_VERSION;
    im.width = static_cast<png_uint_32>(img.width);
    im.height = static_cast<png_uint_32>(img.height);
    im.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&im, nullptr, &size, 0, img.pixels.data(), 0, nullptr))
        throw Error(std::string("PNG encoding failed: ") + im.message);
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&im, out.data(), &size, 0, img.pixels.data(), 0, nullptr))
        throw Error(std::string("PNG encoding failed: ") + im.message);
    out.resize(size);
    return out;
}

void write_png(const std::string& path, const Image& img) {
    std::string bytes = encode_png(img);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParameterError("cannot write '" + path + "'");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image downscale_to(const Image& img, int max_pixels) {
    if (img.size() <= max_pixels) return img;
    const double f = std::sqrt(static_cast<double>(img.size()) / max_pixels);
    int h = std::max(1, static_cast<int>(img.height / f)), w = std::max(1, static_cast<int>(img.width / f));
    while (h * w > max_pixels) {
        if (h >= w) --h;
        else --w;
    }
    Image out;
    out.height = h;
    out.width = w;
    out.channels = img.channels;
    out.pixels.resize(static_cast<size_t>(h) * w * img.channels);
    for (int y = 0; y < h; ++y) {
        int y0 = y * img.height / h, y1 = std::max(y0 + 1, (y + 1) * img.height / h);
        for (int x = 0; x < w; ++x) {
            int x0 = x * img.width / w, x1 = std::max(x0 + 1, (x + 1) * img.width / w);
            for (int c = 0; c < img.channels; ++c) {
                double s = 0;
                for (int yy = y0; yy < y1; ++yy)
                    for (int xx = x0; xx < x1; ++xx) s += img.at(yy, xx, c);
                out.pixels[(static_cast<size_t>(y) * w + x) * img.channels + c] =
                    static_cast<std::uint8_t>(std::lround(s / ((y1 - y0) * (x1 - x0))));
            }
        }
    }
    return out;
}

Mat rgb_to_lab(const Mat& rgb) {
    auto lin = [](double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); };
    auto f = [](double t) {
        const double e = 216.0 / 24389.0, k = 24389.0 / 27.0;
        return t > e ? std::cbrt(t) : (k * t + 16.0) / 116.0;
    };
    Mat lab(rgb.rows(), 3);
    for (Eigen::Index p = 0; p < rgb.rows(); ++p) {
        double r = lin(rgb(p, 0)), g = lin(rgb(p, 1)), b = lin(rgb(p, 2));
        double X = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
        double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
        double Z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
        double fx = f(X), fy = f(Y), fz = f(Z);
        lab(p, 0) = 116.0 * fy - 16.0;
        lab(p, 1) = 500.0 * (fx - fy);
        lab(p, 2) = 200.0 * (fy - fz);
    }
    return lab;
}

Mat image_rgb(const Image& img) {
    Mat rgb(img.size(), 3);
    for (int p = 0; p < img.size(); ++p)
        for (int c = 0; c < 3; ++c) rgb(p, c) = img.pixels[static_cast<size_t>(p) * img.channels + (img.channels == 1 ? 0 : c)] / 255.0;
    return rgb;
}

Image image_from_rgb(const Mat& rgb, int height, int width) {
    if (rgb.rows() != static_cast<Eigen::Index>(height) * width || rgb.cols() != 3)
        throw DimensionError("rgb matrix does not match image size");
    Image img;
    img.height = height;
    img.width = width;
    img.channels = 3;
    img.pixels.resize(static_cast<size_t>(height) * width * 3);
    for (Eigen::Index p = 0; p < rgb.rows(); ++p)
        for (int c = 0; c < 3; ++c)
            img.pixels[p * 3 + c] = static_cast<std::uint8_t>(std::lround(std::clamp(rgb(p, c), 0.0, 1.0) * 255.0));
    return img;
}

Dataset image_features(const Mat& rgb, const Grid& grid, const FeatureOptions& opt) {
    const int n = grid.height * grid.width;
    if (rgb.rows() != n) throw DimensionError("color matrix does not match grid");
    Mat color = opt.color == ColorSpace::Lab ? rgb_to_lab(rgb) : rgb;
    for (int c = 0; c < 3; ++c) {
        double lo = color.col(c).minCoeff(), hi = color.col(c).maxCoeff();
        if (hi > lo) color.col(c) = ((color.col(c).array() - lo) / (hi - lo)).matrix();
        else color.col(c).setZero();
    }
    const bool xy = opt.beta_xy != 0.0;
    Dataset d;
    d.features.resize(n, xy ? 5 : 3);
    d.features.leftCols(3) = color;
    if (xy) {
        for (int y = 0; y < grid.height; ++y)
            for (int x = 0; x < grid.width; ++x) {
                const int p = grid.index(y, x);
                d.features(p, 3) = opt.beta_xy * (grid.width > 1 ? x / (grid.width - 1.0) : 0.0);
                d.features(p, 4) = opt.beta_xy * (grid.height > 1 ? y / (grid.height - 1.0) : 0.0);
            }
    }
    d.grid = grid;
    return d;
}

Dataset image_features(const Image& img, const FeatureOptions& opt) {
    return image_features(image_rgb(img), Grid{img.height, img.width, 8}, opt);
}

Image label_mask(const std::vector<int>& labels, int K, int height, int width) {
    if (static_cast<int>(labels.size()) != height * width) throw DimensionError("labels do not match mask size");
    Image m;
    m.height = height;
    m.width = width;
    m.channels = 1;
    m.pixels.resize(labels.size());
    for (size_t p = 0; p < labels.size(); ++p)
        m.pixels[p] = static_cast<std::uint8_t>(K > 1 ? std::lround(255.0 * labels[p] / (K - 1)) : 0);
    return m;
}

Image label_overlay(const Image& img, const std::vector<int>& labels, double alpha) {
    static const int palette[8][3] = {{30, 60, 220}, {230, 40, 40}, {40, 200, 60}, {240, 200, 20},
                                      {200, 50, 200}, {20, 200, 220}, {250, 130, 20}, {120, 120, 120}};
    if (static_cast<int>(labels.size()) != img.size()) throw DimensionError("labels do not match image size");
    Image out;
    out.height = img.height;
    out.width = img.width;
    out.channels = 3;
    out.pixels.resize(static_cast<size_t>(img.size()) * 3);
    for (int p = 0; p < img.size(); ++p) {
        const int* col = palette[labels[p] % 8];
        for (int c = 0; c < 3; ++c) {
            double v = img.pixels[static_cast<size_t>(p) * img.channels + (img.channels == 1 ? 0 : c)];
            out.pixels[static_cast<size_t>(p) * 3 + c] =
                static_cast<std::uint8_t>(std::lround((1 - alpha) * v + alpha * col[c]));
        }
    }
    return out;
}

}  // namespace kcut
