#pragma once

#include <array>
#include <string>
#include <vector>

namespace lcdb {

// H x W plane of doubles, row-major.
struct Plane {
    long h = 0, w = 0;
    std::vector<double> v;

    Plane() = default;
    Plane(long h_, long w_) : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, 0.0) {}
    double& at(long y, long x) { return v[y * w + x]; }
    double at(long y, long x) const { return v[y * w + x]; }
};

// Interleaved H x W x 3 image, values in [0,1] after decoding.
struct RgbImage {
    long h = 0, w = 0;
    std::vector<double> v;  // HWC

    RgbImage() = default;
    RgbImage(long h_, long w_) : h(h_), w(w_), v(static_cast<size_t>(h_) * w_ * 3, 0.0) {}
    double& at(long y, long x, int c) { return v[(y * w + x) * 3 + c]; }
    double at(long y, long x, int c) const { return v[(y * w + x) * 3 + c]; }
};

// Y in [0,1], Cb in [-0.436,0.436], Cr in [-0.615,0.615].
struct YccImage {
    Plane y, cb, cr;
};

// All three channels remapped to [0,1]; the working domain of the networks,
// losses and metrics. Stored as planes in Y, Cb', Cr' order.
struct UnitYccImage {
    Plane y, cb, cr;
};

// Chroma half-ranges implied by the forward matrix with RGB in [0,1].
inline constexpr double kCbHalfRange = 0.436;
inline constexpr double kCrHalfRange = 0.615;

// Forward matrix (rows Y, Cb, Cr).
extern const std::array<std::array<double, 3>, 3> kRgbToYcc;
// Full-precision numeric inverse of kRgbToYcc.
extern const std::array<std::array<double, 3>, 3> kYccToRgb;

YccImage rgb_to_ycc(const RgbImage& img);
// Inverse transform followed by a clamp to [0,1].
RgbImage ycc_to_rgb(const YccImage& img);

UnitYccImage normalize_ycc(const YccImage& img);
YccImage denormalize_ycc(const UnitYccImage& img);

// 8-bit codecs: decode v/255, encode round(clamp(v,0,1)*255).
RgbImage decode_rgb8(const std::vector<unsigned char>& bytes, long h, long w);
std::vector<unsigned char> encode_rgb8(const RgbImage& img);

// PNG file I/O (8-bit RGB; alpha dropped, grayscale expanded).
RgbImage read_png(const std::string& path);
void write_png(const std::string& path, const RgbImage& img);
void write_png_gray(const std::string& path, const Plane& plane);

// 16-bit grayscale PNG I/O for channel maps that must survive a round trip
// with less quantization error than 8-bit storage allows. Values are clamped
// to [0, 1] and scaled by 65535.
void write_png_gray16(const std::string& path, const Plane& plane);
Plane read_png_gray16(const std::string& path);

}  // namespace lcdb
