#include "lcdb/colorspace.hpp"

#include <cmath>
#include <stdexcept>

namespace lcdb {

const std::array<std::array<double, 3>, 3> kRgbToYcc = {{
    {0.299, 0.587, 0.114},
    {-0.147, -0.289, 0.436},
    {0.615, -0.515, -0.100},
}};

namespace {

// 3x3 inverse via adjugate; the printed coefficients are the single source of
// truth, so the inverse is computed from them rather than taken from a
// standards table.
std::array<std::array<double, 3>, 3> invert3(const std::array<std::array<double, 3>, 3>& m) {
    const double a = m[0][0], b = m[0][1], c = m[0][2];
    const double d = m[1][0], e = m[1][1], f = m[1][2];
    const double g = m[2][0], h = m[2][1], i = m[2][2];
    const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    if (std::abs(det) < 1e-12) throw std::runtime_error("invert3: singular matrix");
    const double inv = 1.0 / det;
    return {{
        {(e * i - f * h) * inv, (c * h - b * i) * inv, (b * f - c * e) * inv},
        {(f * g - d * i) * inv, (a * i - c * g) * inv, (c * d - a * f) * inv},
        {(d * h - e * g) * inv, (b * g - a * h) * inv, (a * e - b * d) * inv},
    }};
}

}  // namespace

const std::array<std::array<double, 3>, 3> kYccToRgb = invert3(kRgbToYcc);

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}

}  // namespace

YccImage rgb_to_ycc(const RgbImage& img) {
    if (img.h < 1 || img.w < 1) throw std::invalid_argument("rgb_to_ycc: empty image");
    require_finite(img.v, "rgb_to_ycc");
    YccImage out;
    out.y = Plane(img.h, img.w);
    out.cb = Plane(img.h, img.w);
    out.cr = Plane(img.h, img.w);
    const long n = img.h * img.w;
    for (long i = 0; i < n; ++i) {
        const double r = img.v[i * 3], g = img.v[i * 3 + 1], b = img.v[i * 3 + 2];
        out.y.v[i] = kRgbToYcc[0][0] * r + kRgbToYcc[0][1] * g + kRgbToYcc[0][2] * b;
        out.cb.v[i] = kRgbToYcc[1][0] * r + kRgbToYcc[1][1] * g + kRgbToYcc[1][2] * b;
        out.cr.v[i] = kRgbToYcc[2][0] * r + kRgbToYcc[2][1] * g + kRgbToYcc[2][2] * b;
    }
    return out;
}

RgbImage ycc_to_rgb(const YccImage& img) {
    require_finite(img.y.v, "ycc_to_rgb");
    require_finite(img.cb.v, "ycc_to_rgb");
    require_finite(img.cr.v, "ycc_to_rgb");
    RgbImage out(img.y.h, img.y.w);
    const long n = img.y.h * img.y.w;
    for (long i = 0; i < n; ++i) {
        const double y = img.y.v[i], cb = img.cb.v[i], cr = img.cr.v[i];
        for (int c = 0; c < 3; ++c) {
            const double v =
                kYccToRgb[c][0] * y + kYccToRgb[c][1] * cb + kYccToRgb[c][2] * cr;
            out.v[i * 3 + c] = std::min(1.0, std::max(0.0, v));
        }
    }
    return out;
}

UnitYccImage normalize_ycc(const YccImage& img) {
    UnitYccImage out;
    out.y = img.y;
    out.cb = Plane(img.cb.h, img.cb.w);
    out.cr = Plane(img.cr.h, img.cr.w);
    for (size_t i = 0; i < img.cb.v.size(); ++i)
        out.cb.v[i] = img.cb.v[i] / (2.0 * kCbHalfRange) + 0.5;
    for (size_t i = 0; i < img.cr.v.size(); ++i)
        out.cr.v[i] = img.cr.v[i] / (2.0 * kCrHalfRange) + 0.5;
    return out;
}

YccImage denormalize_ycc(const UnitYccImage& img) {
    YccImage out;
    out.y = img.y;
    out.cb = Plane(img.cb.h, img.cb.w);
    out.cr = Plane(img.cr.h, img.cr.w);
    for (size_t i = 0; i < img.cb.v.size(); ++i)
        out.cb.v[i] = (img.cb.v[i] - 0.5) * (2.0 * kCbHalfRange);
    for (size_t i = 0; i < img.cr.v.size(); ++i)
        out.cr.v[i] = (img.cr.v[i] - 0.5) * (2.0 * kCrHalfRange);
    return out;
}

RgbImage decode_rgb8(const std::vector<unsigned char>& bytes, long h, long w) {
    if (static_cast<long>(bytes.size()) != h * w * 3)
        throw std::invalid_argument("decode_rgb8: byte count mismatch");
    RgbImage img(h, w);
    for (size_t i = 0; i < bytes.size(); ++i) img.v[i] = bytes[i] / 255.0;
    return img;
}

std::vector<unsigned char> encode_rgb8(const RgbImage& img) {
    std::vector<unsigned char> out(img.v.size());
    for (size_t i = 0; i < img.v.size(); ++i) {
        const double c = std::min(1.0, std::max(0.0, img.v[i]));
        out[i] = static_cast<unsigned char>(std::lround(c * 255.0));
    }
    return out;
}

}  // namespace lcdb
