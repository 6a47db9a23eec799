#pragma once

#include "lcdb/colorspace.hpp"

#include <string>
#include <vector>

namespace lcdb {

struct MetricReport {
    struct Row {
        std::string name;
        double psnr_db = 0.0;
        double ssim = 0.0;
    };
    std::vector<Row> per_image;
    double psnr_db = 0.0;  // arithmetic mean of rows
    double ssim = 0.0;

    void recompute_means();
    std::string to_text() const;
    std::string to_json() const;
};

// SSIM window: 11x11 Gaussian, sigma 1.5, C1=(0.01*Dr)^2, C2=(0.03*Dr)^2, Dr=1.
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// Normalized kSsimWindow^2 Gaussian taps, row-major.
std::vector<double> ssim_gaussian_kernel();

// 10*log10(peak^2 / MSE); +infinity when x == y.
double psnr(const std::vector<double>& x, const std::vector<double>& y, double peak = 1.0);
double psnr(const Plane& x, const Plane& y, double peak = 1.0);

// Mean local SSIM over valid window positions.
double ssim(const Plane& x, const Plane& y);
// Multi-channel SSIM: mean of per-channel values.
double ssim(const RgbImage& x, const RgbImage& y);

// RGB-domain metrics on final (clamped) outputs.
struct PairMetrics {
    double psnr_db;
    double ssim;
};
PairMetrics evaluate_pair(const RgbImage& pred, const RgbImage& ref);

}  // namespace lcdb
