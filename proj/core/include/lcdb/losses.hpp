#pragma once

#include "lcdb/tensor.hpp"

namespace lcdb {

inline constexpr double kCharbonnierEps = 0.001;
inline constexpr double kLambdaLan = 0.1;
inline constexpr double kLambdaCrn = 0.1;

// Per-term values with the differentiable total. All terms are computed in
// the unit-normalized YCbCr domain by the callers.
struct LossBreakdown {
    Tensor total;  // scalar, carries the graph
    struct Term {
        double charbonnier = 0.0;
        double ssim_loss = 0.0;
        double value() const { return charbonnier + ssim_loss; }
    };
    Term lan, crn, main;
    double lambda1 = kLambdaLan, lambda2 = kLambdaCrn;
    double total_value() const {
        return lambda1 * lan.value() + lambda2 * crn.value() + main.value();
    }
};

// mean(sqrt((x-y)^2 + eps^2)); elementwise-mean Charbonnier.
Tensor charbonnier(const Tensor& x, const Tensor& y, double eps = kCharbonnierEps);

// Differentiable SSIM matching metrics::ssim (11x11 Gaussian, sigma 1.5,
// valid windows); mean over windows, channels, and batch.
Tensor ssim_tensor(const Tensor& x, const Tensor& y);
Tensor ssim_loss(const Tensor& x, const Tensor& y);  // 1 - ssim

// Charbonnier + SSIM loss (the per-branch objective).
Tensor branch_loss(const Tensor& pred, const Tensor& target);

// Three-term objective. sm_lum (N,1,H,W), sm_chrom (N,2,H,W), full/ref
// (N,3,H,W) in [Y,Cb',Cr'] channel order, all unit-normalized.
LossBreakdown joint_loss(const Tensor& sm_lum, const Tensor& sm_chrom,
                         const Tensor& full_ycc, const Tensor& ref_ycc,
                         double lambda1 = kLambdaLan, double lambda2 = kLambdaCrn);

}  // namespace lcdb
