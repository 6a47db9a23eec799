#include "lcdb/losses.hpp"

#include "lcdb/metrics.hpp"
#include "lcdb/ops.hpp"

#include <cmath>

namespace lcdb {

using namespace ops;

Tensor charbonnier(const Tensor& x, const Tensor& y, double eps) {
    check(x.shape() == y.shape(), "charbonnier: shape mismatch");
    check(eps > 0.0, "charbonnier: eps must be positive");
    Tensor d = sub(x, y);
    // Single fused node: hypot keeps the zero-residual case exactly equal to
    // eps, and the extended-precision accumulator keeps the mean of identical
    // values exact.
    Tensor out = make_node({1}, {d});
    const long n = d.numel();
    {
        long double acc = 0.0L;
        const double* dv = d.data();
        for (long i = 0; i < n; ++i) acc += std::hypot(dv[i], eps);
        out.data()[0] = static_cast<double>(acc / n);
    }
    if (out.requires_grad()) {
        std::shared_ptr<TensorImpl> di = d.impl_;
        out.impl_->backward_fn = [di, eps, n](TensorImpl& self) {
            if (!di->requires_grad) return;
            di->ensure_grad();
            const double g = self.grad[0] / static_cast<double>(n);
            for (long i = 0; i < n; ++i)
                di->grad[i] += g * di->value[i] / std::hypot(di->value[i], eps);
        };
    }
    return out;
}

Tensor ssim_tensor(const Tensor& x, const Tensor& y) {
    check(x.shape() == y.shape(), "ssim: shape mismatch");
    check(x.rank() == 4, "ssim: rank-4 expected");
    check(x.dim(2) >= kSsimWindow && x.dim(3) >= kSsimWindow,
          "ssim: image smaller than the window");
    static const std::vector<double> kernel = ssim_gaussian_kernel();
    Tensor mx = depthwise_fixed_valid(x, kernel, kSsimWindow);
    Tensor my = depthwise_fixed_valid(y, kernel, kSsimWindow);
    Tensor mxx = depthwise_fixed_valid(mul(x, x), kernel, kSsimWindow);
    Tensor myy = depthwise_fixed_valid(mul(y, y), kernel, kSsimWindow);
    Tensor mxy = depthwise_fixed_valid(mul(x, y), kernel, kSsimWindow);
    Tensor mx2 = mul(mx, mx);
    Tensor my2 = mul(my, my);
    Tensor mxmy = mul(mx, my);
    Tensor vx = sub(mxx, mx2);
    Tensor vy = sub(myy, my2);
    Tensor cxy = sub(mxy, mxmy);
    Tensor num = mul(add_scalar(mul_scalar(mxmy, 2.0), kSsimC1),
                     add_scalar(mul_scalar(cxy, 2.0), kSsimC2));
    Tensor den = mul(add_scalar(add(mx2, my2), kSsimC1),
                     add_scalar(add(vx, vy), kSsimC2));
    return mean_all(div(num, den));
}

Tensor ssim_loss(const Tensor& x, const Tensor& y) {
    return add_scalar(mul_scalar(ssim_tensor(x, y), -1.0), 1.0);
}

Tensor branch_loss(const Tensor& pred, const Tensor& target) {
    return add(charbonnier(pred, target), ssim_loss(pred, target));
}

LossBreakdown joint_loss(const Tensor& sm_lum, const Tensor& sm_chrom,
                         const Tensor& full_ycc, const Tensor& ref_ycc,
                         double lambda1, double lambda2) {
    check(full_ycc.shape() == ref_ycc.shape(), "joint_loss: full/ref shape mismatch");
    check(full_ycc.rank() == 4 && full_ycc.dim(1) == 3, "joint_loss: (N,3,H,W) expected");
    Tensor ref_y = slice_channels(ref_ycc, 0, 1);
    Tensor ref_cbcr = slice_channels(ref_ycc, 1, 2);
    check(sm_lum.shape() == ref_y.shape(), "joint_loss: sm_lum shape mismatch");
    check(sm_chrom.shape() == ref_cbcr.shape(), "joint_loss: sm_chrom shape mismatch");

    LossBreakdown out;
    out.lambda1 = lambda1;
    out.lambda2 = lambda2;

    Tensor lan_c = charbonnier(sm_lum, ref_y);
    Tensor lan_s = ssim_loss(sm_lum, ref_y);
    Tensor crn_c = charbonnier(sm_chrom, ref_cbcr);
    Tensor crn_s = ssim_loss(sm_chrom, ref_cbcr);
    Tensor main_c = charbonnier(full_ycc, ref_ycc);
    Tensor main_s = ssim_loss(full_ycc, ref_ycc);

    out.lan = {lan_c.item(), lan_s.item()};
    out.crn = {crn_c.item(), crn_s.item()};
    out.main = {main_c.item(), main_s.item()};

    out.total = ops::add(
        ops::add(ops::mul_scalar(ops::add(lan_c, lan_s), lambda1),
                 ops::mul_scalar(ops::add(crn_c, crn_s), lambda2)),
        ops::add(main_c, main_s));
    return out;
}

}  // namespace lcdb
