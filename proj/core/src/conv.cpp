#include "lcdb/ops.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lcdb::ops {

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, long stride, long pad) {
    check(x.rank() == 4 && w.rank() == 4, "conv2d: rank-4 operands expected");
    const long N = x.dim(0), IC = x.dim(1), H = x.dim(2), W = x.dim(3);
    const long OC = w.dim(0), KH = w.dim(2), KW = w.dim(3);
    check(w.dim(1) == IC, "conv2d: channel mismatch between input and kernel");
    const bool has_bias = b.defined();
    if (has_bias) check(b.numel() == OC, "conv2d: bias size mismatch");
    const long OH = (H + 2 * pad - KH) / stride + 1;
    const long OW = (W + 2 * pad - KW) / stride + 1;
    check(OH >= 1 && OW >= 1, "conv2d: output would be empty");

    std::vector<Tensor> parents = {x, w};
    if (has_bias) parents.push_back(b);
    Tensor out = make_node({N, OC, OH, OW}, parents);

    const double* px = x.data();
    const double* pw = w.data();
    const double* pb = has_bias ? b.data() : nullptr;
    double* po = out.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (long n = 0; n < N; ++n)
        for (long oc = 0; oc < OC; ++oc)
            for (long oh = 0; oh < OH; ++oh)
                for (long ow = 0; ow < OW; ++ow) {
                    double s = pb ? pb[oc] : 0.0;
                    for (long ic = 0; ic < IC; ++ic)
                        for (long kh = 0; kh < KH; ++kh) {
                            const long ih = oh * stride + kh - pad;
                            if (ih < 0 || ih >= H) continue;
                            for (long kw = 0; kw < KW; ++kw) {
                                const long iw = ow * stride + kw - pad;
                                if (iw < 0 || iw >= W) continue;
                                s += px[((n * IC + ic) * H + ih) * W + iw] *
                                     pw[((oc * IC + ic) * KH + kh) * KW + kw];
                            }
                        }
                    po[((n * OC + oc) * OH + oh) * OW + ow] = s;
                }

    auto xi = x.impl_, wi = w.impl_;
    auto bi = has_bias ? b.impl_ : nullptr;
    out.impl_->backward_fn = [=](TensorImpl& self) {
        const double* g = self.grad.data();
        if (bi && bi->requires_grad) {
            bi->ensure_grad();
            for (long oc = 0; oc < OC; ++oc) {
                double s = 0.0;
                for (long n = 0; n < N; ++n)
                    for (long i = 0; i < OH * OW; ++i)
                        s += g[(n * OC + oc) * OH * OW + i];
                bi->grad[oc] += s;
            }
        }
        if (wi->requires_grad) {
            wi->ensure_grad();
            double* gw = wi->grad.data();
#pragma omp parallel for schedule(static)
            for (long oc = 0; oc < OC; ++oc)
                for (long ic = 0; ic < IC; ++ic)
                    for (long kh = 0; kh < KH; ++kh)
                        for (long kw = 0; kw < KW; ++kw) {
                            double s = 0.0;
                            for (long n = 0; n < N; ++n)
                                for (long oh = 0; oh < OH; ++oh) {
                                    const long ih = oh * stride + kh - pad;
                                    if (ih < 0 || ih >= H) continue;
                                    for (long ow = 0; ow < OW; ++ow) {
                                        const long iw = ow * stride + kw - pad;
                                        if (iw < 0 || iw >= W) continue;
                                        s += g[((n * OC + oc) * OH + oh) * OW + ow] *
                                             xi->value[((n * IC + ic) * H + ih) * W + iw];
                                    }
                                }
                            gw[((oc * IC + ic) * KH + kh) * KW + kw] += s;
                        }
        }
        if (xi->requires_grad) {
            xi->ensure_grad();
            double* gx = xi->grad.data();
#pragma omp parallel for collapse(2) schedule(static)
            for (long n = 0; n < N; ++n)
                for (long ic = 0; ic < IC; ++ic)
                    for (long ih = 0; ih < H; ++ih)
                        for (long iw = 0; iw < W; ++iw) {
                            double s = 0.0;
                            for (long oc = 0; oc < OC; ++oc)
                                for (long kh = 0; kh < KH; ++kh) {
                                    const long t = ih + pad - kh;
                                    if (t < 0 || t % stride) continue;
                                    const long oh = t / stride;
                                    if (oh >= OH) continue;
                                    for (long kw = 0; kw < KW; ++kw) {
                                        const long u = iw + pad - kw;
                                        if (u < 0 || u % stride) continue;
                                        const long ow = u / stride;
                                        if (ow >= OW) continue;
                                        s += g[((n * OC + oc) * OH + oh) * OW + ow] *
                                             wi->value[((oc * IC + ic) * KH + kh) * KW + kw];
                                    }
                                }
                            gx[((n * IC + ic) * H + ih) * W + iw] += s;
                        }
        }
    };
    return out;
}

Tensor conv_transpose2d_x2(const Tensor& x, const Tensor& w, const Tensor& b) {
    check(x.rank() == 4 && w.rank() == 4, "conv_transpose2d_x2: rank-4 operands expected");
    const long N = x.dim(0), IC = x.dim(1), H = x.dim(2), W = x.dim(3);
    const long OC = w.dim(1), KH = w.dim(2), KW = w.dim(3);
    check(w.dim(0) == IC && KH == 3 && KW == 3, "conv_transpose2d_x2: kernel must be (IC,OC,3,3)");
    const bool has_bias = b.defined();
    if (has_bias) check(b.numel() == OC, "conv_transpose2d_x2: bias size mismatch");
    const long OH = 2 * H, OW = 2 * W;

    std::vector<Tensor> parents = {x, w};
    if (has_bias) parents.push_back(b);
    Tensor out = make_node({N, OC, OH, OW}, parents);

    const double* px = x.data();
    const double* pw = w.data();
    const double* pb = has_bias ? b.data() : nullptr;
    double* po = out.data();
    // out[oh] gathers input positions with oh = 2*ih + kh - 1.
#pragma omp parallel for collapse(2) schedule(static)
    for (long n = 0; n < N; ++n)
        for (long oc = 0; oc < OC; ++oc)
            for (long oh = 0; oh < OH; ++oh)
                for (long ow = 0; ow < OW; ++ow) {
                    double s = pb ? pb[oc] : 0.0;
                    for (long kh = 0; kh < 3; ++kh) {
                        const long t = oh + 1 - kh;
                        if (t < 0 || t % 2) continue;
                        const long ih = t / 2;
                        if (ih >= H) continue;
                        for (long kw = 0; kw < 3; ++kw) {
                            const long u = ow + 1 - kw;
                            if (u < 0 || u % 2) continue;
                            const long iw = u / 2;
                            if (iw >= W) continue;
                            for (long ic = 0; ic < IC; ++ic)
                                s += px[((n * IC + ic) * H + ih) * W + iw] *
                                     pw[((ic * OC + oc) * 3 + kh) * 3 + kw];
                        }
                    }
                    po[((n * OC + oc) * OH + oh) * OW + ow] = s;
                }

    auto xi = x.impl_, wi = w.impl_;
    auto bi = has_bias ? b.impl_ : nullptr;
    out.impl_->backward_fn = [=](TensorImpl& self) {
        const double* g = self.grad.data();
        if (bi && bi->requires_grad) {
            bi->ensure_grad();
            for (long oc = 0; oc < OC; ++oc) {
                double s = 0.0;
                for (long n = 0; n < N; ++n)
                    for (long i = 0; i < OH * OW; ++i)
                        s += g[(n * OC + oc) * OH * OW + i];
                bi->grad[oc] += s;
            }
        }
        if (wi->requires_grad) {
            wi->ensure_grad();
            double* gw = wi->grad.data();
#pragma omp parallel for schedule(static)
            for (long ic = 0; ic < IC; ++ic)
                for (long oc = 0; oc < OC; ++oc)
                    for (long kh = 0; kh < 3; ++kh)
                        for (long kw = 0; kw < 3; ++kw) {
                            double s = 0.0;
                            for (long n = 0; n < N; ++n)
                                for (long ih = 0; ih < H; ++ih) {
                                    const long oh = 2 * ih + kh - 1;
                                    if (oh < 0 || oh >= OH) continue;
                                    for (long iw = 0; iw < W; ++iw) {
                                        const long ow = 2 * iw + kw - 1;
                                        if (ow < 0 || ow >= OW) continue;
                                        s += g[((n * OC + oc) * OH + oh) * OW + ow] *
                                             xi->value[((n * IC + ic) * H + ih) * W + iw];
                                    }
                                }
                            gw[((ic * OC + oc) * 3 + kh) * 3 + kw] += s;
                        }
        }
        if (xi->requires_grad) {
            xi->ensure_grad();
            double* gx = xi->grad.data();
#pragma omp parallel for collapse(2) schedule(static)
            for (long n = 0; n < N; ++n)
                for (long ic = 0; ic < IC; ++ic)
                    for (long ih = 0; ih < H; ++ih)
                        for (long iw = 0; iw < W; ++iw) {
                            double s = 0.0;
                            for (long kh = 0; kh < 3; ++kh) {
                                const long oh = 2 * ih + kh - 1;
                                if (oh < 0 || oh >= OH) continue;
                                for (long kw = 0; kw < 3; ++kw) {
                                    const long ow = 2 * iw + kw - 1;
                                    if (ow < 0 || ow >= OW) continue;
                                    for (long oc = 0; oc < OC; ++oc)
                                        s += g[((n * OC + oc) * OH + oh) * OW + ow] *
                                             wi->value[((ic * OC + oc) * 3 + kh) * 3 + kw];
                                }
                            }
                            gx[((n * IC + ic) * H + ih) * W + iw] += s;
                        }
        }
    };
    return out;
}

Tensor depthwise_fixed_valid(const Tensor& x, const std::vector<double>& kernel, long k) {
    check(x.rank() == 4, "depthwise_fixed_valid: rank-4 expected");
    check(static_cast<long>(kernel.size()) == k * k, "depthwise_fixed_valid: kernel size");
    const long N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    check(H >= k && W >= k, "depthwise_fixed_valid: image smaller than window");
    const long OH = H - k + 1, OW = W - k + 1;
    Tensor out = make_node({N, C, OH, OW}, {x});
    const double* px = x.data();
    double* po = out.data();
    auto ker = std::make_shared<std::vector<double>>(kernel);
#pragma omp parallel for schedule(static)
    for (long nc = 0; nc < N * C; ++nc)
        for (long oh = 0; oh < OH; ++oh)
            for (long ow = 0; ow < OW; ++ow) {
                double s = 0.0;
                for (long kh = 0; kh < k; ++kh)
                    for (long kw = 0; kw < k; ++kw)
                        s += (*ker)[kh * k + kw] *
                             px[(nc * H + oh + kh) * W + ow + kw];
                po[(nc * OH + oh) * OW + ow] = s;
            }
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, ker, N, C, H, W, OH, OW, k](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        const double* g = self.grad.data();
        double* gx = xi->grad.data();
#pragma omp parallel for schedule(static)
        for (long nc = 0; nc < N * C; ++nc)
            for (long ih = 0; ih < H; ++ih)
                for (long iw = 0; iw < W; ++iw) {
                    double s = 0.0;
                    for (long kh = 0; kh < k; ++kh) {
                        const long oh = ih - kh;
                        if (oh < 0 || oh >= OH) continue;
                        for (long kw = 0; kw < k; ++kw) {
                            const long ow = iw - kw;
                            if (ow < 0 || ow >= OW) continue;
                            s += g[(nc * OH + oh) * OW + ow] * (*ker)[kh * k + kw];
                        }
                    }
                    gx[(nc * H + ih) * W + iw] += s;
                }
    };
    return out;
}

}  // namespace lcdb::ops
