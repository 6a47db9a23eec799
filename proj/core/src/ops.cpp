#include "lcdb/ops.hpp"

#include "lcdb/wavelet.hpp"

#include <algorithm>
#include <cmath>

namespace lcdb::ops {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

void accumulate(TensorImpl* p, const double* g, long n) {
    if (!p->requires_grad) return;
    p->ensure_grad();
    double* pg = p->grad.data();
    for (long i = 0; i < n; ++i) pg[i] += g[i];
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check(a.shape() == b.shape(), "add: shape mismatch");
    Tensor out = make_node(a.shape(), {a, b});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const long n = out.numel();
    for (long i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
    auto ai = a.impl_, bi = b.impl_;
    out.impl_->backward_fn = [ai, bi, n](TensorImpl& self) {
        accumulate(ai.get(), self.grad.data(), n);
        accumulate(bi.get(), self.grad.data(), n);
    };
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check(a.shape() == b.shape(), "sub: shape mismatch");
    Tensor out = make_node(a.shape(), {a, b});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const long n = out.numel();
    for (long i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
    auto ai = a.impl_, bi = b.impl_;
    out.impl_->backward_fn = [ai, bi, n](TensorImpl& self) {
        const double* g = self.grad.data();
        accumulate(ai.get(), g, n);
        if (bi->requires_grad) {
            bi->ensure_grad();
            for (long i = 0; i < n; ++i) bi->grad[i] -= g[i];
        }
    };
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check(a.shape() == b.shape(), "mul: shape mismatch");
    Tensor out = make_node(a.shape(), {a, b});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const long n = out.numel();
    for (long i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
    auto ai = a.impl_, bi = b.impl_;
    out.impl_->backward_fn = [ai, bi, n](TensorImpl& self) {
        const double* g = self.grad.data();
        if (ai->requires_grad) {
            ai->ensure_grad();
            for (long i = 0; i < n; ++i) ai->grad[i] += g[i] * bi->value[i];
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
            for (long i = 0; i < n; ++i) bi->grad[i] += g[i] * ai->value[i];
        }
    };
    return out;
}

Tensor div(const Tensor& a, const Tensor& b) {
    check(a.shape() == b.shape(), "div: shape mismatch");
    Tensor out = make_node(a.shape(), {a, b});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const long n = out.numel();
    for (long i = 0; i < n; ++i) po[i] = pa[i] / pb[i];
    auto ai = a.impl_, bi = b.impl_;
    out.impl_->backward_fn = [ai, bi, n](TensorImpl& self) {
        const double* g = self.grad.data();
        if (ai->requires_grad) {
            ai->ensure_grad();
            for (long i = 0; i < n; ++i) ai->grad[i] += g[i] / bi->value[i];
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
            for (long i = 0; i < n; ++i)
                bi->grad[i] -= g[i] * ai->value[i] / (bi->value[i] * bi->value[i]);
        }
    };
    return out;
}

Tensor add_scalar(const Tensor& a, double s) {
    Tensor out = make_node(a.shape(), {a});
    const double* pa = a.data();
    double* po = out.data();
    const long n = out.numel();
    for (long i = 0; i < n; ++i) po[i] = pa[i] + s;
    auto ai = a.impl_;
    out.impl_->backward_fn = [ai, n](TensorImpl& self) {
        accumulate(ai.get(), self.grad.data(), n);
    };
    return out;
}

Tensor mul_scalar(const Tensor& a, double s) {
    Tensor out = make_node(a.shape(), {a});
    const double* pa = a.data();
    double* po = out.data();
    const long n = out.numel();
    for (long i = 0; i < n; ++i) po[i] = pa[i] * s;
    auto ai = a.impl_;
    out.impl_->backward_fn = [ai, n, s](TensorImpl& self) {
        if (!ai->requires_grad) return;
        ai->ensure_grad();
        const double* g = self.grad.data();
        for (long i = 0; i < n; ++i) ai->grad[i] += g[i] * s;
    };
    return out;
}

Tensor relu(const Tensor& a) {
    Tensor out = make_node(a.shape(), {a});
    const double* pa = a.data();
    double* po = out.data();
    const long n = out.numel();
    for (long i = 0; i < n; ++i) po[i] = pa[i] > 0.0 ? pa[i] : 0.0;
    auto ai = a.impl_;
    out.impl_->backward_fn = [ai, n](TensorImpl& self) {
        if (!ai->requires_grad) return;
        ai->ensure_grad();
        const double* g = self.grad.data();
        for (long i = 0; i < n; ++i)
            if (ai->value[i] > 0.0) ai->grad[i] += g[i];
    };
    return out;
}

Tensor sigmoid(const Tensor& a) {
    Tensor out = make_node(a.shape(), {a});
    const double* pa = a.data();
    double* po = out.data();
    const long n = out.numel();
    for (long i = 0; i < n; ++i) po[i] = 1.0 / (1.0 + std::exp(-pa[i]));
    auto ai = a.impl_;
    out.impl_->backward_fn = [ai, n](TensorImpl& self) {
        if (!ai->requires_grad) return;
        ai->ensure_grad();
        const double* g = self.grad.data();
        for (long i = 0; i < n; ++i) {
            const double y = self.value[i];
            ai->grad[i] += g[i] * y * (1.0 - y);
        }
    };
    return out;
}

Tensor gelu(const Tensor& a) {
    Tensor out = make_node(a.shape(), {a});
    const double* pa = a.data();
    double* po = out.data();
    const long n = out.numel();
    for (long i = 0; i < n; ++i)
        po[i] = 0.5 * pa[i] * (1.0 + std::erf(pa[i] * M_SQRT1_2));
    auto ai = a.impl_;
    out.impl_->backward_fn = [ai, n](TensorImpl& self) {
        if (!ai->requires_grad) return;
        ai->ensure_grad();
        const double* g = self.grad.data();
        for (long i = 0; i < n; ++i) {
            const double x = ai->value[i];
            const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            ai->grad[i] += g[i] * (cdf + x * pdf);
        }
    };
    return out;
}

Tensor sqrt_elem(const Tensor& a) {
    Tensor out = make_node(a.shape(), {a});
    const double* pa = a.data();
    double* po = out.data();
    const long n = out.numel();
    for (long i = 0; i < n; ++i) po[i] = std::sqrt(pa[i]);
    auto ai = a.impl_;
    out.impl_->backward_fn = [ai, n](TensorImpl& self) {
        if (!ai->requires_grad) return;
        ai->ensure_grad();
        const double* g = self.grad.data();
        for (long i = 0; i < n; ++i) ai->grad[i] += g[i] * 0.5 / self.value[i];
    };
    return out;
}

Tensor scale_channels(const Tensor& x, const Tensor& gate) {
    check(x.rank() == 4 && gate.rank() == 4, "scale_channels: rank-4 expected");
    check(gate.dim(0) == x.dim(0) && gate.dim(1) == x.dim(1) && gate.dim(2) == 1 &&
              gate.dim(3) == 1,
          "scale_channels: gate must be (N,C,1,1)");
    const long N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), HW = H * W;
    Tensor out = make_node(x.shape(), {x, gate});
    const double* px = x.data();
    const double* pg = gate.data();
    double* po = out.data();
    for (long nc = 0; nc < N * C; ++nc)
        for (long i = 0; i < HW; ++i) po[nc * HW + i] = px[nc * HW + i] * pg[nc];
    auto xi = x.impl_, gi = gate.impl_;
    out.impl_->backward_fn = [xi, gi, N, C, HW](TensorImpl& self) {
        const double* g = self.grad.data();
        if (xi->requires_grad) {
            xi->ensure_grad();
            for (long nc = 0; nc < N * C; ++nc)
                for (long i = 0; i < HW; ++i)
                    xi->grad[nc * HW + i] += g[nc * HW + i] * gi->value[nc];
        }
        if (gi->requires_grad) {
            gi->ensure_grad();
            for (long nc = 0; nc < N * C; ++nc) {
                double s = 0.0;
                for (long i = 0; i < HW; ++i)
                    s += g[nc * HW + i] * xi->value[nc * HW + i];
                gi->grad[nc] += s;
            }
        }
    };
    return out;
}

Tensor scale_spatial(const Tensor& x, const Tensor& gate) {
    check(x.rank() == 4 && gate.rank() == 4, "scale_spatial: rank-4 expected");
    check(gate.dim(0) == x.dim(0) && gate.dim(1) == 1 && gate.dim(2) == x.dim(2) &&
              gate.dim(3) == x.dim(3),
          "scale_spatial: gate must be (N,1,H,W)");
    const long N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    Tensor out = make_node(x.shape(), {x, gate});
    const double* px = x.data();
    const double* pg = gate.data();
    double* po = out.data();
    for (long n = 0; n < N; ++n)
        for (long c = 0; c < C; ++c)
            for (long i = 0; i < HW; ++i)
                po[(n * C + c) * HW + i] = px[(n * C + c) * HW + i] * pg[n * HW + i];
    auto xi = x.impl_, gi = gate.impl_;
    out.impl_->backward_fn = [xi, gi, N, C, HW](TensorImpl& self) {
        const double* g = self.grad.data();
        if (xi->requires_grad) {
            xi->ensure_grad();
            for (long n = 0; n < N; ++n)
                for (long c = 0; c < C; ++c)
                    for (long i = 0; i < HW; ++i)
                        xi->grad[(n * C + c) * HW + i] +=
                            g[(n * C + c) * HW + i] * gi->value[n * HW + i];
        }
        if (gi->requires_grad) {
            gi->ensure_grad();
            for (long n = 0; n < N; ++n)
                for (long i = 0; i < HW; ++i) {
                    double s = 0.0;
                    for (long c = 0; c < C; ++c)
                        s += g[(n * C + c) * HW + i] * xi->value[(n * C + c) * HW + i];
                    gi->grad[n * HW + i] += s;
                }
        }
    };
    return out;
}

Tensor mean_all(const Tensor& a) {
    const long n = a.numel();
    Tensor out = make_node({1}, {a});
    double s = 0.0;
    const double* pa = a.data();
    for (long i = 0; i < n; ++i) s += pa[i];
    out.data()[0] = s / static_cast<double>(n);
    auto ai = a.impl_;
    out.impl_->backward_fn = [ai, n](TensorImpl& self) {
        if (!ai->requires_grad) return;
        ai->ensure_grad();
        const double g = self.grad[0] / static_cast<double>(n);
        for (long i = 0; i < n; ++i) ai->grad[i] += g;
    };
    return out;
}

Tensor sum_all(const Tensor& a) {
    const long n = a.numel();
    Tensor out = make_node({1}, {a});
    double s = 0.0;
    const double* pa = a.data();
    for (long i = 0; i < n; ++i) s += pa[i];
    out.data()[0] = s;
    auto ai = a.impl_;
    out.impl_->backward_fn = [ai, n](TensorImpl& self) {
        if (!ai->requires_grad) return;
        ai->ensure_grad();
        const double g = self.grad[0];
        for (long i = 0; i < n; ++i) ai->grad[i] += g;
    };
    return out;
}

Tensor global_avg_pool(const Tensor& x) {
    check(x.rank() == 4, "global_avg_pool: rank-4 expected");
    const long N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    Tensor out = make_node({N, C, 1, 1}, {x});
    const double* px = x.data();
    double* po = out.data();
    for (long nc = 0; nc < N * C; ++nc) {
        double s = 0.0;
        for (long i = 0; i < HW; ++i) s += px[nc * HW + i];
        po[nc] = s / static_cast<double>(HW);
    }
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, N, C, HW](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long nc = 0; nc < N * C; ++nc) {
            const double g = self.grad[nc] / static_cast<double>(HW);
            for (long i = 0; i < HW; ++i) xi->grad[nc * HW + i] += g;
        }
    };
    return out;
}

Tensor channel_mean(const Tensor& x) {
    check(x.rank() == 4, "channel_mean: rank-4 expected");
    const long N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    Tensor out = make_node({N, 1, x.dim(2), x.dim(3)}, {x});
    const double* px = x.data();
    double* po = out.data();
    for (long n = 0; n < N; ++n)
        for (long i = 0; i < HW; ++i) {
            double s = 0.0;
            for (long c = 0; c < C; ++c) s += px[(n * C + c) * HW + i];
            po[n * HW + i] = s / static_cast<double>(C);
        }
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, N, C, HW](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long n = 0; n < N; ++n)
            for (long i = 0; i < HW; ++i) {
                const double g = self.grad[n * HW + i] / static_cast<double>(C);
                for (long c = 0; c < C; ++c) xi->grad[(n * C + c) * HW + i] += g;
            }
    };
    return out;
}

Tensor channel_max(const Tensor& x) {
    check(x.rank() == 4, "channel_max: rank-4 expected");
    const long N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    Tensor out = make_node({N, 1, x.dim(2), x.dim(3)}, {x});
    const double* px = x.data();
    double* po = out.data();
    auto argmax = std::make_shared<std::vector<long>>(N * HW);
    for (long n = 0; n < N; ++n)
        for (long i = 0; i < HW; ++i) {
            long best = 0;
            double bv = px[(n * C) * HW + i];
            for (long c = 1; c < C; ++c) {
                const double v = px[(n * C + c) * HW + i];
                if (v > bv) {
                    bv = v;
                    best = c;
                }
            }
            po[n * HW + i] = bv;
            (*argmax)[n * HW + i] = best;
        }
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, argmax, N, C, HW](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long n = 0; n < N; ++n)
            for (long i = 0; i < HW; ++i) {
                const long c = (*argmax)[n * HW + i];
                xi->grad[(n * C + c) * HW + i] += self.grad[n * HW + i];
            }
    };
    return out;
}

Tensor concat_channels(const std::vector<Tensor>& xs) {
    check(!xs.empty(), "concat_channels: empty input");
    const long N = xs[0].dim(0), H = xs[0].dim(2), W = xs[0].dim(3), HW = H * W;
    long Ctot = 0;
    for (const Tensor& x : xs) {
        check(x.rank() == 4 && x.dim(0) == N && x.dim(2) == H && x.dim(3) == W,
              "concat_channels: incompatible shapes");
        Ctot += x.dim(1);
    }
    Tensor out = make_node({N, Ctot, H, W}, xs);
    double* po = out.data();
    long coff = 0;
    for (const Tensor& x : xs) {
        const long C = x.dim(1);
        const double* px = x.data();
        for (long n = 0; n < N; ++n)
            std::copy(px + n * C * HW, px + (n + 1) * C * HW,
                      po + (n * Ctot + coff) * HW);
        coff += C;
    }
    std::vector<std::shared_ptr<TensorImpl>> impls;
    for (const Tensor& x : xs) impls.push_back(x.impl_);
    out.impl_->backward_fn = [impls, N, Ctot, HW](TensorImpl& self) {
        long coff2 = 0;
        for (auto& xi : impls) {
            const long C = static_cast<long>(xi->shape[1]);
            if (xi->requires_grad) {
                xi->ensure_grad();
                for (long n = 0; n < N; ++n)
                    for (long i = 0; i < C * HW; ++i)
                        xi->grad[n * C * HW + i] +=
                            self.grad[(n * Ctot + coff2) * HW + i];
            }
            coff2 += C;
        }
    };
    return out;
}

Tensor slice_channels(const Tensor& x, long c0, long count) {
    check(x.rank() == 4, "slice_channels: rank-4 expected");
    const long N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    check(c0 >= 0 && count >= 1 && c0 + count <= C, "slice_channels: out of range");
    Tensor out = make_node({N, count, x.dim(2), x.dim(3)}, {x});
    const double* px = x.data();
    double* po = out.data();
    for (long n = 0; n < N; ++n)
        std::copy(px + (n * C + c0) * HW, px + (n * C + c0 + count) * HW,
                  po + n * count * HW);
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, N, C, c0, count, HW](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long n = 0; n < N; ++n)
            for (long i = 0; i < count * HW; ++i)
                xi->grad[(n * C + c0) * HW + i] += self.grad[n * count * HW + i];
    };
    return out;
}

namespace {
// Periodic reflect-101 extension; valid for any pad amount.
inline long reflect_index(long i, long n) {
    if (n == 1) return 0;
    const long period = 2 * n - 2;
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}
}  // namespace

Tensor pad_reflect(const Tensor& x, long top, long bottom, long left, long right) {
    check(x.rank() == 4, "pad_reflect: rank-4 expected");
    const long N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const long OH = H + top + bottom, OW = W + left + right;
    Tensor out = make_node({N, C, OH, OW}, {x});
    const double* px = x.data();
    double* po = out.data();
    for (long nc = 0; nc < N * C; ++nc)
        for (long oh = 0; oh < OH; ++oh) {
            const long ih = reflect_index(oh - top, H);
            for (long ow = 0; ow < OW; ++ow) {
                const long iw = reflect_index(ow - left, W);
                po[(nc * OH + oh) * OW + ow] = px[(nc * H + ih) * W + iw];
            }
        }
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, N, C, H, W, OH, OW, top, left](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long nc = 0; nc < N * C; ++nc)
            for (long oh = 0; oh < OH; ++oh) {
                const long ih = reflect_index(oh - top, H);
                for (long ow = 0; ow < OW; ++ow) {
                    const long iw = reflect_index(ow - left, W);
                    xi->grad[(nc * H + ih) * W + iw] +=
                        self.grad[(nc * OH + oh) * OW + ow];
                }
            }
    };
    return out;
}

Tensor crop2d(const Tensor& x, long top, long left, long h, long w) {
    check(x.rank() == 4, "crop2d: rank-4 expected");
    const long N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    check(top >= 0 && left >= 0 && top + h <= H && left + w <= W, "crop2d: out of range");
    Tensor out = make_node({N, C, h, w}, {x});
    const double* px = x.data();
    double* po = out.data();
    for (long nc = 0; nc < N * C; ++nc)
        for (long oh = 0; oh < h; ++oh)
            std::copy(px + (nc * H + top + oh) * W + left,
                      px + (nc * H + top + oh) * W + left + w,
                      po + (nc * h + oh) * w);
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, N, C, H, W, top, left, h, w](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long nc = 0; nc < N * C; ++nc)
            for (long oh = 0; oh < h; ++oh)
                for (long ow = 0; ow < w; ++ow)
                    xi->grad[(nc * H + top + oh) * W + left + ow] +=
                        self.grad[(nc * h + oh) * w + ow];
    };
    return out;
}

Tensor layer_norm_channels(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                           double eps) {
    check(x.rank() == 4, "layer_norm_channels: rank-4 expected");
    const long N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), HW = H * W;
    check(gamma.numel() == C && beta.numel() == C, "layer_norm_channels: bad affine shape");
    Tensor out = make_node(x.shape(), {x, gamma, beta});
    const double* px = x.data();
    const double* pg = gamma.data();
    const double* pb = beta.data();
    double* po = out.data();
    for (long n = 0; n < N; ++n)
        for (long i = 0; i < HW; ++i) {
            double mu = 0.0;
            for (long c = 0; c < C; ++c) mu += px[(n * C + c) * HW + i];
            mu /= static_cast<double>(C);
            double var = 0.0;
            for (long c = 0; c < C; ++c) {
                const double d = px[(n * C + c) * HW + i] - mu;
                var += d * d;
            }
            var /= static_cast<double>(C);
            const double inv = 1.0 / std::sqrt(var + eps);
            for (long c = 0; c < C; ++c)
                po[(n * C + c) * HW + i] =
                    pg[c] * (px[(n * C + c) * HW + i] - mu) * inv + pb[c];
        }
    auto xi = x.impl_, gi = gamma.impl_, bi = beta.impl_;
    out.impl_->backward_fn = [xi, gi, bi, N, C, HW, eps](TensorImpl& self) {
        const double* g = self.grad.data();
        std::vector<double> xhat(C), gy(C);
        for (long n = 0; n < N; ++n)
            for (long i = 0; i < HW; ++i) {
                double mu = 0.0;
                for (long c = 0; c < C; ++c) mu += xi->value[(n * C + c) * HW + i];
                mu /= static_cast<double>(C);
                double var = 0.0;
                for (long c = 0; c < C; ++c) {
                    const double d = xi->value[(n * C + c) * HW + i] - mu;
                    var += d * d;
                }
                var /= static_cast<double>(C);
                const double inv = 1.0 / std::sqrt(var + eps);
                for (long c = 0; c < C; ++c) {
                    xhat[c] = (xi->value[(n * C + c) * HW + i] - mu) * inv;
                    gy[c] = g[(n * C + c) * HW + i];
                }
                if (gi->requires_grad) {
                    gi->ensure_grad();
                    for (long c = 0; c < C; ++c) gi->grad[c] += gy[c] * xhat[c];
                }
                if (bi->requires_grad) {
                    bi->ensure_grad();
                    for (long c = 0; c < C; ++c) bi->grad[c] += gy[c];
                }
                if (xi->requires_grad) {
                    xi->ensure_grad();
                    double m1 = 0.0, m2 = 0.0;
                    for (long c = 0; c < C; ++c) {
                        const double t = gi->value[c] * gy[c];
                        m1 += t;
                        m2 += t * xhat[c];
                    }
                    m1 /= static_cast<double>(C);
                    m2 /= static_cast<double>(C);
                    for (long c = 0; c < C; ++c)
                        xi->grad[(n * C + c) * HW + i] +=
                            (gi->value[c] * gy[c] - m1 - xhat[c] * m2) * inv;
                }
            }
    };
    return out;
}

// --- Haar wavelet (orthonormal, /2 convention) ---



Tensor dwt2(const Tensor& x) {
    check(x.rank() == 4, "dwt2: rank-4 expected");
    const long N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    check(H % 2 == 0 && W % 2 == 0, "dwt2: H and W must be even");
    Tensor out = make_node({N, 4 * C, H / 2, W / 2}, {x});
    const long in_stride = C * H * W, out_stride = 4 * C * (H / 2) * (W / 2);
    for (long n = 0; n < N; ++n)
        haar::forward(x.data() + n * in_stride, out.data() + n * out_stride, C, H, W);
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, N, C, H, W, in_stride, out_stride](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        // The transform is orthonormal, so the adjoint is the inverse.
        std::vector<double> tmp(in_stride);
        for (long n = 0; n < N; ++n) {
            haar::inverse(self.grad.data() + n * out_stride, tmp.data(), C, H / 2, W / 2);
            for (long i = 0; i < in_stride; ++i) xi->grad[n * in_stride + i] += tmp[i];
        }
    };
    return out;
}

Tensor idwt2(const Tensor& x) {
    check(x.rank() == 4, "idwt2: rank-4 expected");
    const long N = x.dim(0), C4 = x.dim(1), h2 = x.dim(2), w2 = x.dim(3);
    check(C4 % 4 == 0, "idwt2: channels must be a multiple of 4");
    const long C = C4 / 4;
    Tensor out = make_node({N, C, 2 * h2, 2 * w2}, {x});
    const long in_stride = C4 * h2 * w2, out_stride = C * 4 * h2 * w2;
    for (long n = 0; n < N; ++n)
        haar::inverse(x.data() + n * in_stride, out.data() + n * out_stride, C, h2, w2);
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, N, C, h2, w2, in_stride, out_stride](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        std::vector<double> tmp(in_stride);
        for (long n = 0; n < N; ++n) {
            haar::forward(self.grad.data() + n * out_stride, tmp.data(), C, 2 * h2, 2 * w2);
            for (long i = 0; i < in_stride; ++i) xi->grad[n * in_stride + i] += tmp[i];
        }
    };
    return out;
}

}  // namespace lcdb::ops
