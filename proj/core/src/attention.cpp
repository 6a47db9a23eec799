#include "lcdb/ops.hpp"

#include <algorithm>
#include <cmath>

namespace lcdb::ops {

namespace {

// Source pixel for token t of window b under a cyclic shift (roll by -shift).
inline void window_source(long b, long t, long N, long H, long W, long win, long shift,
                          long& n, long& h, long& w) {
    const long nW = W / win, n_win = (H / win) * nW;
    n = b / n_win;
    const long wi = b % n_win;
    const long h_sh = (wi / nW) * win + t / win;
    const long w_sh = (wi % nW) * win + t % win;
    h = (h_sh + shift) % H;
    w = (w_sh + shift) % W;
}

}  // namespace

Tensor window_partition(const Tensor& x, long win, long shift) {
    check(x.rank() == 4, "window_partition: rank-4 expected");
    const long N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    check(H % win == 0 && W % win == 0, "window_partition: H,W must be multiples of win");
    const long n_win = (H / win) * (W / win), T = win * win;
    Tensor out = make_node({N * n_win, T, C}, {x});
    const double* px = x.data();
    double* po = out.data();
    for (long b = 0; b < N * n_win; ++b)
        for (long t = 0; t < T; ++t) {
            long n, h, w;
            window_source(b, t, N, H, W, win, shift, n, h, w);
            for (long c = 0; c < C; ++c)
                po[(b * T + t) * C + c] = px[((n * C + c) * H + h) * W + w];
        }
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, N, C, H, W, win, shift, n_win, T](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long b = 0; b < N * n_win; ++b)
            for (long t = 0; t < T; ++t) {
                long n, h, w;
                window_source(b, t, N, H, W, win, shift, n, h, w);
                for (long c = 0; c < C; ++c)
                    xi->grad[((n * C + c) * H + h) * W + w] +=
                        self.grad[(b * T + t) * C + c];
            }
    };
    return out;
}

Tensor window_merge(const Tensor& t, long N, long C, long H, long W, long win, long shift) {
    check(t.rank() == 3, "window_merge: rank-3 expected");
    const long n_win = (H / win) * (W / win), T = win * win;
    check(t.dim(0) == N * n_win && t.dim(1) == T && t.dim(2) == C,
          "window_merge: shape mismatch");
    Tensor out = make_node({N, C, H, W}, {t});
    const double* pt = t.data();
    double* po = out.data();
    for (long b = 0; b < N * n_win; ++b)
        for (long tk = 0; tk < T; ++tk) {
            long n, h, w;
            window_source(b, tk, N, H, W, win, shift, n, h, w);
            for (long c = 0; c < C; ++c)
                po[((n * C + c) * H + h) * W + w] = pt[(b * T + tk) * C + c];
        }
    auto ti = t.impl_;
    out.impl_->backward_fn = [ti, N, C, H, W, win, shift, n_win, T](TensorImpl& self) {
        if (!ti->requires_grad) return;
        ti->ensure_grad();
        for (long b = 0; b < N * n_win; ++b)
            for (long tk = 0; tk < T; ++tk) {
                long n, h, w;
                window_source(b, tk, N, H, W, win, shift, n, h, w);
                for (long c = 0; c < C; ++c)
                    ti->grad[(b * T + tk) * C + c] +=
                        self.grad[((n * C + c) * H + h) * W + w];
            }
    };
    return out;
}

Tensor linear_tokens(const Tensor& x, const Tensor& w, const Tensor& b) {
    check(x.rank() == 3 && w.rank() == 2, "linear_tokens: bad ranks");
    const long B = x.dim(0), T = x.dim(1), CI = x.dim(2);
    const long CO = w.dim(0);
    check(w.dim(1) == CI, "linear_tokens: in-feature mismatch");
    const bool has_bias = b.defined();
    if (has_bias) check(b.numel() == CO, "linear_tokens: bias size");
    std::vector<Tensor> parents = {x, w};
    if (has_bias) parents.push_back(b);
    Tensor out = make_node({B, T, CO}, parents);
    const double* px = x.data();
    const double* pw = w.data();
    const double* pb = has_bias ? b.data() : nullptr;
    double* po = out.data();
#pragma omp parallel for schedule(static)
    for (long bt = 0; bt < B * T; ++bt)
        for (long co = 0; co < CO; ++co) {
            double s = pb ? pb[co] : 0.0;
            for (long ci = 0; ci < CI; ++ci) s += px[bt * CI + ci] * pw[co * CI + ci];
            po[bt * CO + co] = s;
        }
    auto xi = x.impl_, wi = w.impl_;
    auto bi = has_bias ? b.impl_ : nullptr;
    out.impl_->backward_fn = [=](TensorImpl& self) {
        const double* g = self.grad.data();
        if (bi && bi->requires_grad) {
            bi->ensure_grad();
            for (long co = 0; co < CO; ++co) {
                double s = 0.0;
                for (long bt = 0; bt < B * T; ++bt) s += g[bt * CO + co];
                bi->grad[co] += s;
            }
        }
        if (wi->requires_grad) {
            wi->ensure_grad();
#pragma omp parallel for schedule(static)
            for (long co = 0; co < CO; ++co)
                for (long ci = 0; ci < CI; ++ci) {
                    double s = 0.0;
                    for (long bt = 0; bt < B * T; ++bt)
                        s += g[bt * CO + co] * xi->value[bt * CI + ci];
                    wi->grad[co * CI + ci] += s;
                }
        }
        if (xi->requires_grad) {
            xi->ensure_grad();
#pragma omp parallel for schedule(static)
            for (long bt = 0; bt < B * T; ++bt)
                for (long ci = 0; ci < CI; ++ci) {
                    double s = 0.0;
                    for (long co = 0; co < CO; ++co)
                        s += g[bt * CO + co] * wi->value[co * CI + ci];
                    xi->grad[bt * CI + ci] += s;
                }
        }
    };
    return out;
}

Tensor slice_lastdim(const Tensor& x, long start, long count) {
    check(x.rank() == 3, "slice_lastdim: rank-3 expected");
    const long B = x.dim(0), T = x.dim(1), C = x.dim(2);
    check(start >= 0 && count >= 1 && start + count <= C, "slice_lastdim: out of range");
    Tensor out = make_node({B, T, count}, {x});
    const double* px = x.data();
    double* po = out.data();
    for (long bt = 0; bt < B * T; ++bt)
        std::copy(px + bt * C + start, px + bt * C + start + count, po + bt * count);
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, B, T, C, start, count](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long bt = 0; bt < B * T; ++bt)
            for (long i = 0; i < count; ++i)
                xi->grad[bt * C + start + i] += self.grad[bt * count + i];
    };
    return out;
}

Tensor split_heads(const Tensor& x, long heads) {
    check(x.rank() == 3, "split_heads: rank-3 expected");
    const long B = x.dim(0), T = x.dim(1), C = x.dim(2);
    check(C % heads == 0, "split_heads: channels not divisible by heads");
    const long D = C / heads;
    Tensor out = make_node({B * heads, T, D}, {x});
    const double* px = x.data();
    double* po = out.data();
    for (long b = 0; b < B; ++b)
        for (long h = 0; h < heads; ++h)
            for (long t = 0; t < T; ++t)
                for (long d = 0; d < D; ++d)
                    po[(((b * heads + h) * T) + t) * D + d] =
                        px[(b * T + t) * C + h * D + d];
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, B, T, C, heads, D](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long b = 0; b < B; ++b)
            for (long h = 0; h < heads; ++h)
                for (long t = 0; t < T; ++t)
                    for (long d = 0; d < D; ++d)
                        xi->grad[(b * T + t) * C + h * D + d] +=
                            self.grad[(((b * heads + h) * T) + t) * D + d];
    };
    return out;
}

Tensor merge_heads(const Tensor& x, long heads) {
    check(x.rank() == 3, "merge_heads: rank-3 expected");
    const long BH = x.dim(0), T = x.dim(1), D = x.dim(2);
    check(BH % heads == 0, "merge_heads: batch not divisible by heads");
    const long B = BH / heads, C = heads * D;
    Tensor out = make_node({B, T, C}, {x});
    const double* px = x.data();
    double* po = out.data();
    for (long b = 0; b < B; ++b)
        for (long h = 0; h < heads; ++h)
            for (long t = 0; t < T; ++t)
                for (long d = 0; d < D; ++d)
                    po[(b * T + t) * C + h * D + d] =
                        px[(((b * heads + h) * T) + t) * D + d];
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, B, T, C, heads, D](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long b = 0; b < B; ++b)
            for (long h = 0; h < heads; ++h)
                for (long t = 0; t < T; ++t)
                    for (long d = 0; d < D; ++d)
                        xi->grad[(((b * heads + h) * T) + t) * D + d] +=
                            self.grad[(b * T + t) * C + h * D + d];
    };
    return out;
}

Tensor matmul_nn(const Tensor& a, const Tensor& b) {
    check(a.rank() == 3 && b.rank() == 3, "matmul_nn: rank-3 expected");
    const long B = a.dim(0), M = a.dim(1), K = a.dim(2), N = b.dim(2);
    check(b.dim(0) == B && b.dim(1) == K, "matmul_nn: shape mismatch");
    Tensor out = make_node({B, M, N}, {a, b});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
#pragma omp parallel for schedule(static)
    for (long bb = 0; bb < B; ++bb)
        for (long m = 0; m < M; ++m)
            for (long n = 0; n < N; ++n) {
                double s = 0.0;
                for (long k = 0; k < K; ++k)
                    s += pa[(bb * M + m) * K + k] * pb[(bb * K + k) * N + n];
                po[(bb * M + m) * N + n] = s;
            }
    auto ai = a.impl_, bi = b.impl_;
    out.impl_->backward_fn = [ai, bi, B, M, K, N](TensorImpl& self) {
        const double* g = self.grad.data();
        if (ai->requires_grad) {
            ai->ensure_grad();
#pragma omp parallel for schedule(static)
            for (long bb = 0; bb < B; ++bb)
                for (long m = 0; m < M; ++m)
                    for (long k = 0; k < K; ++k) {
                        double s = 0.0;
                        for (long n = 0; n < N; ++n)
                            s += g[(bb * M + m) * N + n] * bi->value[(bb * K + k) * N + n];
                        ai->grad[(bb * M + m) * K + k] += s;
                    }
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
#pragma omp parallel for schedule(static)
            for (long bb = 0; bb < B; ++bb)
                for (long k = 0; k < K; ++k)
                    for (long n = 0; n < N; ++n) {
                        double s = 0.0;
                        for (long m = 0; m < M; ++m)
                            s += g[(bb * M + m) * N + n] * ai->value[(bb * M + m) * K + k];
                        bi->grad[(bb * K + k) * N + n] += s;
                    }
        }
    };
    return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    check(a.rank() == 3 && b.rank() == 3, "matmul_nt: rank-3 expected");
    const long B = a.dim(0), M = a.dim(1), K = a.dim(2), N = b.dim(1);
    check(b.dim(0) == B && b.dim(2) == K, "matmul_nt: shape mismatch");
    Tensor out = make_node({B, M, N}, {a, b});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
#pragma omp parallel for schedule(static)
    for (long bb = 0; bb < B; ++bb)
        for (long m = 0; m < M; ++m)
            for (long n = 0; n < N; ++n) {
                double s = 0.0;
                for (long k = 0; k < K; ++k)
                    s += pa[(bb * M + m) * K + k] * pb[(bb * N + n) * K + k];
                po[(bb * M + m) * N + n] = s;
            }
    auto ai = a.impl_, bi = b.impl_;
    out.impl_->backward_fn = [ai, bi, B, M, K, N](TensorImpl& self) {
        const double* g = self.grad.data();
        if (ai->requires_grad) {
            ai->ensure_grad();
#pragma omp parallel for schedule(static)
            for (long bb = 0; bb < B; ++bb)
                for (long m = 0; m < M; ++m)
                    for (long k = 0; k < K; ++k) {
                        double s = 0.0;
                        for (long n = 0; n < N; ++n)
                            s += g[(bb * M + m) * N + n] * bi->value[(bb * N + n) * K + k];
                        ai->grad[(bb * M + m) * K + k] += s;
                    }
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
#pragma omp parallel for schedule(static)
            for (long bb = 0; bb < B; ++bb)
                for (long n = 0; n < N; ++n)
                    for (long k = 0; k < K; ++k) {
                        double s = 0.0;
                        for (long m = 0; m < M; ++m)
                            s += g[(bb * M + m) * N + n] * ai->value[(bb * M + m) * K + k];
                        bi->grad[(bb * N + n) * K + k] += s;
                    }
        }
    };
    return out;
}

Tensor add_window_mask(const Tensor& logits, const std::vector<double>& mask,
                       long n_win, long heads) {
    check(logits.rank() == 3, "add_window_mask: rank-3 expected");
    const long G = logits.dim(0), T = logits.dim(1);
    check(logits.dim(2) == T, "add_window_mask: square logits expected");
    check(static_cast<long>(mask.size()) == n_win * T * T, "add_window_mask: mask size");
    Tensor out = make_node(logits.shape(), {logits});
    const double* pl = logits.data();
    double* po = out.data();
    for (long g = 0; g < G; ++g) {
        const long w = (g / heads) % n_win;
        for (long i = 0; i < T * T; ++i)
            po[g * T * T + i] = pl[g * T * T + i] + mask[w * T * T + i];
    }
    auto li = logits.impl_;
    out.impl_->backward_fn = [li](TensorImpl& self) {
        if (!li->requires_grad) return;
        li->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) li->grad[i] += self.grad[i];
    };
    return out;
}

Tensor softmax_lastdim(const Tensor& x) {
    const int r = x.rank();
    check(r >= 1, "softmax_lastdim: empty shape");
    const long L = x.dim(r - 1), rows = x.numel() / L;
    Tensor out = make_node(x.shape(), {x});
    const double* px = x.data();
    double* po = out.data();
    for (long row = 0; row < rows; ++row) {
        const double* xr = px + row * L;
        double* yr = po + row * L;
        double mx = xr[0];
        for (long i = 1; i < L; ++i) mx = std::max(mx, xr[i]);
        double z = 0.0;
        for (long i = 0; i < L; ++i) {
            yr[i] = std::exp(xr[i] - mx);
            z += yr[i];
        }
        for (long i = 0; i < L; ++i) yr[i] /= z;
    }
    auto xi = x.impl_;
    out.impl_->backward_fn = [xi, rows, L](TensorImpl& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (long row = 0; row < rows; ++row) {
            const double* y = self.value.data() + row * L;
            const double* g = self.grad.data() + row * L;
            double dot = 0.0;
            for (long i = 0; i < L; ++i) dot += g[i] * y[i];
            for (long i = 0; i < L; ++i) xi->grad[row * L + i] += y[i] * (g[i] - dot);
        }
    };
    return out;
}

}  // namespace lcdb::ops
