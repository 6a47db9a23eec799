#pragma once

#include "lcdb/tensor.hpp"

namespace lcdb::ops {

// --- elementwise ---
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor gelu(const Tensor& a);
Tensor sqrt_elem(const Tensor& a);  // requires strictly positive input

// --- broadcast gating ---
// x: (N,C,H,W) scaled by per-channel gate (N,C,1,1).
Tensor scale_channels(const Tensor& x, const Tensor& gate);
// x: (N,C,H,W) scaled by per-pixel gate (N,1,H,W).
Tensor scale_spatial(const Tensor& x, const Tensor& gate);

// --- reductions ---
Tensor mean_all(const Tensor& a);  // -> shape {1}
Tensor sum_all(const Tensor& a);   // -> shape {1}
Tensor global_avg_pool(const Tensor& x);  // (N,C,H,W) -> (N,C,1,1)
Tensor channel_mean(const Tensor& x);     // (N,C,H,W) -> (N,1,H,W)
Tensor channel_max(const Tensor& x);      // (N,C,H,W) -> (N,1,H,W)

// --- shape ---
Tensor concat_channels(const std::vector<Tensor>& xs);        // along dim 1
Tensor slice_channels(const Tensor& x, long c0, long count);  // along dim 1
Tensor pad_reflect(const Tensor& x, long top, long bottom, long left, long right);
Tensor crop2d(const Tensor& x, long top, long left, long h, long w);

// --- convolution ---
// x (N,IC,H,W), w (OC,IC,KH,KW), optional b (OC); zero padding.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b,
              long stride = 1, long pad = 0);
// Transposed conv doubling spatial size: stride 2, 3x3 kernel, pad 1,
// output padding 1 (output is exactly 2H x 2W). w (IC,OC,3,3), b (OC).
Tensor conv_transpose2d_x2(const Tensor& x, const Tensor& w, const Tensor& b);
// Depthwise valid-mode correlation with a fixed (non-learnable) k x k kernel.
Tensor depthwise_fixed_valid(const Tensor& x, const std::vector<double>& kernel, long k);

// --- normalization ---
// Normalizes across C for each (n,h,w); gamma/beta shape (C).
Tensor layer_norm_channels(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                           double eps = 1e-5);

// --- token/attention machinery ---
// (N,C,H,W) -> (N*nWin, win*win, C) with optional cyclic shift; H,W must be
// multiples of win.
Tensor window_partition(const Tensor& x, long win, long shift);
Tensor window_merge(const Tensor& t, long N, long C, long H, long W, long win, long shift);
// x (B,T,Cin) * W (Cout,Cin) + b (Cout) -> (B,T,Cout)
Tensor linear_tokens(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor slice_lastdim(const Tensor& x, long start, long count);
// (B,T,C) -> (B*heads, T, C/heads)
Tensor split_heads(const Tensor& x, long heads);
// (B*heads, T, C/heads) -> (B,T,C)
Tensor merge_heads(const Tensor& x, long heads);
Tensor matmul_nn(const Tensor& a, const Tensor& b);  // (B,M,K)x(B,K,N)
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // (B,M,K)x(B,N,K)^T
// logits (G,T,T); additive mask (nWin*T*T) applied per window, where
// window index = (g / heads) % nWin. Gradient passes through unchanged.
Tensor add_window_mask(const Tensor& logits, const std::vector<double>& mask,
                       long n_win, long heads);
Tensor softmax_lastdim(const Tensor& x);

// --- orthonormal Haar wavelet step on feature maps ---
// (N,C,H,W) -> (N,4C,H/2,W/2), channel groups ordered [LL,LH,HL,HH].
Tensor dwt2(const Tensor& x);
// (N,4C,H,W) -> (N,C,2H,2W); exact inverse of dwt2.
Tensor idwt2(const Tensor& x);

}  // namespace lcdb::ops
