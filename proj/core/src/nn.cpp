#include "lcdb/nn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace lcdb {

using namespace ops;

uint64_t hash_name(const std::string& s, uint64_t seed) {
    uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

Tensor ParamRegistry::create(const std::string& name, std::vector<long> shape, Init init,
                             long fan_in) {
    if (params_.count(name))
        throw std::invalid_argument("ParamRegistry: duplicate parameter " + name);
    Tensor t = Tensor::zeros(shape, /*requires_grad=*/true);
    std::mt19937_64 rng(hash_name(name, seed_));
    double* p = t.data();
    const long n = t.numel();
    switch (init) {
        case Init::kZero:
            break;
        case Init::kOne:
            for (long i = 0; i < n; ++i) p[i] = 1.0;
            break;
        case Init::kTruncNormal002: {
            std::normal_distribution<double> dist(0.0, 0.02);
            for (long i = 0; i < n; ++i) {
                double v;
                do {
                    v = dist(rng);
                } while (std::abs(v) > 0.04);  // 2 sigma
                p[i] = v;
            }
            break;
        }
        case Init::kFanInUniform: {
            if (fan_in <= 0) throw std::invalid_argument("create: fan_in required");
            const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (long i = 0; i < n; ++i) p[i] = dist(rng);
            break;
        }
    }
    params_.emplace(name, t);
    return t;
}

long ParamRegistry::count_parameters() const {
    long total = 0;
    for (const auto& [name, t] : params_) total += t.numel();
    return total;
}

void ParamRegistry::zero_grads() {
    for (auto& [name, t] : params_) t.zero_grad();
}

// --- ChannelAttention ---

ChannelAttention::ChannelAttention(ParamRegistry& reg, const std::string& prefix, long C,
                                   long reduction) {
    channels = C;
    hidden = std::max<long>(4, C / reduction);
    if (C % hidden != 0)
        throw std::invalid_argument("channel_attention: channels not divisible by reduction (" +
                                    prefix + ")");
    w1 = reg.create(prefix + ".squeeze.weight", {hidden, C, 1, 1}, Init::kFanInUniform, C);
    b1 = reg.create(prefix + ".squeeze.bias", {hidden}, Init::kZero);
    w2 = reg.create(prefix + ".excite.weight", {C, hidden, 1, 1}, Init::kFanInUniform, hidden);
    b2 = reg.create(prefix + ".excite.bias", {C}, Init::kZero);
}

Tensor ChannelAttention::forward(const Tensor& x) const {
    Tensor g = global_avg_pool(x);
    g = relu(conv2d(g, w1, b1));
    g = sigmoid(conv2d(g, w2, b2));
    return scale_channels(x, g);
}

// --- SpatialAttention ---

SpatialAttention::SpatialAttention(ParamRegistry& reg, const std::string& prefix) {
    w = reg.create(prefix + ".gate.weight", {1, 2, 7, 7}, Init::kFanInUniform, 2 * 49);
    b = reg.create(prefix + ".gate.bias", {1}, Init::kZero);
}

Tensor SpatialAttention::forward(const Tensor& x) const {
    Tensor pooled = concat_channels({channel_mean(x), channel_max(x)});
    // Reflect padding keeps the gate spatially uniform on constant inputs.
    Tensor g = sigmoid(conv2d(pad_reflect(pooled, 3, 3, 3, 3), w, b, 1, 0));
    return scale_spatial(x, g);
}

// --- DACB ---

Dacb::Dacb(ParamRegistry& reg, const std::string& prefix, long C, long reduction)
    : sab(reg, prefix + ".sab"), cab(reg, prefix + ".cab", C, reduction) {
    wf = reg.create(prefix + ".fuse.weight", {C, C, 3, 3}, Init::kFanInUniform, C * 9);
    bf = reg.create(prefix + ".fuse.bias", {C}, Init::kZero);
}

Tensor Dacb::forward(const Tensor& x) const {
    return conv2d(add(sab.forward(x), cab.forward(x)), wf, bf, 1, 1);
}

// --- WindowTransformerBlock ---

WindowTransformerBlock::WindowTransformerBlock(ParamRegistry& reg, const std::string& prefix,
                                               long C, long window_, long heads_, long shift_) {
    channels = C;
    window = window_;
    heads = heads_;
    shift = shift_;
    if (C % heads != 0)
        throw std::invalid_argument("window_transformer_block: channels not divisible by heads (" +
                                    prefix + ")");
    ln1_g = reg.create(prefix + ".ln1.scale", {C}, Init::kOne);
    ln1_b = reg.create(prefix + ".ln1.offset", {C}, Init::kZero);
    ln2_g = reg.create(prefix + ".ln2.scale", {C}, Init::kOne);
    ln2_b = reg.create(prefix + ".ln2.offset", {C}, Init::kZero);
    wqkv = reg.create(prefix + ".qkv.weight", {3 * C, C}, Init::kTruncNormal002);
    bqkv = reg.create(prefix + ".qkv.bias", {3 * C}, Init::kZero);
    wproj = reg.create(prefix + ".proj.weight", {C, C}, Init::kTruncNormal002);
    bproj = reg.create(prefix + ".proj.bias", {C}, Init::kZero);
    wm1 = reg.create(prefix + ".mlp1.weight", {4 * C, C, 1, 1}, Init::kTruncNormal002);
    bm1 = reg.create(prefix + ".mlp1.bias", {4 * C}, Init::kZero);
    wm2 = reg.create(prefix + ".mlp2.weight", {C, 4 * C, 1, 1}, Init::kTruncNormal002);
    bm2 = reg.create(prefix + ".mlp2.bias", {C}, Init::kZero);
}

std::vector<double> WindowTransformerBlock::shift_mask(long H, long W, long window,
                                                       long shift) {
    const long nH = H / window, nW = W / window, n_win = nH * nW, T = window * window;
    std::vector<double> mask(n_win * T * T, 0.0);
    if (shift == 0) return mask;
    // Tokens may attend only when their source pixels came from the same
    // contiguous image region, i.e. the cyclic shift wrapped neither token or
    // both. Wrapping happens exactly when the shifted coordinate + shift
    // crosses the image boundary.
    auto wrapped = [&](long i_shifted, long n) { return i_shifted + shift >= n; };
    auto pos = [&](long wi, long t, long& h_sh, long& w_sh) {
        h_sh = (wi / nW) * window + t / window;
        w_sh = (wi % nW) * window + t % window;
    };
    for (long wi = 0; wi < n_win; ++wi)
        for (long ti = 0; ti < T; ++ti)
            for (long tj = 0; tj < T; ++tj) {
                long hi, wi2, hj, wj;
                pos(wi, ti, hi, wi2);
                pos(wi, tj, hj, wj);
                const bool same = wrapped(hi, H) == wrapped(hj, H) &&
                                  wrapped(wi2, W) == wrapped(wj, W);
                if (!same) mask[(wi * T + ti) * T + tj] = -1e9;
            }
    return mask;
}

Tensor WindowTransformerBlock::attention(const Tensor& x, Tensor* attn_out) const {
    const long N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const long T = window * window, n_win = (H / window) * (W / window);
    const long dh = C / heads;
    Tensor t = window_partition(x, window, shift);
    Tensor qkv = linear_tokens(t, wqkv, bqkv);
    Tensor q = split_heads(slice_lastdim(qkv, 0, C), heads);
    Tensor k = split_heads(slice_lastdim(qkv, C, C), heads);
    Tensor v = split_heads(slice_lastdim(qkv, 2 * C, C), heads);
    Tensor logits = mul_scalar(matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(dh)));
    if (shift > 0)
        logits = add_window_mask(logits, shift_mask(H, W, window, shift), n_win, heads);
    Tensor attn = softmax_lastdim(logits);
    if (attn_out) *attn_out = attn;
    Tensor o = merge_heads(matmul_nn(attn, v), heads);
    o = linear_tokens(o, wproj, bproj);
    return window_merge(o, N, C, H, W, window, shift);
}

Tensor WindowTransformerBlock::forward(const Tensor& x) const {
    const long H = x.dim(2), W = x.dim(3);
    const long ph = (window - H % window) % window;
    const long pw = (window - W % window) % window;
    Tensor xp = (ph || pw) ? pad_reflect(x, 0, ph, 0, pw) : x;
    Tensor a = attention(layer_norm_channels(xp, ln1_g, ln1_b));
    Tensor y = add(xp, a);
    Tensor m = layer_norm_channels(y, ln2_g, ln2_b);
    m = conv2d(gelu(conv2d(m, wm1, bm1)), wm2, bm2);
    y = add(y, m);
    return (ph || pw) ? crop2d(y, 0, 0, H, W) : y;
}

// --- GLAB ---

Glab::Glab(ParamRegistry& reg, const std::string& prefix, long C, long window, long heads,
           long reduction, int swin_blocks, bool use_swin_, bool use_dacb_) {
    channels = C;
    use_swin = use_swin_;
    use_dacb = use_dacb_;
    if (!use_swin && !use_dacb)
        throw std::invalid_argument("glab: at least one branch must be enabled");
    if (use_swin)
        for (int i = 0; i < swin_blocks; ++i)
            swin.emplace_back(reg, prefix + ".swin" + std::to_string(i), C, window, heads,
                              i % 2 == 0 ? 0 : window / 2);
    if (use_dacb) dacb = Dacb(reg, prefix + ".dacb", C, reduction);
    const long fused = (use_swin ? C : 0) + (use_dacb ? C : 0);
    fuse_ca = ChannelAttention(reg, prefix + ".fuse_ca", fused, reduction);
    wp = reg.create(prefix + ".proj.weight", {C, fused, 1, 1}, Init::kFanInUniform, fused);
    bp = reg.create(prefix + ".proj.bias", {C}, Init::kZero);
}

Tensor Glab::forward(const Tensor& x) const {
    std::vector<Tensor> branches;
    if (use_swin) {
        Tensor t = x;
        for (const auto& blk : swin) t = blk.forward(t);
        branches.push_back(t);
    }
    if (use_dacb) branches.push_back(dacb.forward(x));
    Tensor fused = branches.size() == 1 ? branches[0] : concat_channels(branches);
    return conv2d(fuse_ca.forward(fused), wp, bp);
}

// --- RCAB ---

Rcab::Rcab(ParamRegistry& reg, const std::string& prefix, long C, long reduction)
    : ca(reg, prefix + ".ca", C, reduction) {
    w1 = reg.create(prefix + ".conv1.weight", {C, C, 3, 3}, Init::kFanInUniform, C * 9);
    b1 = reg.create(prefix + ".conv1.bias", {C}, Init::kZero);
    w2 = reg.create(prefix + ".conv2.weight", {C, C, 3, 3}, Init::kZero);
    b2 = reg.create(prefix + ".conv2.bias", {C}, Init::kZero);
}

Tensor Rcab::forward(const Tensor& x) const {
    Tensor y = conv2d(relu(conv2d(x, w1, b1, 1, 1)), w2, b2, 1, 1);
    return add(x, ca.forward(y));
}

// --- SupervisionModule ---

SupervisionModule::SupervisionModule(ParamRegistry& reg, const std::string& prefix, long C,
                                     long img_ch) {
    channels = C;
    img_channels = img_ch;
    w_pred = reg.create(prefix + ".pred.weight", {img_ch, C, 3, 3}, Init::kZero);
    b_pred = reg.create(prefix + ".pred.bias", {img_ch}, Init::kZero);
    w_gate = reg.create(prefix + ".gate.weight", {C, img_ch, 3, 3}, Init::kFanInUniform,
                        img_ch * 9);
    b_gate = reg.create(prefix + ".gate.bias", {C}, Init::kZero);
    w_orig = reg.create(prefix + ".orig.weight", {C, img_ch, 3, 3}, Init::kFanInUniform,
                        img_ch * 9);
    b_orig = reg.create(prefix + ".orig.bias", {C}, Init::kZero);
}

SupervisionModule::Out SupervisionModule::forward(const Tensor& f, const Tensor& x_in) const {
    check(f.dim(2) == x_in.dim(2) && f.dim(3) == x_in.dim(3),
          "supervision_module: spatial misalignment");
    Tensor intermediate = add(conv2d(f, w_pred, b_pred, 1, 1), x_in);
    Tensor gate = sigmoid(conv2d(intermediate, w_gate, b_gate, 1, 1));
    Tensor refined = add(mul(f, gate), conv2d(x_in, w_orig, b_orig, 1, 1));
    return {intermediate, refined};
}

}  // namespace lcdb
