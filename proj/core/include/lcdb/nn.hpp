#pragma once

#include "lcdb/ops.hpp"
#include "lcdb/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lcdb {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t hash_name(const std::string& s, uint64_t seed);

enum class Init {
    kZero,
    kOne,
    kTruncNormal002,  // attention projections
    kFanInUniform,    // convolutions
};

// Named learnable tensors, ordered by name. Initialization is a pure
// function of (seed, name, shape), so construction order never matters.
class ParamRegistry {
public:
    explicit ParamRegistry(uint64_t seed) : seed_(seed) {}

    Tensor create(const std::string& name, std::vector<long> shape, Init init,
                  long fan_in = 0);
    const std::map<std::string, Tensor>& params() const { return params_; }
    std::map<std::string, Tensor>& params() { return params_; }
    long count_parameters() const;
    void zero_grads();
    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
    std::map<std::string, Tensor> params_;
};

// Squeeze-and-excitation channel gate. Hidden width max(4, C/reduction).
struct ChannelAttention {
    long channels = 0, hidden = 0;
    Tensor w1, b1, w2, b2;

    ChannelAttention() = default;
    ChannelAttention(ParamRegistry& reg, const std::string& prefix, long C, long reduction);
    Tensor forward(const Tensor& x) const;
};

// mean/max channel pooling -> 7x7 conv -> sigmoid -> per-pixel gate.
struct SpatialAttention {
    Tensor w, b;

    SpatialAttention() = default;
    SpatialAttention(ParamRegistry& reg, const std::string& prefix);
    Tensor forward(const Tensor& x) const;
};

// Parallel spatial/channel attention summed, fused by a 3x3 conv.
struct Dacb {
    SpatialAttention sab;
    ChannelAttention cab;
    Tensor wf, bf;

    Dacb() = default;
    Dacb(ParamRegistry& reg, const std::string& prefix, long C, long reduction);
    Tensor forward(const Tensor& x) const;
};

// Windowed multi-head self-attention block (pre-LN, residual, MLP x4).
// shift > 0 applies a cyclic shift with cross-boundary masking.
struct WindowTransformerBlock {
    long channels = 0, window = 0, heads = 0, shift = 0;
    Tensor ln1_g, ln1_b, ln2_g, ln2_b;
    Tensor wqkv, bqkv, wproj, bproj;
    Tensor wm1, bm1, wm2, bm2;  // MLP as 1x1 convs

    WindowTransformerBlock() = default;
    WindowTransformerBlock(ParamRegistry& reg, const std::string& prefix, long C,
                           long window, long heads, long shift);
    Tensor forward(const Tensor& x) const;
    // Attention-only path used by tests; x must already be window-aligned.
    Tensor attention(const Tensor& x, Tensor* attn_out = nullptr) const;
    // Additive mask (n_win*T*T; 0 or -1e9) for a shifted H x W grid.
    static std::vector<double> shift_mask(long H, long W, long window, long shift);
};

// Transformer + DACB branches, concatenated, gated by channel attention and
// projected back to C. Either branch can be disabled (ablations).
struct Glab {
    long channels = 0;
    bool use_swin = true, use_dacb = true;
    std::vector<WindowTransformerBlock> swin;
    Dacb dacb;
    ChannelAttention fuse_ca;
    Tensor wp, bp;

    Glab() = default;
    Glab(ParamRegistry& reg, const std::string& prefix, long C, long window, long heads,
         long reduction, int swin_blocks, bool use_swin, bool use_dacb);
    Tensor forward(const Tensor& x) const;
};

// conv-relu-conv -> channel attention -> residual. Second conv zero-init so
// the block is the identity at initialization.
struct Rcab {
    Tensor w1, b1, w2, b2;
    ChannelAttention ca;

    Rcab() = default;
    Rcab(ParamRegistry& reg, const std::string& prefix, long C, long reduction);
    Tensor forward(const Tensor& x) const;
};

// Supervision module: residual image prediction + gated feature refinement
// with an original-image feature channel.
struct SupervisionModule {
    long channels = 0, img_channels = 0;
    Tensor w_pred, b_pred;  // zero-init: intermediate == x_in at start
    Tensor w_gate, b_gate;
    Tensor w_orig, b_orig;

    SupervisionModule() = default;
    SupervisionModule(ParamRegistry& reg, const std::string& prefix, long C, long img_ch);
    struct Out {
        Tensor intermediate;  // (N,img_ch,H,W)
        Tensor refined;       // (N,C,H,W)
    };
    Out forward(const Tensor& f, const Tensor& x_in) const;
};

}  // namespace lcdb
