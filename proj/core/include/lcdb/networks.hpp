#pragma once

#include "lcdb/colorspace.hpp"
#include "lcdb/nn.hpp"

#include <memory>
#include <string>
#include <vector>

namespace lcdb {

struct NetworkConfig {
    long base_channels_lan = 48;
    long base_channels_crn = 48;
    int lan_stages = 3;
    int crn_wavelet_levels = 3;
    int rcabs_per_level = 3;
    long fn_channels = 96;
    int fn_conv_layers = 5;
    long window = 8;
    long heads_divisor = 16;
    long reduction = 16;
    int swin_blocks_per_glab = 2;  // unshifted + shifted pair

    // Ablation switches.
    bool no_lan = false, no_crn = false, no_fn = false, no_swin = false, no_dacb = false;

    void validate() const;
    // Spatial dims must be divisible by this before forward.
    long pad_multiple() const;
};

struct ModelOutputs {
    Tensor enhanced_ycc;  // (N,3,H,W) unit-normalized
    Tensor sm_lum;        // (N,1,H,W)
    Tensor sm_chrom;      // (N,2,H,W)
};

// U-shaped luminance branch built from GLABs.
struct LanNetwork {
    long base = 0;
    int stages = 0;
    Tensor w_stem, b_stem;
    std::vector<Glab> enc_glabs;
    std::vector<Tensor> w_down, b_down;
    std::vector<Tensor> w_up, b_up;
    std::vector<Glab> dec_glabs;
    SupervisionModule sm;

    LanNetwork() = default;
    LanNetwork(ParamRegistry& reg, const NetworkConfig& cfg);
    struct Out {
        Tensor refined;  // (N,base,H,W)
        Tensor sm_pred;  // (N,1,H,W)
    };
    Out forward(const Tensor& y_plane) const;
};

// Wavelet-subband chrominance branch built from RCABs.
struct CrnNetwork {
    long base = 0;
    int levels = 0;
    std::vector<Tensor> w_lift, b_lift;
    std::vector<std::vector<Rcab>> level_rcabs;
    std::vector<std::vector<Tensor>> w_up, b_up;  // 1x1 C->4C before each IWT
    Tensor w_merge, b_merge;
    Rcab fusion;
    SupervisionModule sm;

    CrnNetwork() = default;
    CrnNetwork(ParamRegistry& reg, const NetworkConfig& cfg);
    struct Out {
        Tensor refined;  // (N,base,H,W)
        Tensor sm_pred;  // (N,2,H,W)
    };
    Out forward(const Tensor& cbcr_planes) const;
};

// Five Conv+ReLU layers at fn_channels plus a 3-channel output conv; the
// output is a residual over the input YCbCr planes.
struct FnNetwork {
    std::vector<Tensor> w, b;
    Tensor w_out, b_out;

    FnNetwork() = default;
    FnNetwork(ParamRegistry& reg, const NetworkConfig& cfg);
    Tensor forward(const Tensor& f_lum, const Tensor& f_chrom, const Tensor& input_ycc) const;

    struct LayerRow {
        std::string deployment;
        long kernel;
        long channels;
    };
    static std::vector<LayerRow> layer_table(const NetworkConfig& cfg);
};

class LcdbNet {
public:
    LcdbNet(const NetworkConfig& cfg, uint64_t seed);

    // unit_ycc: (N,3,H,W), channels [Y,Cb',Cr']; H,W divisible by
    // cfg.pad_multiple().
    ModelOutputs forward(const Tensor& unit_ycc) const;

    // Full pipeline on one image: rgb -> ycc -> normalize -> pad -> net ->
    // crop -> denormalize -> rgb (clamped).
    RgbImage enhance(const RgbImage& rgb, ModelOutputs* outputs = nullptr) const;

    ParamRegistry& params() { return reg_; }
    const ParamRegistry& params() const { return reg_; }
    long count_parameters() const { return reg_.count_parameters(); }
    const NetworkConfig& config() const { return cfg_; }

private:
    NetworkConfig cfg_;
    ParamRegistry reg_;
    LanNetwork lan_;
    CrnNetwork crn_;
    FnNetwork fn_;
    Tensor w_lift_y_, b_lift_y_;    // no_lan replacement
    Tensor w_lift_cc_, b_lift_cc_;  // no_crn replacement
};

// Plain conversions between image batches and network tensors.
Tensor unit_ycc_tensor(const std::vector<RgbImage>& batch);
Tensor unit_ycc_tensor(const RgbImage& img);
// Extract image n from a (N,3,H,W) unit-ycc tensor and convert to RGB.
RgbImage rgb_from_unit_ycc(const Tensor& t, long n = 0);

}  // namespace lcdb
