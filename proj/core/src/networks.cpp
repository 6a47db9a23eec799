#include "lcdb/networks.hpp"

#include <cmath>
#include <stdexcept>

namespace lcdb {

using namespace ops;

namespace {
long heads_for(long channels, long divisor) { return std::max<long>(1, channels / divisor); }
}  // namespace

void NetworkConfig::validate() const {
    if (base_channels_lan < 1 || base_channels_crn < 1 || fn_channels < 1)
        throw std::invalid_argument("config: channel counts must be positive");
    if (lan_stages < 1 || crn_wavelet_levels < 1 || rcabs_per_level < 1 || fn_conv_layers < 1)
        throw std::invalid_argument("config: depths must be positive");
    if (window < 1 || heads_divisor < 1 || reduction < 1 || swin_blocks_per_glab < 1)
        throw std::invalid_argument("config: block parameters must be positive");
    if (!no_fn && fn_channels != base_channels_lan + base_channels_crn)
        throw std::invalid_argument(
            "config: fn_channels must equal base_channels_lan + base_channels_crn");
    if (no_lan && no_crn)
        throw std::invalid_argument("config: cannot ablate both branches");
}

long NetworkConfig::pad_multiple() const {
    return 1L << std::max(lan_stages, crn_wavelet_levels);
}

// --- LAN ---

LanNetwork::LanNetwork(ParamRegistry& reg, const NetworkConfig& cfg) {
    base = cfg.base_channels_lan;
    stages = cfg.lan_stages;
    w_stem = reg.create("lan.stem.weight", {base, 1, 3, 3}, Init::kFanInUniform, 9);
    b_stem = reg.create("lan.stem.bias", {base}, Init::kZero);
    for (int i = 0; i < stages; ++i) {
        const long c = base << i;
        enc_glabs.emplace_back(reg, "lan.enc" + std::to_string(i) + ".glab", c, cfg.window,
                               heads_for(c, cfg.heads_divisor), cfg.reduction,
                               cfg.swin_blocks_per_glab, !cfg.no_swin, !cfg.no_dacb);
        w_down.push_back(reg.create("lan.enc" + std::to_string(i) + ".down.weight",
                                    {2 * c, c, 3, 3}, Init::kFanInUniform, c * 9));
        b_down.push_back(reg.create("lan.enc" + std::to_string(i) + ".down.bias", {2 * c},
                                    Init::kZero));
    }
    for (int i = stages - 1; i >= 0; --i) {
        const long c = base << i;
        w_up.push_back(reg.create("lan.dec" + std::to_string(i) + ".up.weight",
                                  {2 * c, c, 3, 3}, Init::kFanInUniform, 2 * c * 9));
        b_up.push_back(reg.create("lan.dec" + std::to_string(i) + ".up.bias", {c}, Init::kZero));
        dec_glabs.emplace_back(reg, "lan.dec" + std::to_string(i) + ".glab", c, cfg.window,
                               heads_for(c, cfg.heads_divisor), cfg.reduction,
                               cfg.swin_blocks_per_glab, !cfg.no_swin, !cfg.no_dacb);
    }
    sm = SupervisionModule(reg, "lan.sm", base, 1);
}

LanNetwork::Out LanNetwork::forward(const Tensor& y_plane) const {
    check(y_plane.rank() == 4 && y_plane.dim(1) == 1, "lan_forward: (N,1,H,W) expected");
    check(y_plane.dim(2) % (1L << stages) == 0 && y_plane.dim(3) % (1L << stages) == 0,
          "lan_forward: dims not coverable by the stage-2 padding policy");
    Tensor x = conv2d(y_plane, w_stem, b_stem, 1, 1);
    std::vector<Tensor> skips;
    for (int i = 0; i < stages; ++i) {
        x = enc_glabs[i].forward(x);
        skips.push_back(x);
        x = conv2d(x, w_down[i], b_down[i], 2, 1);
    }
    for (int i = 0; i < stages; ++i) {
        x = conv_transpose2d_x2(x, w_up[i], b_up[i]);
        x = add(x, skips[stages - 1 - i]);
        x = dec_glabs[i].forward(x);
    }
    auto out = sm.forward(x, y_plane);
    return {out.refined, out.intermediate};
}

// --- CRN ---

CrnNetwork::CrnNetwork(ParamRegistry& reg, const NetworkConfig& cfg) {
    base = cfg.base_channels_crn;
    levels = cfg.crn_wavelet_levels;
    for (int k = 0; k < levels; ++k) {
        const std::string lv = "crn.level" + std::to_string(k);
        // Detail triple (3*2 channels); the coarsest level also carries LL.
        const long in_ch = (k == levels - 1) ? 8 : 6;
        w_lift.push_back(reg.create(lv + ".lift.weight", {base, in_ch, 1, 1},
                                    Init::kFanInUniform, in_ch));
        b_lift.push_back(reg.create(lv + ".lift.bias", {base}, Init::kZero));
        std::vector<Rcab> rcabs;
        for (int j = 0; j < cfg.rcabs_per_level; ++j)
            rcabs.emplace_back(reg, lv + ".rcab" + std::to_string(j), base, cfg.reduction);
        level_rcabs.push_back(std::move(rcabs));
        std::vector<Tensor> wu, bu;
        for (int j = 0; j <= k; ++j) {
            wu.push_back(reg.create(lv + ".up" + std::to_string(j) + ".weight",
                                    {4 * base, base, 1, 1}, Init::kFanInUniform, base));
            bu.push_back(reg.create(lv + ".up" + std::to_string(j) + ".bias", {4 * base},
                                    Init::kZero));
        }
        w_up.push_back(std::move(wu));
        b_up.push_back(std::move(bu));
    }
    w_merge = reg.create("crn.merge.weight", {base, levels * base, 1, 1}, Init::kFanInUniform,
                         levels * base);
    b_merge = reg.create("crn.merge.bias", {base}, Init::kZero);
    fusion = Rcab(reg, "crn.fusion", base, cfg.reduction);
    sm = SupervisionModule(reg, "crn.sm", base, 2);
}

CrnNetwork::Out CrnNetwork::forward(const Tensor& cbcr_planes) const {
    check(cbcr_planes.rank() == 4 && cbcr_planes.dim(1) == 2,
          "crn_forward: (N,2,H,W) expected");
    check(cbcr_planes.dim(2) % (1L << levels) == 0 &&
              cbcr_planes.dim(3) % (1L << levels) == 0,
          "crn_forward: dims not divisible per padding policy");
    // Multi-level decomposition of the chroma pair.
    std::vector<Tensor> level_inputs;
    Tensor cur = cbcr_planes;
    for (int k = 0; k < levels; ++k) {
        Tensor d = dwt2(cur);  // (N,8,h,w): [LL(2), LH(2), HL(2), HH(2)]
        if (k == levels - 1)
            level_inputs.push_back(d);
        else
            level_inputs.push_back(slice_channels(d, 2, 6));
        cur = slice_channels(d, 0, 2);
    }
    // Per-level subband features, lifted back to full resolution by IWT.
    std::vector<Tensor> feats;
    for (int k = 0; k < levels; ++k) {
        Tensor f = conv2d(level_inputs[k], w_lift[k], b_lift[k]);
        for (const Rcab& r : level_rcabs[k]) f = r.forward(f);
        for (int j = 0; j <= k; ++j)
            f = idwt2(conv2d(f, w_up[k][j], b_up[k][j]));
        feats.push_back(f);
    }
    Tensor x = conv2d(concat_channels(feats), w_merge, b_merge);
    x = fusion.forward(x);
    auto out = sm.forward(x, cbcr_planes);
    return {out.refined, out.intermediate};
}

// --- FN ---

FnNetwork::FnNetwork(ParamRegistry& reg, const NetworkConfig& cfg) {
    const long C = cfg.fn_channels;
    for (int i = 0; i < cfg.fn_conv_layers; ++i) {
        w.push_back(reg.create("fn.conv" + std::to_string(i + 1) + ".weight", {C, C, 3, 3},
                               Init::kFanInUniform, C * 9));
        b.push_back(reg.create("fn.conv" + std::to_string(i + 1) + ".bias", {C}, Init::kZero));
    }
    // Zero-init output conv: the whole model is the identity at start.
    w_out = reg.create("fn.out.weight", {3, C, 3, 3}, Init::kZero);
    b_out = reg.create("fn.out.bias", {3}, Init::kZero);
}

Tensor FnNetwork::forward(const Tensor& f_lum, const Tensor& f_chrom,
                          const Tensor& input_ycc) const {
    check(f_lum.dim(2) == f_chrom.dim(2) && f_lum.dim(3) == f_chrom.dim(3),
          "fn_forward: spatial mismatch between branch features");
    Tensor x = concat_channels({f_lum, f_chrom});
    check(x.dim(1) == w[0].dim(1), "fn_forward: concatenated channels != fn_channels");
    for (size_t i = 0; i < w.size(); ++i) x = relu(conv2d(x, w[i], b[i], 1, 1));
    return add(conv2d(x, w_out, b_out, 1, 1), input_ycc);
}

std::vector<FnNetwork::LayerRow> FnNetwork::layer_table(const NetworkConfig& cfg) {
    std::vector<LayerRow> rows;
    for (int i = 0; i < cfg.fn_conv_layers; ++i)
        rows.push_back({"Conv+ReLU", 3, cfg.fn_channels});
    rows.push_back({"Conv", 3, 3});
    return rows;
}

// --- LCDBNet ---

LcdbNet::LcdbNet(const NetworkConfig& cfg, uint64_t seed) : cfg_(cfg), reg_(seed) {
    cfg_.validate();
    if (!cfg_.no_lan) {
        lan_ = LanNetwork(reg_, cfg_);
    } else {
        w_lift_y_ = reg_.create("ablate.lift_y.weight", {cfg_.base_channels_lan, 1, 1, 1},
                                Init::kFanInUniform, 1);
        b_lift_y_ = reg_.create("ablate.lift_y.bias", {cfg_.base_channels_lan}, Init::kZero);
    }
    if (!cfg_.no_crn) {
        crn_ = CrnNetwork(reg_, cfg_);
    } else {
        w_lift_cc_ = reg_.create("ablate.lift_cc.weight", {cfg_.base_channels_crn, 2, 1, 1},
                                 Init::kFanInUniform, 2);
        b_lift_cc_ = reg_.create("ablate.lift_cc.bias", {cfg_.base_channels_crn}, Init::kZero);
    }
    if (!cfg_.no_fn) fn_ = FnNetwork(reg_, cfg_);
}

ModelOutputs LcdbNet::forward(const Tensor& unit_ycc) const {
    check(unit_ycc.rank() == 4 && unit_ycc.dim(1) == 3, "lcdbnet_forward: (N,3,H,W) expected");
    Tensor y = slice_channels(unit_ycc, 0, 1);
    Tensor cbcr = slice_channels(unit_ycc, 1, 2);

    Tensor f_lum, sm_lum;
    if (!cfg_.no_lan) {
        auto lan_out = lan_.forward(y);
        f_lum = lan_out.refined;
        sm_lum = lan_out.sm_pred;
    } else {
        f_lum = conv2d(y, w_lift_y_, b_lift_y_);
        sm_lum = y;
    }
    Tensor f_chrom, sm_chrom;
    if (!cfg_.no_crn) {
        auto crn_out = crn_.forward(cbcr);
        f_chrom = crn_out.refined;
        sm_chrom = crn_out.sm_pred;
    } else {
        f_chrom = conv2d(cbcr, w_lift_cc_, b_lift_cc_);
        sm_chrom = cbcr;
    }

    Tensor enhanced;
    if (!cfg_.no_fn)
        enhanced = fn_.forward(f_lum, f_chrom, unit_ycc);
    else
        enhanced = concat_channels({sm_lum, sm_chrom});
    return {enhanced, sm_lum, sm_chrom};
}

RgbImage LcdbNet::enhance(const RgbImage& rgb, ModelOutputs* outputs) const {
    const long H = rgb.h, W = rgb.w;
    Tensor x = unit_ycc_tensor(rgb);
    const long m = cfg_.pad_multiple();
    const long ph = (m - H % m) % m, pw = (m - W % m) % m;
    if (ph || pw) x = pad_reflect(x, 0, ph, 0, pw);
    ModelOutputs out = forward(x);
    Tensor enhanced = (ph || pw) ? crop2d(out.enhanced_ycc, 0, 0, H, W) : out.enhanced_ycc;
    if (outputs) {
        outputs->enhanced_ycc = enhanced;
        outputs->sm_lum = out.sm_lum;
        outputs->sm_chrom = out.sm_chrom;
    }
    return rgb_from_unit_ycc(enhanced, 0);
}

// --- conversions ---

Tensor unit_ycc_tensor(const std::vector<RgbImage>& batch) {
    check(!batch.empty(), "unit_ycc_tensor: empty batch");
    const long N = static_cast<long>(batch.size()), H = batch[0].h, W = batch[0].w;
    Tensor t = Tensor::zeros({N, 3, H, W});
    double* p = t.data();
    for (long n = 0; n < N; ++n) {
        check(batch[n].h == H && batch[n].w == W, "unit_ycc_tensor: ragged batch");
        UnitYccImage u = normalize_ycc(rgb_to_ycc(batch[n]));
        const long HW = H * W;
        std::copy(u.y.v.begin(), u.y.v.end(), p + (n * 3) * HW);
        std::copy(u.cb.v.begin(), u.cb.v.end(), p + (n * 3 + 1) * HW);
        std::copy(u.cr.v.begin(), u.cr.v.end(), p + (n * 3 + 2) * HW);
    }
    return t;
}

Tensor unit_ycc_tensor(const RgbImage& img) {
    return unit_ycc_tensor(std::vector<RgbImage>{img});
}

RgbImage rgb_from_unit_ycc(const Tensor& t, long n) {
    check(t.rank() == 4 && t.dim(1) == 3 && n < t.dim(0), "rgb_from_unit_ycc: bad tensor");
    const long H = t.dim(2), W = t.dim(3), HW = H * W;
    UnitYccImage u;
    u.y = Plane(H, W);
    u.cb = Plane(H, W);
    u.cr = Plane(H, W);
    const double* p = t.data();
    std::copy(p + (n * 3) * HW, p + (n * 3 + 1) * HW, u.y.v.begin());
    std::copy(p + (n * 3 + 1) * HW, p + (n * 3 + 2) * HW, u.cb.v.begin());
    std::copy(p + (n * 3 + 2) * HW, p + (n * 3 + 3) * HW, u.cr.v.begin());
    return ycc_to_rgb(denormalize_ycc(u));
}

}  // namespace lcdb
