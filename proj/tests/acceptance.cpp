// Acceptance suite: one pass/fail line per criterion. Exercises the library
// end to end (color math, wavelets, metrics, gradients, architecture,
// training behavior, ablations, persistence) plus the CLI binary, whose path
// is passed as argv[1].

#include "lcdb/ops.hpp"
#include "lcdb/training.hpp"
#include "lcdb/wavelet.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <limits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace lcdb;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

int g_failures = 0;
std::ostringstream g_detail;  // per-criterion failure notes

void expect(bool ok, const std::string& what) {
    if (!ok) g_detail << "    failed: " << what << '\n';
}

void report(int index, const std::string& name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << index << ". " << name << '\n';
    if (!ok) {
        std::cout << g_detail.str();
        ++g_failures;
    }
    g_detail.str("");
    g_detail.clear();
}

// Runs a criterion body; any failed expect() or exception fails the line.
void criterion(int index, const std::string& name, const std::function<void()>& body) {
    const bool before = g_detail.str().empty();
    (void)before;
    try {
        body();
    } catch (const std::exception& e) {
        g_detail << "    exception: " << e.what() << '\n';
    }
    report(index, name, g_detail.str().empty());
}

// ---------------------------------------------------------------------------
// Shared fixtures
// ---------------------------------------------------------------------------

Tensor random_tensor(std::vector<long> shape, uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Tensor t = Tensor::zeros(shape);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    for (long i = 0; i < t.numel(); ++i) t.data()[i] = u(rng);
    return t;
}

void jitter_params(ParamRegistry& reg, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (auto& [name, p] : reg.params())
        for (long i = 0; i < p.numel(); ++i) p.data()[i] += u(rng);
}

double max_rel_grad_err(Tensor& x, const std::function<Tensor()>& f, long stride = 1,
                        double step = 1e-4) {
    x.set_requires_grad(true);
    x.zero_grad();
    Tensor loss = f();
    loss.backward();
    std::vector<double> analytic(x.grad(), x.grad() + x.numel());
    double worst = 0.0;
    for (long i = 0; i < x.numel(); i += stride) {
        const double keep = x.data()[i];
        x.data()[i] = keep + step;
        const double up = f().item();
        x.data()[i] = keep - step;
        const double dn = f().item();
        x.data()[i] = keep;
        const double fd = (up - dn) / (2.0 * step);
        const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
        worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
    return worst;
}

NetworkConfig toy_network() {
    NetworkConfig n;
    n.base_channels_lan = 8;
    n.base_channels_crn = 8;
    n.lan_stages = 2;
    n.crn_wavelet_levels = 2;
    n.rcabs_per_level = 1;
    n.fn_channels = 16;
    n.fn_conv_layers = 2;
    n.window = 4;
    n.swin_blocks_per_glab = 1;
    return n;
}

RgbImage smooth_image(long h, long w, int k) {
    RgbImage img(h, w);
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(y, x, c) = 0.55 + 0.35 * std::sin(0.13 * (x + 7 * k) + 0.9 * c) *
                                              std::cos(0.11 * (y + 3 * k));
    return img;
}

// Per-process scratch directory so concurrent runs cannot collide.
fs::path scratch_dir(const std::string& tag) {
    return fs::temp_directory_path() /
           ("lcdb_accept_" + std::to_string(::getpid()) + "_" + tag);
}

RgbImage random_rgb(long h, long w, uint64_t seed) {
    RgbImage img(h, w);
    std::mt19937_64 rng(seed);
    for (auto& v : img.v) v = (rng() % 256) / 255.0;
    return img;
}

// Four paired 64x64 images; "low" is a uniformly darkened copy of "high", so
// the enhancement task is learnable quickly on CPU.
fs::path make_overfit_dataset() {
    const fs::path root = scratch_dir("overfit");
    fs::remove_all(root);
    fs::create_directories(root / "low");
    fs::create_directories(root / "high");
    for (int i = 0; i < 4; ++i) {
        RgbImage hi = smooth_image(64, 64, i);
        RgbImage lo = hi;
        for (auto& v : lo.v) v *= 0.3;
        const std::string name = "i" + std::to_string(i) + ".png";
        write_png((root / "high" / name).string(), hi);
        write_png((root / "low" / name).string(), lo);
    }
    return root;
}

TrainConfig probe_config(const NetworkConfig& net) {
    TrainConfig cfg;
    cfg.network = net;
    cfg.crop = 64;
    cfg.batch_size = 4;
    cfg.seed = 7;
    cfg.lr_init = 1e-3;
    cfg.lr_final = 1e-4;
    cfg.checkpoint_every = 0;
    return cfg;
}

// Trains `steps` steps on the fixed overfit batch and returns the final mean
// PSNR over the four pairs.
double run_probe(const fs::path& root, const NetworkConfig& net, int steps) {
    TrainConfig cfg = probe_config(net);
    TrainState st = init_train_state(cfg, 500);
    const auto ds = scan_dataset(root.string());
    const Batch batch = make_batch(ds, {0, 1, 2, 3}, 99, 64);
    for (int s = 0; s < steps; ++s) train_step(st, batch);
    return evaluate_model(*st.net, root.string()).psnr_db;
}

int run_cli(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string g_cli;  // path to the command-line binary (argv[1])

// ---------------------------------------------------------------------------
// 1. Color transform
// ---------------------------------------------------------------------------

RgbImage pixel(double r, double g, double b) {
    RgbImage img(1, 1);
    img.at(0, 0, 0) = r;
    img.at(0, 0, 1) = g;
    img.at(0, 0, 2) = b;
    return img;
}

void check_color_transform() {
    // Pure-red and pure-white probes hit individual matrix coefficients.
    const YccImage red = rgb_to_ycc(pixel(1, 0, 0));
    expect(red.y.at(0, 0) == 0.299, "red luminance coefficient");
    expect(red.cb.at(0, 0) == -0.147, "red Cb coefficient");
    expect(red.cr.at(0, 0) == 0.615, "red Cr coefficient");
    const YccImage white = rgb_to_ycc(pixel(1, 1, 1));
    expect(std::abs(white.y.at(0, 0) - 1.0) < 1e-12, "white luminance = 1");
    expect(std::abs(white.cb.at(0, 0)) < 1e-12, "white Cb = 0");
    expect(std::abs(white.cr.at(0, 0)) < 1e-12, "white Cr = 0");

    // Round trip over 1e4 random pixels, truncated to float precision.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0, worst_eq2 = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const RgbImage in = pixel(u(rng), u(rng), u(rng));
        YccImage ycc = rgb_to_ycc(in);
        ycc.y.at(0, 0) = static_cast<float>(ycc.y.at(0, 0));
        ycc.cb.at(0, 0) = static_cast<float>(ycc.cb.at(0, 0));
        ycc.cr.at(0, 0) = static_cast<float>(ycc.cr.at(0, 0));
        const RgbImage out = ycc_to_rgb(ycc);
        for (int c = 0; c < 3; ++c)
            worst = std::max(worst, std::abs(out.at(0, 0, c) - in.at(0, 0, c)));
        // Two-coefficient chroma formulation: cb ~ 0.492(B-Y), cr ~ 0.877(R-Y)
        const double y = rgb_to_ycc(in).y.at(0, 0);
        worst_eq2 = std::max(worst_eq2,
                             std::abs(rgb_to_ycc(in).cb.at(0, 0) - 0.492 * (in.at(0, 0, 2) - y)));
        worst_eq2 = std::max(worst_eq2,
                             std::abs(rgb_to_ycc(in).cr.at(0, 0) - 0.877 * (in.at(0, 0, 0) - y)));
    }
    expect(worst < 1e-5, "float round trip max error < 1e-5 (got " + std::to_string(worst) + ")");
    expect(worst_eq2 < 2e-3, "two-coefficient chroma agreement < 2e-3");
}

// ---------------------------------------------------------------------------
// 2. Wavelet transform
// ---------------------------------------------------------------------------

void check_wavelet() {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int levels = 1; levels <= 3; ++levels) {
        for (long size : {64L, 128L, 256L}) {
            Volume x(2, size, size);
            for (auto& v : x.v) v = n(rng);
            const WaveletPyramid p = decompose(x, levels);
            const Volume back = reconstruct(p);
            double worst = 0.0, e_in = 0.0, e_out = 0.0;
            for (long i = 0; i < x.numel(); ++i) {
                worst = std::max(worst, std::abs(back.v[i] - x.v[i]));
                e_in += x.v[i] * x.v[i];
            }
            for (const auto& d : p.detail_levels)
                for (const Volume* b : {&d.lh, &d.hl, &d.hh})
                    for (double v : b->v) e_out += v * v;
            for (double v : p.approx.v) e_out += v * v;
            const std::string tag =
                " (levels=" + std::to_string(levels) + ", size=" + std::to_string(size) + ")";
            expect(worst < 1e-6, "perfect reconstruction" + tag);
            expect(std::abs(e_out - e_in) / e_in < 1e-6, "energy conservation" + tag);
        }
    }
}

// ---------------------------------------------------------------------------
// 3. Metrics and losses
// ---------------------------------------------------------------------------

double brute_force_ssim(const Plane& x, const Plane& y) {
    const std::vector<double> k = ssim_gaussian_kernel();
    double acc = 0.0;
    long count = 0;
    for (long wy = 0; wy + kSsimWindow <= x.h; ++wy) {
        for (long wx = 0; wx + kSsimWindow <= x.w; ++wx) {
            double mx = 0, my = 0;
            for (long i = 0; i < kSsimWindow; ++i)
                for (long j = 0; j < kSsimWindow; ++j) {
                    const double kw = k[i * kSsimWindow + j];
                    mx += kw * x.at(wy + i, wx + j);
                    my += kw * y.at(wy + i, wx + j);
                }
            double vx = 0, vy = 0, cov = 0;
            for (long i = 0; i < kSsimWindow; ++i)
                for (long j = 0; j < kSsimWindow; ++j) {
                    const double kw = k[i * kSsimWindow + j];
                    const double dx = x.at(wy + i, wx + j) - mx;
                    const double dy = y.at(wy + i, wx + j) - my;
                    vx += kw * dx * dx;
                    vy += kw * dy * dy;
                    cov += kw * dx * dy;
                }
            acc += ((2 * mx * my + kSsimC1) * (2 * cov + kSsimC2)) /
                   ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
            ++count;
        }
    }
    return acc / count;
}

void check_metrics_losses() {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Plane a(16, 16), b(16, 16);
    for (long i = 0; i < 256; ++i) {
        a.v[i] = u(rng);
        b.v[i] = std::min(1.0, std::max(0.0, a.v[i] + 0.1 * (u(rng) - 0.5)));
    }
    expect(std::abs(ssim(a, a) - 1.0) < 1e-9, "self similarity = 1");
    expect(std::abs(ssim(a, b) - brute_force_ssim(a, b)) < 1e-6,
           "structural similarity matches the per-window oracle");

    Tensor x = random_tensor({1, 1, 8, 8}, 41, 0.0, 1.0);
    expect(charbonnier(x, x).item() == 0.001, "self penalty equals epsilon exactly");

    // Perfect prediction: every term reduces to epsilon, similarity loss to 0.
    Tensor full = random_tensor({2, 3, 16, 16}, 43, 0.0, 1.0);
    Tensor lum = Tensor::zeros({2, 1, 16, 16});
    Tensor chrom = Tensor::zeros({2, 2, 16, 16});
    for (long nidx = 0; nidx < 2; ++nidx)
        for (long i = 0; i < 256; ++i) {
            lum.data()[nidx * 256 + i] = full.data()[nidx * 768 + i];
            chrom.data()[nidx * 512 + i] = full.data()[nidx * 768 + 256 + i];
            chrom.data()[nidx * 512 + 256 + i] = full.data()[nidx * 768 + 512 + i];
        }
    const LossBreakdown lb = joint_loss(lum, chrom, full, full, 0.1, 0.1);
    expect(std::abs(lb.total.item() - 0.0012) < 1e-12,
           "joint objective at perfect prediction = 0.0012");
}

// ---------------------------------------------------------------------------
// 4. Gradient checks
// ---------------------------------------------------------------------------

Tensor scalar_loss(const Tensor& y) { return ops::mean_all(ops::mul(y, y)); }

void check_gradients() {
    struct BlockCase {
        std::string name;
        std::function<double()> run;
    };
    std::vector<BlockCase> cases;

    cases.push_back({"channel attention", [] {
                         ParamRegistry reg(5);
                         ChannelAttention blk(reg, "ca", 8, 16);
                         jitter_params(reg, 7);
                         Tensor x = random_tensor({1, 8, 6, 6}, 11);
                         return max_rel_grad_err(x, [&] { return scalar_loss(blk.forward(x)); });
                     }});
    cases.push_back({"spatial attention", [] {
                         ParamRegistry reg(5);
                         SpatialAttention blk(reg, "sa");
                         jitter_params(reg, 13);
                         Tensor x = random_tensor({1, 4, 8, 8}, 17);
                         return max_rel_grad_err(x, [&] { return scalar_loss(blk.forward(x)); });
                     }});
    cases.push_back({"dual attention conv block", [] {
                         ParamRegistry reg(5);
                         Dacb blk(reg, "dacb", 8, 16);
                         jitter_params(reg, 19);
                         Tensor x = random_tensor({1, 8, 8, 8}, 23);
                         return max_rel_grad_err(x, [&] { return scalar_loss(blk.forward(x)); }, 3);
                     }});
    cases.push_back({"window transformer (shifted)", [] {
                         ParamRegistry reg(5);
                         WindowTransformerBlock blk(reg, "wt", 8, 4, 2, 2);
                         jitter_params(reg, 29);
                         Tensor x = random_tensor({1, 8, 8, 8}, 31);
                         return max_rel_grad_err(x, [&] { return scalar_loss(blk.forward(x)); }, 5);
                     }});
    cases.push_back({"attention-guided block", [] {
                         ParamRegistry reg(5);
                         Glab blk(reg, "glab", 8, 4, 2, 16, 1, true, true);
                         jitter_params(reg, 37);
                         Tensor x = random_tensor({1, 8, 8, 8}, 41);
                         return max_rel_grad_err(x, [&] { return scalar_loss(blk.forward(x)); }, 7);
                     }});
    cases.push_back({"residual channel attention block", [] {
                         ParamRegistry reg(5);
                         Rcab blk(reg, "rcab", 8, 16);
                         jitter_params(reg, 43);
                         Tensor x = random_tensor({1, 8, 8, 8}, 47);
                         return max_rel_grad_err(x, [&] { return scalar_loss(blk.forward(x)); }, 5);
                     }});
    cases.push_back({"supervision module", [] {
                         ParamRegistry reg(5);
                         SupervisionModule blk(reg, "sm", 8, 1);
                         jitter_params(reg, 53);
                         Tensor f = random_tensor({1, 8, 8, 8}, 59);
                         Tensor xin = random_tensor({1, 1, 8, 8}, 61, 0.0, 1.0);
                         return max_rel_grad_err(
                             f, [&] { return scalar_loss(blk.forward(f, xin).refined); }, 5);
                     }});

    for (auto& c : cases) {
        const double err = c.run();
        expect(err < 1e-3, c.name + " gradient rel err < 1e-3 (got " + std::to_string(err) + ")");
    }

    // End-to-end: full toy model through the joint objective.
    LcdbNet net(toy_network(), 3);
    jitter_params(net.params(), 67);
    Tensor x = random_tensor({1, 3, 32, 32}, 71, 0.05, 0.95);
    Tensor ref = random_tensor({1, 3, 32, 32}, 73, 0.05, 0.95);
    const auto f = [&] {
        const ModelOutputs out = net.forward(x);
        return joint_loss(out.sm_lum, out.sm_chrom, out.enhanced_ycc, ref).total;
    };
    const double err = max_rel_grad_err(x, f, 131);  // ~24 probed coordinates
    expect(err < 1e-2, "end-to-end gradient rel err < 1e-2 (got " + std::to_string(err) + ")");
}

// ---------------------------------------------------------------------------
// 5. Architecture contract
// ---------------------------------------------------------------------------

void check_architecture() {
    const NetworkConfig ref;  // reference recipe
    expect(ref.lan_stages == 3, "luminance branch uses 3 stages");

    const auto table = FnNetwork::layer_table(ref);
    expect(table.size() == 6, "fusion table has 6 rows");
    bool rows_ok = table.size() == 6;
    for (size_t i = 0; rows_ok && i + 1 < table.size(); ++i)
        rows_ok = table[i].deployment == "Conv+ReLU" && table[i].kernel == 3 &&
                  table[i].channels == 96;
    if (rows_ok)
        rows_ok = table.back().deployment == "Conv" && table.back().kernel == 3 &&
                  table.back().channels == 3;
    expect(rows_ok, "fusion layer table: five Conv+ReLU 3x3 @96, final Conv 3x3 @3");

    LcdbNet net(ref, 1);
    const double count = static_cast<double>(net.count_parameters());
    expect(count >= 0.8 * 7.36e6 && count <= 1.2 * 7.36e6,
           "parameter count within 20% of 7.36M (got " + std::to_string(net.count_parameters()) +
               ")");
}

// ---------------------------------------------------------------------------
// 6/7. Training behavior + ablations (share the overfit probe)
// ---------------------------------------------------------------------------

struct ProbeResults {
    bool reached_30db = false;
    long reached_at = -1;
    double full_psnr_100 = 0.0;
};

ProbeResults run_full_probe(const fs::path& root) {
    ProbeResults res;
    TrainConfig cfg = probe_config(toy_network());
    TrainState st = init_train_state(cfg, 500);
    const auto ds = scan_dataset(root.string());
    const Batch batch = make_batch(ds, {0, 1, 2, 3}, 99, 64);
    for (int s = 1; s <= 500; ++s) {
        train_step(st, batch);
        if (s == 100) res.full_psnr_100 = evaluate_model(*st.net, root.string()).psnr_db;
        if (s >= 100 && s % 25 == 0) {
            const double psnr = (s == 100) ? res.full_psnr_100
                                           : evaluate_model(*st.net, root.string()).psnr_db;
            if (psnr >= 30.0) {
                res.reached_30db = true;
                res.reached_at = s;
                break;
            }
        }
    }
    return res;
}

void check_training_behavior(const ProbeResults& probe) {
    expect(probe.reached_30db, "overfit probe reaches 30 dB within 500 steps");

    // (b) Single-batch loss trend: 20-step moving average strictly decreasing.
    {
        const fs::path root = scratch_dir("trend");
        fs::remove_all(root);
        fs::create_directories(root / "low");
        fs::create_directories(root / "high");
        RgbImage hi = smooth_image(32, 32, 1);
        RgbImage lo = hi;
        for (auto& v : lo.v) v *= 0.3;
        write_png((root / "high" / "a.png").string(), hi);
        write_png((root / "low" / "a.png").string(), lo);

        TrainConfig cfg;
        cfg.network = toy_network();
        cfg.crop = 32;
        cfg.batch_size = 1;
        cfg.seed = 3;
        cfg.lr_init = 1e-4;
        cfg.lr_final = 1e-5;
        TrainState st = init_train_state(cfg, 200);
        const auto ds = scan_dataset(root.string());
        const Batch batch = make_batch(ds, {0}, 42, 32);
        std::vector<double> losses;
        for (int s = 0; s < 200; ++s) losses.push_back(train_step(st, batch).total_value());
        bool monotone = true;
        double prev = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i + 20 <= losses.size(); ++i) {
            double ma = 0.0;
            for (size_t j = i; j < i + 20; ++j) ma += losses[j];
            ma /= 20.0;
            if (ma >= prev) monotone = false;
            prev = ma;
        }
        expect(monotone, "single-batch 20-step moving-average loss strictly decreasing");
        fs::remove_all(root);
    }

    // (c) Schedule endpoints and midpoint.
    {
        TrainConfig cfg;  // defaults: 1e-4 -> 1e-6
        expect(lr_at(0, 1000, cfg) == 1e-4, "initial learning rate exactly 1e-4");
        expect(std::abs(lr_at(1000, 1000, cfg) - 1e-6) < 1e-18, "final learning rate 1e-6");
        expect(std::abs(lr_at(500, 1000, cfg) - 5.05e-5) < 1e-15, "midpoint 5.05e-5");
    }

    // (d) Bit-reproducible at step 0, and resumable mid-run.
    {
        const fs::path root = scratch_dir("repro");
        fs::remove_all(root);
        fs::create_directories(root / "low");
        fs::create_directories(root / "high");
        write_png((root / "low" / "a.png").string(), random_rgb(24, 24, 1));
        write_png((root / "high" / "a.png").string(), random_rgb(24, 24, 2));
        write_png((root / "low" / "b.png").string(), random_rgb(24, 24, 3));
        write_png((root / "high" / "b.png").string(), random_rgb(24, 24, 4));

        TrainConfig cfg;
        cfg.network = toy_network();
        cfg.crop = 16;
        cfg.batch_size = 1;
        cfg.seed = 11;
        cfg.epochs = 2;
        cfg.checkpoint_every = 0;
        const auto ds = scan_dataset(root.string());
        const Batch batch = make_batch(ds, {0, 1}, 5, 16);

        TrainState s1 = init_train_state(cfg, 10);
        TrainState s2 = init_train_state(cfg, 10);
        const double l1 = train_step(s1, batch).total_value();
        const double l2 = train_step(s2, batch).total_value();
        expect(std::memcmp(&l1, &l2, sizeof(double)) == 0, "seed-fixed step-0 loss bit-identical");
        bool params_equal = true;
        for (const auto& [name, p] : s1.net->params().params()) {
            const Tensor& q = s2.net->params().params().at(name);
            if (std::memcmp(p.data(), q.data(), sizeof(double) * p.numel()) != 0)
                params_equal = false;
        }
        expect(params_equal, "seed-fixed step-0 parameters bit-identical");

        // Interrupt after 2 of 4 total steps, then resume to completion.
        const fs::path out = scratch_dir("resume");
        fs::remove_all(out);
        TrainConfig half = cfg;
        half.stop_after_steps = 2;
        train(half, root.string(), out.string());
        const Checkpoint mid = load_checkpoint((out / "latest.lcdb").string());
        expect(mid.step == 2, "interrupted run checkpoints at step 2");
        const Checkpoint done = train(cfg, root.string(), out.string());
        expect(done.step == 4, "resumed run completes all 4 steps");
        fs::remove_all(out);
        fs::remove_all(root);
    }
}

void check_ablations(const fs::path& root, const ProbeResults& probe) {
    struct Variant {
        std::string flag;
        int steps;
        bool ordered;  // compare final quality against the full model
    };
    const std::vector<Variant> variants = {
        {"no_lan", 100, true},  {"no_crn", 100, true},  {"no_fn", 100, true},
        {"no_swin", 50, false}, {"no_dacb", 50, false},
    };
    for (const auto& v : variants) {
        NetworkConfig net = toy_network();
        if (v.flag == "no_lan") net.no_lan = true;
        if (v.flag == "no_crn") net.no_crn = true;
        if (v.flag == "no_fn") net.no_fn = true;
        if (v.flag == "no_swin") net.no_swin = true;
        if (v.flag == "no_dacb") net.no_dacb = true;
        try {
            const double psnr = run_probe(root, net, v.steps);
            if (v.ordered)
                expect(probe.full_psnr_100 >= psnr,
                       "full model outperforms " + v.flag + " (full " +
                           std::to_string(probe.full_psnr_100) + " dB vs " +
                           std::to_string(psnr) + " dB)");
        } catch (const std::exception& e) {
            expect(false, v.flag + " training failed: " + e.what());
        }
    }
}

// ---------------------------------------------------------------------------
// 8. Persistence and CLI
// ---------------------------------------------------------------------------

void check_persistence_cli() {
    const fs::path tmp = scratch_dir("cli");
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    // Checkpoint round trip: values bit-exact, serialization canonical.
    {
        TrainConfig cfg;
        cfg.network = toy_network();
        cfg.seed = 13;
        TrainState st = init_train_state(cfg, 10);
        const Checkpoint ckpt = snapshot(st);
        const fs::path p1 = tmp / "a.lcdb";
        const fs::path p2 = tmp / "b.lcdb";
        save_checkpoint(ckpt, p1.string());
        const Checkpoint back = load_checkpoint(p1.string());
        bool exact = back.parameters.size() == ckpt.parameters.size();
        for (const auto& [name, arr] : ckpt.parameters) {
            const auto it = back.parameters.find(name);
            if (it == back.parameters.end() || it->second.data != arr.data ||
                it->second.shape != arr.shape)
                exact = false;
        }
        expect(exact, "checkpoint parameters survive save/load bit-exactly");
        save_checkpoint(back, p2.string());
        std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
        const std::string b1((std::istreambuf_iterator<char>(f1)), {});
        const std::string b2((std::istreambuf_iterator<char>(f2)), {});
        expect(!b1.empty() && b1 == b2, "re-serialized checkpoint byte-identical");
    }

    // Evaluation over a 15-pair split emits a 15-row report via the CLI.
    {
        const fs::path root = tmp / "eval_set";
        fs::create_directories(root / "low");
        fs::create_directories(root / "high");
        for (int i = 0; i < 15; ++i) {
            const std::string name = "p" + std::to_string(i) + ".png";
            write_png((root / "low" / name).string(), random_rgb(16, 16, 100 + i));
            write_png((root / "high" / name).string(), random_rgb(16, 16, 200 + i));
        }
        Checkpoint ckpt;
        ckpt.network_config = toy_network();
        LcdbNet net(ckpt.network_config, 17);
        store_parameters(net.params(), ckpt);
        const fs::path cp = tmp / "eval.lcdb";
        save_checkpoint(ckpt, cp.string());
        const fs::path report = tmp / "report.txt";
        const int rc = run_cli("\"" + g_cli + "\" evaluate " + cp.string() + " " + root.string() +
                               " --report " + report.string() + " > /dev/null");
        expect(rc == 0, "evaluate command exits 0");
        std::ifstream in(report);
        long rows = 0;
        std::string line;
        bool has_mean = false;
        if (in && std::getline(in, line)) {  // header
            while (std::getline(in, line)) {
                if (line.rfind("mean\t", 0) == 0)
                    has_mean = true;
                else if (!line.empty())
                    ++rows;
            }
        }
        expect(rows == 15 && has_mean, "report lists 15 per-image rows plus the mean (got " +
                                           std::to_string(rows) + ")");
    }

    // Channel decomposition recombines to the source within one 8-bit step.
    {
        const fs::path input = tmp / "scene.png";
        write_png(input.string(), random_rgb(40, 56, 321));
        const fs::path out = tmp / "decomp";
        const int rc =
            run_cli("\"" + g_cli + "\" decompose " + input.string() + " --out " + out.string() +
                    " > /dev/null");
        expect(rc == 0, "decompose command exits 0");
        long found = 0;
        for (const char* suffix : {"r", "g", "b", "y", "cb", "cr", "original"})
            if (fs::exists(out / ("scene_" + std::string(suffix) + ".png"))) ++found;
        expect(found == 7, "decompose emits 7 files (got " + std::to_string(found) + ")");

        const RgbImage src = read_png(input.string());
        YccImage ycc;
        ycc.y = read_png_gray16((out / "scene_y.png").string());
        ycc.cb = read_png_gray16((out / "scene_cb.png").string());
        ycc.cr = read_png_gray16((out / "scene_cr.png").string());
        for (auto& v : ycc.cb.v) v = (v - 0.5) * 2.0 * kCbHalfRange;
        for (auto& v : ycc.cr.v) v = (v - 0.5) * 2.0 * kCrHalfRange;
        const RgbImage rec = ycc_to_rgb(ycc);
        double worst = 0.0;
        for (size_t i = 0; i < src.v.size(); ++i)
            worst = std::max(worst, std::abs(rec.v[i] - src.v[i]));
        expect(worst <= 1.0 / 255.0,
               "recombination within 1/255 (worst " + std::to_string(worst) + ")");
    }

    fs::remove_all(tmp);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-cli-binary>\n";
        return 2;
    }
    g_cli = argv[1];

    criterion(1, "color transform: spot values, round trip, chroma agreement",
              check_color_transform);
    criterion(2, "wavelet transform: perfect reconstruction and energy conservation",
              check_wavelet);
    criterion(3, "metrics and losses: oracle agreement and exact self-penalties",
              check_metrics_losses);
    criterion(4, "gradients: every block and the end-to-end model match finite differences",
              check_gradients);
    criterion(5, "architecture: fusion table, stage count, parameter budget", check_architecture);

    const fs::path overfit_root = make_overfit_dataset();
    ProbeResults probe;
    criterion(6, "training behavior: overfit probe, loss trend, schedule, reproducibility",
              [&] {
                  probe = run_full_probe(overfit_root);
                  check_training_behavior(probe);
              });
    criterion(7, "ablations: every variant trains; removing a branch hurts quality",
              [&] { check_ablations(overfit_root, probe); });
    fs::remove_all(overfit_root);

    criterion(8, "persistence and command line: checkpoints, evaluation report, decomposition",
              check_persistence_cli);

    if (g_failures == 0) {
        std::cout << "all criteria passed\n";
        return 0;
    }
    std::cout << g_failures << " criteria failed\n";
    return 1;
}
