#include "lcdb/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lcdb {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
    network.validate();
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (lr_init <= 0.0 || lr_final < 0.0 || lr_final > lr_init)
        throw std::invalid_argument("train: need lr_init > 0 and 0 <= lr_final <= lr_init");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw std::invalid_argument("train: Adam betas must lie in [0, 1)");
    if (crop < 1) throw std::invalid_argument("train: crop must be >= 1");
    if (crop % network.pad_multiple() != 0)
        throw std::invalid_argument("train: crop must be a multiple of " +
                                    std::to_string(network.pad_multiple()));
}

std::string TrainConfig::digest() const {
    std::ostringstream os;
    os << epochs << '|' << batch_size << '|' << lr_init << '|' << lr_final << '|' << beta1 << '|'
       << beta2 << '|' << adam_eps << '|' << lambda1 << '|' << lambda2 << '|' << crop << '|'
       << seed << '|' << clip_norm << '|' << network.base_channels_lan << '|'
       << network.base_channels_crn << '|' << network.lan_stages << '|'
       << network.crn_wavelet_levels << '|' << network.rcabs_per_level << '|'
       << network.swin_blocks_per_glab;
    const std::string s = os.str();
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double lr_at(long step, long total_steps, const TrainConfig& cfg) {
    if (total_steps < 1) return cfg.lr_init;
    const long s = std::clamp(step, 0L, total_steps);
    const double progress = static_cast<double>(s) / static_cast<double>(total_steps);
    return cfg.lr_final +
           0.5 * (cfg.lr_init - cfg.lr_final) * (1.0 + std::cos(progress * 3.14159265358979323846));
}

void AdamOptimizer::step(ParamRegistry& reg, double lr, double clip_norm) {
    // Global-norm clip across every gradient before the update.
    double sq = 0.0;
    for (auto& [name, p] : reg.params()) {
        const double* g = p.grad_data();
        if (!g) continue;
        for (long i = 0; i < p.numel(); ++i) {
            if (!std::isfinite(g[i]))
                throw std::runtime_error("adam: non-finite gradient in '" + name + "'");
            sq += g[i] * g[i];
        }
    }
    const double norm = std::sqrt(sq);
    const double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;

    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (auto& [name, p] : reg.params()) {
        auto& m = m_[name];
        auto& v = v_[name];
        if (m.empty()) m.assign(static_cast<size_t>(p.numel()), 0.0);
        if (v.empty()) v.assign(static_cast<size_t>(p.numel()), 0.0);
        const double* g = p.grad_data();
        double* val = p.data();
        for (long i = 0; i < p.numel(); ++i) {
            const double gi = g ? g[i] * scale : 0.0;
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * gi;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            val[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

TrainState init_train_state(const TrainConfig& cfg, long total_steps) {
    cfg.validate();
    TrainState state;
    state.cfg = cfg;
    state.total_steps = total_steps;
    state.net = std::make_unique<LcdbNet>(cfg.network, cfg.seed);
    state.adam = std::make_unique<AdamOptimizer>(cfg.beta1, cfg.beta2, cfg.adam_eps);
    return state;
}

Tensor rgb_batch_to_unit_ycc(const Tensor& rgb) {
    const auto& s = rgb.shape();
    if (s.size() != 4 || s[1] != 3)
        throw std::invalid_argument("rgb_batch_to_unit_ycc: expected (N,3,H,W)");
    const long n = s[0], hw = s[2] * s[3];
    Tensor out = Tensor::zeros(s);
    const double* in = rgb.data();
    double* dst = out.data();
    for (long b = 0; b < n; ++b) {
        const double* r = in + (b * 3 + 0) * hw;
        const double* g = in + (b * 3 + 1) * hw;
        const double* bl = in + (b * 3 + 2) * hw;
        double* y = dst + (b * 3 + 0) * hw;
        double* cb = dst + (b * 3 + 1) * hw;
        double* cr = dst + (b * 3 + 2) * hw;
        for (long i = 0; i < hw; ++i) {
            const double rv = r[i], gv = g[i], bv = bl[i];
            y[i] = kRgbToYcc[0][0] * rv + kRgbToYcc[0][1] * gv + kRgbToYcc[0][2] * bv;
            const double cbv = kRgbToYcc[1][0] * rv + kRgbToYcc[1][1] * gv + kRgbToYcc[1][2] * bv;
            const double crv = kRgbToYcc[2][0] * rv + kRgbToYcc[2][1] * gv + kRgbToYcc[2][2] * bv;
            cb[i] = cbv / (2.0 * kCbHalfRange) + 0.5;
            cr[i] = crv / (2.0 * kCrHalfRange) + 0.5;
        }
    }
    return out;
}

LossBreakdown train_step(TrainState& state, const Batch& batch) {
    const Tensor x = rgb_batch_to_unit_ycc(batch.low);
    const Tensor ref = rgb_batch_to_unit_ycc(batch.ref);
    ModelOutputs out = state.net->forward(x);
    LossBreakdown lb = joint_loss(out.sm_lum, out.sm_chrom, out.enhanced_ycc, ref,
                                  state.cfg.lambda1, state.cfg.lambda2);
    const struct {
        const char* name;
        double value;
    } terms[] = {{"lan.charbonnier", lb.lan.charbonnier}, {"lan.ssim", lb.lan.ssim_loss},
                 {"crn.charbonnier", lb.crn.charbonnier}, {"crn.ssim", lb.crn.ssim_loss},
                 {"main.charbonnier", lb.main.charbonnier}, {"main.ssim", lb.main.ssim_loss}};
    for (const auto& t : terms)
        if (!std::isfinite(t.value))
            throw std::runtime_error(std::string("train_step: non-finite loss term '") + t.name +
                                     "' at step " + std::to_string(state.step));

    state.net->params().zero_grads();
    lb.total.backward();
    const double lr = lr_at(state.step, state.total_steps, state.cfg);
    state.adam->step(state.net->params(), lr, state.cfg.clip_norm);
    ++state.step;
    return lb;
}

Checkpoint snapshot(const TrainState& state) {
    Checkpoint ckpt;
    ckpt.network_config = state.cfg.network;
    ckpt.train_config_digest = state.cfg.digest();
    ckpt.step = state.step;
    ckpt.seed = state.cfg.seed;
    ckpt.best_psnr = state.best_psnr;
    ckpt.best_ssim = state.best_ssim;
    store_parameters(state.net->params(), ckpt);
    for (const auto& [name, p] : state.net->params().params()) {
        auto it_m = state.adam->m().find(name);
        auto it_v = state.adam->v().find(name);
        if (it_m == state.adam->m().end() || it_v == state.adam->v().end()) continue;
        Checkpoint::Array m{p.shape(), std::vector<float>(it_m->second.begin(), it_m->second.end())};
        Checkpoint::Array v{p.shape(), std::vector<float>(it_v->second.begin(), it_v->second.end())};
        ckpt.adam_m.emplace(name, std::move(m));
        ckpt.adam_v.emplace(name, std::move(v));
    }
    return ckpt;
}

void restore(TrainState& state, const Checkpoint& ckpt) {
    load_into(ckpt, state.net->params());
    state.step = ckpt.step;
    state.best_psnr = ckpt.best_psnr;
    state.best_ssim = ckpt.best_ssim;
    state.adam->set_t(ckpt.step);
    state.adam->m().clear();
    state.adam->v().clear();
    for (const auto& [name, arr] : ckpt.adam_m)
        state.adam->m()[name].assign(arr.data.begin(), arr.data.end());
    for (const auto& [name, arr] : ckpt.adam_v)
        state.adam->v()[name].assign(arr.data.begin(), arr.data.end());
}

namespace {

void emit(const std::function<void(const std::string&)>& log, const std::string& line) {
    if (log) log(line);
}

uint64_t epoch_seed_for(uint64_t base_seed, long epoch) {
    return splitmix64(base_seed + static_cast<uint64_t>(epoch) + 1);
}

}  // namespace

Checkpoint train(const TrainConfig& cfg, const std::string& dataset_root,
                 const std::string& out_dir, const std::string& eval_root,
                 const std::function<void(const std::string&)>& log) {
    cfg.validate();
    const auto dataset = scan_dataset(dataset_root);
    if (dataset.empty()) throw std::runtime_error("train: no samples in " + dataset_root);
    const long n = static_cast<long>(dataset.size());
    const long steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const long total_steps = cfg.epochs * steps_per_epoch;

    fs::create_directories(out_dir);
    TrainState state = init_train_state(cfg, total_steps);

    const std::string latest_path = (fs::path(out_dir) / "latest.lcdb").string();
    const std::string best_path = (fs::path(out_dir) / "best.lcdb").string();
    if (fs::exists(latest_path)) {
        Checkpoint resume = load_checkpoint(latest_path);
        if (resume.train_config_digest != cfg.digest())
            throw std::runtime_error("train: " + latest_path +
                                     " was produced by a different configuration");
        restore(state, resume);
        emit(log, "resumed from " + latest_path + " at step " + std::to_string(state.step));
    }

    std::ofstream log_file(fs::path(out_dir) / "train_log.txt", std::ios::app);
    auto record = [&](const std::string& line) {
        log_file << line << '\n';
        log_file.flush();
        emit(log, line);
    };

    for (long epoch = state.step / steps_per_epoch; epoch < cfg.epochs; ++epoch) {
        const uint64_t epoch_seed = epoch_seed_for(cfg.seed, epoch);
        const auto order = shuffle_indices(n, epoch_seed);
        const auto batches = batch_indices(order, cfg.batch_size);
        for (long b = 0; b < static_cast<long>(batches.size()); ++b) {
            const long global_step = epoch * steps_per_epoch + b;
            if (global_step < state.step) continue;  // already done before resume
            const Batch batch = make_batch(dataset, batches[b], epoch_seed, cfg.crop);
            const double lr = lr_at(state.step, total_steps, cfg);
            const LossBreakdown lb = train_step(state, batch);
            {
                std::ostringstream os;
                os << "step=" << state.step << " epoch=" << epoch << " lr=" << lr
                   << " total=" << lb.total_value() << " lan=" << lb.lan.value()
                   << " crn=" << lb.crn.value() << " main=" << lb.main.value();
                record(os.str());
            }
            if (cfg.eval_every > 0 && !eval_root.empty() && state.step % cfg.eval_every == 0) {
                const MetricReport report = evaluate_model(*state.net, eval_root);
                std::ostringstream os;
                os << "eval step=" << state.step << " psnr=" << report.psnr_db
                   << " ssim=" << report.ssim;
                record(os.str());
                if (report.psnr_db > state.best_psnr) {
                    state.best_psnr = report.psnr_db;
                    state.best_ssim = report.ssim;
                    save_checkpoint(snapshot(state), best_path);
                }
            }
            if (cfg.checkpoint_every > 0 && state.step % cfg.checkpoint_every == 0)
                save_checkpoint(snapshot(state), latest_path);
            if (cfg.stop_after_steps > 0 && state.step >= cfg.stop_after_steps) {
                Checkpoint partial = snapshot(state);
                save_checkpoint(partial, latest_path);
                emit(log, "stopping after " + std::to_string(state.step) + " steps");
                return partial;
            }
        }
    }

    Checkpoint final = snapshot(state);
    save_checkpoint(final, latest_path);
    return final;
}

MetricReport evaluate_model(const LcdbNet& net, const std::string& dataset_root) {
    MetricReport report;
    for (const auto& desc : scan_dataset(dataset_root)) {
        const PairedSample sample = load_pair(desc);
        const RgbImage pred = net.enhance(sample.low);
        const PairMetrics pm = evaluate_pair(pred, sample.ref);
        report.per_image.push_back({sample.name, pm.psnr_db, pm.ssim});
    }
    report.recompute_means();
    return report;
}

MetricReport evaluate_checkpoint(const std::string& ckpt_path, const std::string& dataset_root) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    LcdbNet net(ckpt.network_config, ckpt.seed);
    load_into(ckpt, net.params());
    return evaluate_model(net, dataset_root);
}

}  // namespace lcdb
