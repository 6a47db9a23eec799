#pragma once

#include "lcdb/checkpoint.hpp"
#include "lcdb/data.hpp"
#include "lcdb/losses.hpp"
#include "lcdb/metrics.hpp"
#include "lcdb/networks.hpp"

#include <functional>
#include <map>
#include <string>

namespace lcdb {

struct TrainConfig {
    long epochs = 2000;
    long batch_size = 8;
    double lr_init = 1e-4;
    double lr_final = 1e-6;
    double beta1 = 0.9;   // Adam moment decays
    double beta2 = 0.99;
    double adam_eps = 1e-8;
    double lambda1 = 0.1;
    double lambda2 = 0.1;
    long crop = 128;
    uint64_t seed = 0;
    long eval_every = 0;        // steps; 0 disables periodic evaluation
    long checkpoint_every = 50; // steps
    double clip_norm = 1.0;     // global-norm gradient clip; <=0 disables
    // Stop (checkpointing) once this many global steps are done; 0 runs to
    // completion. Simulates interruption for resume testing and budgeted runs.
    long stop_after_steps = 0;
    NetworkConfig network;

    void validate() const;
    std::string digest() const;
};

// Single-cycle cosine annealing between the configured endpoints.
double lr_at(long step, long total_steps, const TrainConfig& cfg);

// Standard bias-corrected Adam over a parameter registry.
class AdamOptimizer {
public:
    AdamOptimizer(double beta1, double beta2, double eps)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(ParamRegistry& reg, double lr, double clip_norm);
    long t() const { return t_; }

    std::map<std::string, std::vector<double>>& m() { return m_; }
    std::map<std::string, std::vector<double>>& v() { return v_; }
    void set_t(long t) { t_ = t; }

private:
    double beta1_, beta2_, eps_;
    long t_ = 0;
    std::map<std::string, std::vector<double>> m_, v_;
};

struct TrainState {
    std::unique_ptr<LcdbNet> net;
    std::unique_ptr<AdamOptimizer> adam;
    long step = 0;
    long total_steps = 0;
    double best_psnr = 0.0;
    double best_ssim = 0.0;
    TrainConfig cfg;
};

TrainState init_train_state(const TrainConfig& cfg, long total_steps);

// Unit-normalized YCbCr planes from an RGB batch tensor (N,3,H,W).
Tensor rgb_batch_to_unit_ycc(const Tensor& rgb);

// One optimizer step; throws on non-finite loss or gradients.
LossBreakdown train_step(TrainState& state, const Batch& batch);

// Full loop: epoch shuffling, per-step logs, periodic eval/checkpointing,
// resume from <out_dir>/latest.lcdb when present. log receives one line per
// step.
Checkpoint train(const TrainConfig& cfg, const std::string& dataset_root,
                 const std::string& out_dir, const std::string& eval_root = "",
                 const std::function<void(const std::string&)>& log = {});

MetricReport evaluate_model(const LcdbNet& net, const std::string& dataset_root);
MetricReport evaluate_checkpoint(const std::string& ckpt_path, const std::string& dataset_root);

Checkpoint snapshot(const TrainState& state);
void restore(TrainState& state, const Checkpoint& ckpt);

}  // namespace lcdb
