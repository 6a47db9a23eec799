#pragma once

#include "lcdb/colorspace.hpp"
#include "lcdb/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lcdb {

struct PairDescriptor {
    std::string low_path;
    std::string high_path;
    std::string name;
};

struct PairedSample {
    RgbImage low;
    RgbImage ref;
    std::string name;
};

struct Batch {
    Tensor low;  // (N,3,h,w) RGB in [0,1]
    Tensor ref;
    std::vector<std::string> names;
};

// Geometric augmentation parameters; identical for low and ref.
struct AugmentParams {
    long y0 = 0, x0 = 0;  // crop origin
    bool hflip = false;
    int rot_quarters = 0;  // k * 90 degrees, k in {0,1,2,3}
};

// Expects <root>/low/*.png and <root>/high/*.png with matching filenames.
// Deterministic (sorted) listing; an orphan file is an error naming it.
std::vector<PairDescriptor> scan_dataset(const std::string& root);

PairedSample load_pair(const PairDescriptor& desc);

// Randomness derived purely from seed (splitmix64 stream).
AugmentParams draw_augment_params(uint64_t seed, long h, long w, long crop);
RgbImage apply_augment(const RgbImage& img, const AugmentParams& p, long crop);
PairedSample augment(const PairedSample& sample, uint64_t seed, long crop = 128);

// Per-sample augmentation seed: independent of loader ordering.
uint64_t sample_seed(uint64_t epoch_seed, long index);

// Epoch-seeded permutation of [0,n).
std::vector<long> shuffle_indices(long n, uint64_t epoch_seed);

// Ceiling-division batching of the given order; the final batch may be
// partial. Samples are loaded, augmented with sample_seed(epoch_seed, index),
// and stacked as RGB tensors.
std::vector<std::vector<long>> batch_indices(const std::vector<long>& order, long batch_size);
Batch make_batch(const std::vector<PairDescriptor>& dataset, const std::vector<long>& indices,
                 uint64_t epoch_seed, long crop);

}  // namespace lcdb
