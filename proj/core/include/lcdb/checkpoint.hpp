#pragma once

#include "lcdb/networks.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lcdb {

// On-disk model state: "LCDB" magic, version, a UTF-8 JSON metadata block and
// a float32 little-endian payload, FNV-1a checksummed. Entries are sorted by
// name so identical state serializes to identical bytes.
struct Checkpoint {
    static constexpr uint32_t kFormatVersion = 1;

    NetworkConfig network_config;
    std::string train_config_digest;
    long step = 0;
    uint64_t seed = 0;
    double best_psnr = 0.0;
    double best_ssim = 0.0;

    struct Array {
        std::vector<long> shape;
        std::vector<float> data;
    };
    std::map<std::string, Array> parameters;
    // Adam moments keyed by parameter name; empty for inference-only files.
    std::map<std::string, Array> adam_m;
    std::map<std::string, Array> adam_v;
    bool has_optimizer() const { return !adam_m.empty(); }
};

// Atomic write (temp file + rename in the same directory).
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Copy registry values (double -> float32) into / out of a checkpoint.
// load_into throws listing missing/unexpected names.
void store_parameters(const ParamRegistry& reg, Checkpoint& ckpt);
void load_into(const Checkpoint& ckpt, ParamRegistry& reg);

}  // namespace lcdb
