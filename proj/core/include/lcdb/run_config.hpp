#pragma once

#include "lcdb/training.hpp"

#include <string>
#include <vector>

namespace lcdb {

// Merged run settings: training hyper-parameters, network shape, and paths.
// Precedence: command-line override > config file > built-in defaults.
struct RunConfig {
    TrainConfig train;  // defaults are the reference recipe
    std::string data_root;
    std::string eval_root;
    std::string out_dir = "runs/default";

    void validate() const;
};

// Parses a "key = value" file ('#' starts a comment, blank lines ignored).
// Every unknown key is collected and reported in a single error.
RunConfig parse_config_file(const std::string& path, RunConfig base = {});

// Applies one "key=value" override; throws naming the key when unknown.
void apply_override(RunConfig& cfg, const std::string& assignment);

// Enables one ablation switch: no_lan, no_crn, no_fn, no_swin, no_dacb.
void apply_ablation(NetworkConfig& cfg, const std::string& name);

// All recognized config keys, for diagnostics.
std::vector<std::string> config_keys();

std::string describe(const RunConfig& cfg);

}  // namespace lcdb
