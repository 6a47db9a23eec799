#include "lcdb/run_config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lcdb {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

long to_long(const std::string& key, const std::string& v) {
    size_t pos = 0;
    long out = 0;
    try {
        out = std::stol(v, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != v.size()) throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != v.size()) throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: '" + key + "' expects a boolean, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"epochs", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.epochs = to_long(k, v); }},
        {"batch_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.batch_size = to_long(k, v); }},
        {"lr_init", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.lr_init = to_double(k, v); }},
        {"lr_final", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.lr_final = to_double(k, v); }},
        {"beta1", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.beta1 = to_double(k, v); }},
        {"beta2", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.beta2 = to_double(k, v); }},
        {"adam_eps", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.adam_eps = to_double(k, v); }},
        {"lambda1", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.lambda1 = to_double(k, v); }},
        {"lambda2", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.lambda2 = to_double(k, v); }},
        {"crop", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.crop = to_long(k, v); }},
        {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.seed = static_cast<uint64_t>(to_long(k, v)); }},
        {"eval_every", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.eval_every = to_long(k, v); }},
        {"checkpoint_every", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.checkpoint_every = to_long(k, v); }},
        {"clip_norm", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.clip_norm = to_double(k, v); }},
        {"base_channels_lan", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.base_channels_lan = to_long(k, v); }},
        {"base_channels_crn", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.base_channels_crn = to_long(k, v); }},
        {"lan_stages", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.lan_stages = static_cast<int>(to_long(k, v)); }},
        {"crn_wavelet_levels", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.crn_wavelet_levels = static_cast<int>(to_long(k, v)); }},
        {"rcabs_per_level", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.rcabs_per_level = static_cast<int>(to_long(k, v)); }},
        {"fn_channels", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.fn_channels = to_long(k, v); }},
        {"fn_conv_layers", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.fn_conv_layers = static_cast<int>(to_long(k, v)); }},
        {"window", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.window = to_long(k, v); }},
        {"heads_divisor", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.heads_divisor = to_long(k, v); }},
        {"reduction", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.reduction = to_long(k, v); }},
        {"swin_blocks_per_glab", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.swin_blocks_per_glab = static_cast<int>(to_long(k, v)); }},
        {"no_lan", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.no_lan = to_bool(k, v); }},
        {"no_crn", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.no_crn = to_bool(k, v); }},
        {"no_fn", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.no_fn = to_bool(k, v); }},
        {"no_swin", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.no_swin = to_bool(k, v); }},
        {"no_dacb", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.network.no_dacb = to_bool(k, v); }},
        {"data_root", [](RunConfig& c, const std::string&, const std::string& v) { c.data_root = v; }},
        {"eval_root", [](RunConfig& c, const std::string&, const std::string& v) { c.eval_root = v; }},
        {"out_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
    };
    return table;
}

}  // namespace

void RunConfig::validate() const { train.validate(); }

RunConfig parse_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    const auto& table = setters();
    std::vector<std::string> unknown, malformed;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            malformed.push_back("line " + std::to_string(lineno) + ": '" + line + "'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = table.find(key);
        if (it == table.end()) {
            unknown.push_back(key);
            continue;
        }
        it->second(base, key, value);
    }
    if (!unknown.empty() || !malformed.empty()) {
        std::ostringstream os;
        os << "config: invalid entries in " << path;
        for (const auto& k : unknown) os << "\n  unknown key: " << k;
        for (const auto& m : malformed) os << "\n  malformed " << m;
        throw std::invalid_argument(os.str());
    }
    return base;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override: expected key=value, got '" + assignment + "'");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const auto& table = setters();
    auto it = table.find(key);
    if (it == table.end()) throw std::invalid_argument("override: unknown key '" + key + "'");
    it->second(cfg, key, value);
}

void apply_ablation(NetworkConfig& cfg, const std::string& name) {
    if (name == "no_lan") cfg.no_lan = true;
    else if (name == "no_crn") cfg.no_crn = true;
    else if (name == "no_fn") cfg.no_fn = true;
    else if (name == "no_swin") cfg.no_swin = true;
    else if (name == "no_dacb") cfg.no_dacb = true;
    else throw std::invalid_argument("ablate: unknown variant '" + name + "'");
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) keys.push_back(k);
    return keys;
}

std::string describe(const RunConfig& cfg) {
    std::ostringstream os;
    const auto& t = cfg.train;
    const auto& n = t.network;
    os << "epochs=" << t.epochs << "\nbatch_size=" << t.batch_size << "\nlr_init=" << t.lr_init
       << "\nlr_final=" << t.lr_final << "\nbeta1=" << t.beta1 << "\nbeta2=" << t.beta2
       << "\nadam_eps=" << t.adam_eps << "\nlambda1=" << t.lambda1 << "\nlambda2=" << t.lambda2
       << "\ncrop=" << t.crop << "\nseed=" << t.seed << "\neval_every=" << t.eval_every
       << "\ncheckpoint_every=" << t.checkpoint_every << "\nclip_norm=" << t.clip_norm
       << "\nbase_channels_lan=" << n.base_channels_lan << "\nbase_channels_crn="
       << n.base_channels_crn << "\nlan_stages=" << n.lan_stages << "\ncrn_wavelet_levels="
       << n.crn_wavelet_levels << "\nrcabs_per_level=" << n.rcabs_per_level << "\nfn_channels="
       << n.fn_channels << "\nfn_conv_layers=" << n.fn_conv_layers << "\nwindow=" << n.window
       << "\nheads_divisor=" << n.heads_divisor << "\nreduction=" << n.reduction
       << "\nswin_blocks_per_glab=" << n.swin_blocks_per_glab << "\nno_lan=" << n.no_lan
       << "\nno_crn=" << n.no_crn << "\nno_fn=" << n.no_fn << "\nno_swin=" << n.no_swin
       << "\nno_dacb=" << n.no_dacb << "\ndata_root=" << cfg.data_root << "\neval_root="
       << cfg.eval_root << "\nout_dir=" << cfg.out_dir << "\n";
    return os.str();
}

}  // namespace lcdb
