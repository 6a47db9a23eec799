#include "lcdb/checkpoint.hpp"

#include <json.hpp>

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace lcdb {

namespace {

constexpr char kMagic[4] = {'L', 'C', 'D', 'B'};

uint64_t fnv1a(const unsigned char* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    for (size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

void put_u32(std::string& s, uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& s, uint64_t v) {
    for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
uint32_t get_u32(const unsigned char* p) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    return v;
}
uint64_t get_u64(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

// float32 <-> little-endian bytes, independent of host byte order.
void append_f32le(std::string& s, float f) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    put_u32(s, u);
}
float read_f32le(const unsigned char* p) {
    uint32_t u = get_u32(p);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

nlohmann::json config_to_json(const NetworkConfig& c) {
    return {{"base_channels_lan", c.base_channels_lan},
            {"base_channels_crn", c.base_channels_crn},
            {"lan_stages", c.lan_stages},
            {"crn_wavelet_levels", c.crn_wavelet_levels},
            {"rcabs_per_level", c.rcabs_per_level},
            {"fn_channels", c.fn_channels},
            {"fn_conv_layers", c.fn_conv_layers},
            {"window", c.window},
            {"heads_divisor", c.heads_divisor},
            {"reduction", c.reduction},
            {"swin_blocks_per_glab", c.swin_blocks_per_glab},
            {"no_lan", c.no_lan},
            {"no_crn", c.no_crn},
            {"no_fn", c.no_fn},
            {"no_swin", c.no_swin},
            {"no_dacb", c.no_dacb}};
}

NetworkConfig config_from_json(const nlohmann::json& j) {
    NetworkConfig c;
    c.base_channels_lan = j.at("base_channels_lan");
    c.base_channels_crn = j.at("base_channels_crn");
    c.lan_stages = j.at("lan_stages");
    c.crn_wavelet_levels = j.at("crn_wavelet_levels");
    c.rcabs_per_level = j.at("rcabs_per_level");
    c.fn_channels = j.at("fn_channels");
    c.fn_conv_layers = j.at("fn_conv_layers");
    c.window = j.at("window");
    c.heads_divisor = j.at("heads_divisor");
    c.reduction = j.at("reduction");
    c.swin_blocks_per_glab = j.at("swin_blocks_per_glab");
    c.no_lan = j.at("no_lan");
    c.no_crn = j.at("no_crn");
    c.no_fn = j.at("no_fn");
    c.no_swin = j.at("no_swin");
    c.no_dacb = j.at("no_dacb");
    return c;
}

void append_section(nlohmann::json& meta, std::string& payload, const char* key,
                    const std::map<std::string, Checkpoint::Array>& arrays) {
    auto& sec = meta[key] = nlohmann::json::array();
    for (const auto& [name, arr] : arrays) {  // std::map: sorted by name
        sec.push_back({{"name", name},
                       {"dtype", "f32"},
                       {"shape", arr.shape},
                       {"offset", payload.size()}});
        for (float f : arr.data) append_f32le(payload, f);
    }
}

std::map<std::string, Checkpoint::Array> read_section(const nlohmann::json& meta,
                                                      const char* key,
                                                      const unsigned char* payload,
                                                      size_t payload_len) {
    std::map<std::string, Checkpoint::Array> out;
    if (!meta.contains(key)) return out;
    for (const auto& e : meta.at(key)) {
        Checkpoint::Array arr;
        arr.shape = e.at("shape").get<std::vector<long>>();
        long n = 1;
        for (long d : arr.shape) n *= d;
        const size_t off = e.at("offset");
        if (off + 4 * static_cast<size_t>(n) > payload_len)
            throw std::runtime_error("checkpoint: payload truncated");
        arr.data.resize(n);
        for (long i = 0; i < n; ++i) arr.data[i] = read_f32le(payload + off + 4 * i);
        out.emplace(e.at("name").get<std::string>(), std::move(arr));
    }
    return out;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    nlohmann::json meta;
    meta["format_version"] = Checkpoint::kFormatVersion;
    meta["network_config"] = config_to_json(ckpt.network_config);
    meta["train_config_digest"] = ckpt.train_config_digest;
    meta["step"] = ckpt.step;
    meta["seed"] = ckpt.seed;
    meta["best_psnr"] = ckpt.best_psnr;
    meta["best_ssim"] = ckpt.best_ssim;

    std::string payload;
    append_section(meta, payload, "parameters", ckpt.parameters);
    if (ckpt.has_optimizer()) {
        append_section(meta, payload, "adam_m", ckpt.adam_m);
        append_section(meta, payload, "adam_v", ckpt.adam_v);
    }
    const std::string json = meta.dump();

    uint64_t sum = fnv1a(reinterpret_cast<const unsigned char*>(json.data()), json.size());
    sum = fnv1a(reinterpret_cast<const unsigned char*>(payload.data()), payload.size(), sum);

    std::string blob;
    blob.append(kMagic, 4);
    put_u32(blob, Checkpoint::kFormatVersion);
    put_u64(blob, json.size());
    put_u64(blob, payload.size());
    put_u64(blob, sum);
    blob += json;
    blob += payload;

    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("save_checkpoint: cannot open " + tmp.string());
        f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
        if (!f) throw std::runtime_error("save_checkpoint: write failure " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::vector<unsigned char> blob((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    if (blob.size() < 32 || std::memcmp(blob.data(), kMagic, 4) != 0)
        throw std::runtime_error("load_checkpoint: not an LCDB file: " + path);
    const uint32_t version = get_u32(blob.data() + 4);
    if (version != Checkpoint::kFormatVersion)
        throw std::runtime_error("load_checkpoint: unsupported format version " +
                                 std::to_string(version));
    const uint64_t json_len = get_u64(blob.data() + 8);
    const uint64_t payload_len = get_u64(blob.data() + 16);
    const uint64_t stored_sum = get_u64(blob.data() + 24);
    if (blob.size() != 32 + json_len + payload_len)
        throw std::runtime_error("load_checkpoint: truncated file " + path);
    const unsigned char* json_p = blob.data() + 32;
    const unsigned char* payload_p = json_p + json_len;
    uint64_t sum = fnv1a(json_p, json_len);
    sum = fnv1a(payload_p, payload_len, sum);
    if (sum != stored_sum)
        throw std::runtime_error("load_checkpoint: checksum mismatch (integrity error) in " +
                                 path);

    const nlohmann::json meta =
        nlohmann::json::parse(json_p, json_p + json_len);
    Checkpoint ckpt;
    ckpt.network_config = config_from_json(meta.at("network_config"));
    ckpt.train_config_digest = meta.at("train_config_digest");
    ckpt.step = meta.at("step");
    ckpt.seed = meta.at("seed");
    ckpt.best_psnr = meta.at("best_psnr");
    ckpt.best_ssim = meta.at("best_ssim");
    ckpt.parameters = read_section(meta, "parameters", payload_p, payload_len);
    ckpt.adam_m = read_section(meta, "adam_m", payload_p, payload_len);
    ckpt.adam_v = read_section(meta, "adam_v", payload_p, payload_len);
    return ckpt;
}

void store_parameters(const ParamRegistry& reg, Checkpoint& ckpt) {
    ckpt.parameters.clear();
    for (const auto& [name, t] : reg.params()) {
        Checkpoint::Array arr;
        arr.shape = t.shape();
        arr.data.resize(t.numel());
        for (long i = 0; i < t.numel(); ++i) arr.data[i] = static_cast<float>(t.data()[i]);
        ckpt.parameters.emplace(name, std::move(arr));
    }
}

void load_into(const Checkpoint& ckpt, ParamRegistry& reg) {
    std::string missing, extra;
    for (const auto& [name, t] : reg.params())
        if (!ckpt.parameters.count(name)) missing += " " + name;
    for (const auto& [name, arr] : ckpt.parameters)
        if (!reg.params().count(name)) extra += " " + name;
    if (!missing.empty() || !extra.empty())
        throw std::runtime_error("load_into: parameter name mismatch; missing:[" + missing +
                                 " ] unexpected:[" + extra + " ]");
    for (auto& [name, t] : reg.params()) {
        const auto& arr = ckpt.parameters.at(name);
        if (arr.shape != t.shape())
            throw std::runtime_error("load_into: shape mismatch for " + name);
        for (long i = 0; i < t.numel(); ++i) t.data()[i] = arr.data[i];
    }
}

}  // namespace lcdb
