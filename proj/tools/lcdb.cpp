// lcdb: command-line front end for the enhancement library.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 runtime error.

#include <CLI11.hpp>

#include "lcdb/checkpoint.hpp"
#include "lcdb/colorspace.hpp"
#include "lcdb/data.hpp"
#include "lcdb/networks.hpp"
#include "lcdb/run_config.hpp"
#include "lcdb/training.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace lcdb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::vector<std::string> ablations;
    long seed = -1;
    std::string out;
};

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg;
    if (const char* env = std::getenv("LCDB_DATA_ROOT")) cfg.data_root = env;
    if (!args.config_path.empty()) cfg = parse_config_file(args.config_path, cfg);
    for (const auto& o : args.overrides) apply_override(cfg, o);
    for (const auto& a : args.ablations) apply_ablation(cfg.train.network, a);
    if (args.seed >= 0) cfg.train.seed = static_cast<uint64_t>(args.seed);
    if (!args.out.empty()) cfg.out_dir = args.out;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key=value config file");
    cmd->add_option("--set,--override", args.overrides, "config override, key=value (repeatable)");
    cmd->add_option("--ablate", args.ablations,
                    "disable a component: no_lan, no_crn, no_fn, no_swin, no_dacb")
        ->check(CLI::IsMember({"no_lan", "no_crn", "no_fn", "no_swin", "no_dacb"}));
    cmd->add_option("--seed", args.seed, "RNG seed");
    cmd->add_option("--out", args.out, "output directory");
}

std::vector<std::string> list_pngs(const std::string& input) {
    std::vector<std::string> files;
    if (fs::is_directory(input)) {
        for (const auto& e : fs::directory_iterator(input))
            if (e.is_regular_file() && e.path().extension() == ".png")
                files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(input);
    }
    return files;
}

double unit_from_signed(double v, double half_range) { return v / (2.0 * half_range) + 0.5; }

int cmd_train(const CommonArgs& args) {
    RunConfig cfg = resolve_config(args);
    cfg.validate();
    if (cfg.data_root.empty()) {
        std::cerr << "train: no data_root configured (config key, --override, or LCDB_DATA_ROOT)\n";
        return kExitUsage;
    }
    train(cfg.train, cfg.data_root, cfg.out_dir, cfg.eval_root,
          [](const std::string& line) { std::cout << line << '\n'; });
    std::cout << "training complete; checkpoints in " << cfg.out_dir << '\n';
    return kExitOk;
}

int cmd_enhance(const std::string& ckpt_path, const std::string& input, const std::string& out_dir) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    LcdbNet net(ckpt.network_config, ckpt.seed);
    load_into(ckpt, net.params());

    fs::create_directories(out_dir);
    const auto files = list_pngs(input);
    if (files.empty()) {
        std::cerr << "enhance: no .png inputs under " << input << '\n';
        return kExitData;
    }
    long failures = 0;
    for (const auto& file : files) {
        try {
            const RgbImage img = read_png(file);
            const auto t0 = std::chrono::steady_clock::now();
            const RgbImage out = net.enhance(img);
            const auto t1 = std::chrono::steady_clock::now();
            const std::string dst = (fs::path(out_dir) / fs::path(file).filename()).string();
            write_png(dst, out);
            const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            std::cout << fs::path(file).filename().string() << " " << img.w << "x" << img.h
                      << " " << ms << " ms\n";
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping " << file << ": " << e.what() << '\n';
            ++failures;
        }
    }
    std::cout << (static_cast<long>(files.size()) - failures) << "/" << files.size()
              << " images enhanced\n";
    return failures == static_cast<long>(files.size()) ? kExitData : kExitOk;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& dataset_root,
                 const std::string& report_path) {
    const MetricReport report = evaluate_checkpoint(ckpt_path, dataset_root);
    std::ofstream text(report_path);
    if (!text) {
        std::cerr << "evaluate: cannot write " << report_path << '\n';
        return kExitData;
    }
    text << report.to_text();
    std::ofstream json(report_path + ".json");
    json << report.to_json() << '\n';
    std::cout << report.to_text();
    return kExitOk;
}

int cmd_decompose(const std::string& input, const std::string& out_dir) {
    const RgbImage img = read_png(input);
    const YccImage ycc = rgb_to_ycc(img);
    fs::create_directories(out_dir);
    const std::string stem = fs::path(input).stem().string();
    auto path = [&](const char* suffix) {
        return (fs::path(out_dir) / (stem + "_" + suffix + ".png")).string();
    };

    Plane channel(img.h, img.w);
    for (int c = 0; c < 3; ++c) {
        for (long i = 0; i < img.h * img.w; ++i) channel.v[i] = img.v[i * 3 + c];
        write_png_gray(path(c == 0 ? "r" : c == 1 ? "g" : "b"), channel);
    }
    // Y/Cb/Cr are stored at 16 bits so the decomposition recombines to the
    // source within one 8-bit code value; 8-bit chroma would not survive the
    // inverse transform's amplification of quantization error.
    write_png_gray16(path("y"), ycc.y);
    // Chroma rendered via the unit remap: 0.5 is neutral gray.
    Plane chroma(img.h, img.w);
    for (long i = 0; i < img.h * img.w; ++i)
        chroma.v[i] = unit_from_signed(ycc.cb.v[i], kCbHalfRange);
    write_png_gray16(path("cb"), chroma);
    for (long i = 0; i < img.h * img.w; ++i)
        chroma.v[i] = unit_from_signed(ycc.cr.v[i], kCrHalfRange);
    write_png_gray16(path("cr"), chroma);
    write_png(path("original"), img);
    std::cout << "wrote 7 files to " << out_dir << '\n';
    return kExitOk;
}

int cmd_info(const CommonArgs& args) {
    RunConfig cfg = resolve_config(args);
    cfg.train.network.validate();
    std::cout << describe(cfg);
    LcdbNet net(cfg.train.network, cfg.train.seed);
    std::cout << "parameters=" << net.params().count_parameters() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-light image enhancement: train, enhance, evaluate, decompose"};
    app.require_subcommand(1);

    CommonArgs train_args, info_args;
    std::string ckpt_path, input, output, dataset_root, report_path;

    auto* train_cmd = app.add_subcommand("train", "Train a model");
    add_common(train_cmd, train_args);

    auto* enhance_cmd = app.add_subcommand("enhance", "Enhance PNG images with a checkpoint");
    enhance_cmd->add_option("checkpoint", ckpt_path, "model checkpoint (.lcdb)")->required();
    enhance_cmd->add_option("input", input, "input .png file or directory")->required();
    enhance_cmd->add_option("--out", output, "output directory")->required();

    auto* eval_cmd = app.add_subcommand("evaluate", "Compute PSNR/SSIM on a paired dataset");
    eval_cmd->add_option("checkpoint", ckpt_path, "model checkpoint (.lcdb)")->required();
    eval_cmd->add_option("dataset", dataset_root, "dataset root with low/ and high/")->required();
    eval_cmd->add_option("--report", report_path, "report path (text; JSON written alongside)")
        ->required();

    auto* dec_cmd = app.add_subcommand("decompose", "Write R,G,B,Y,Cb,Cr channel maps + original");
    dec_cmd->add_option("input", input, "input .png file")->required();
    dec_cmd->add_option("--out", output, "output directory")->required();

    auto* info_cmd = app.add_subcommand("info", "Print resolved config and parameter count");
    add_common(info_cmd, info_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (enhance_cmd->parsed()) return cmd_enhance(ckpt_path, input, output);
        if (eval_cmd->parsed()) return cmd_evaluate(ckpt_path, dataset_root, report_path);
        if (dec_cmd->parsed()) return cmd_decompose(input, output);
        if (info_cmd->parsed()) return cmd_info(info_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        std::cerr << "error: " << msg << '\n';
        const bool data = msg.find("cannot open") != std::string::npos ||
                          msg.find("no samples") != std::string::npos ||
                          msg.find("missing") != std::string::npos ||
                          msg.find("orphan") != std::string::npos;
        return data ? kExitData : kExitRuntime;
    }
    return kExitUsage;
}
