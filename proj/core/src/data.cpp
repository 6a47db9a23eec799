#include "lcdb/data.hpp"

#include "lcdb/nn.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <stdexcept>

namespace fs = std::filesystem;

namespace lcdb {

std::vector<PairDescriptor> scan_dataset(const std::string& root) {
    const fs::path low_dir = fs::path(root) / "low";
    const fs::path high_dir = fs::path(root) / "high";
    if (!fs::is_directory(low_dir) || !fs::is_directory(high_dir))
        throw std::runtime_error("scan_dataset: expected " + root + "/low and " + root +
                                 "/high directories");
    auto list_pngs = [](const fs::path& dir) {
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".png")
                names.push_back(e.path().filename().string());
        std::sort(names.begin(), names.end());
        return names;
    };
    const auto lows = list_pngs(low_dir);
    const auto highs = list_pngs(high_dir);
    for (const auto& n : lows)
        if (!std::binary_search(highs.begin(), highs.end(), n))
            throw std::runtime_error("scan_dataset: unpaired file low/" + n);
    for (const auto& n : highs)
        if (!std::binary_search(lows.begin(), lows.end(), n))
            throw std::runtime_error("scan_dataset: unpaired file high/" + n);
    std::vector<PairDescriptor> out;
    for (const auto& n : lows)
        out.push_back({(low_dir / n).string(), (high_dir / n).string(), n});
    return out;
}

PairedSample load_pair(const PairDescriptor& desc) {
    PairedSample s;
    s.low = read_png(desc.low_path);
    s.ref = read_png(desc.high_path);
    s.name = desc.name;
    if (s.low.h != s.ref.h || s.low.w != s.ref.w)
        throw std::runtime_error("load_pair: dimension mismatch for " + desc.name);
    return s;
}

uint64_t sample_seed(uint64_t epoch_seed, long index) {
    return splitmix64(splitmix64(epoch_seed) ^ static_cast<uint64_t>(index));
}

AugmentParams draw_augment_params(uint64_t seed, long h, long w, long crop) {
    AugmentParams p;
    uint64_t s = seed;
    auto next = [&s]() {
        s = splitmix64(s);
        return s;
    };
    const long max_y = std::max<long>(0, h - crop);
    const long max_x = std::max<long>(0, w - crop);
    p.y0 = max_y > 0 ? static_cast<long>(next() % (max_y + 1)) : 0;
    p.x0 = max_x > 0 ? static_cast<long>(next() % (max_x + 1)) : 0;
    p.hflip = (next() & 1) != 0;
    p.rot_quarters = static_cast<int>(next() % 4);
    return p;
}

RgbImage apply_augment(const RgbImage& img, const AugmentParams& p, long crop) {
    // Reflect-pad when the source is smaller than the crop.
    RgbImage src = img;
    if (img.h < crop || img.w < crop) {
        const long H = std::max(img.h, crop), W = std::max(img.w, crop);
        RgbImage padded(H, W);
        auto reflect = [](long i, long n) {
            if (n == 1) return 0L;
            const long period = 2 * n - 2;
            i = ((i % period) + period) % period;
            return i < n ? i : period - i;
        };
        for (long y = 0; y < H; ++y)
            for (long x = 0; x < W; ++x)
                for (int c = 0; c < 3; ++c)
                    padded.at(y, x, c) = img.at(reflect(y, img.h), reflect(x, img.w), c);
        src = std::move(padded);
    }
    RgbImage out(crop, crop);
    for (long y = 0; y < crop; ++y)
        for (long x = 0; x < crop; ++x) {
            // Invert the transform: output (y,x) <- rotate/flip of crop coords.
            long cy = y, cx = x;
            for (int k = 0; k < p.rot_quarters; ++k) {
                // inverse of a 90-degree CCW rotation
                const long ty = cx;
                const long tx = crop - 1 - cy;
                cy = ty;
                cx = tx;
            }
            if (p.hflip) cx = crop - 1 - cx;
            for (int c = 0; c < 3; ++c)
                out.at(y, x, c) = src.at(p.y0 + cy, p.x0 + cx, c);
        }
    return out;
}

PairedSample augment(const PairedSample& sample, uint64_t seed, long crop) {
    if (sample.low.h != sample.ref.h || sample.low.w != sample.ref.w)
        throw std::invalid_argument("augment: low/ref dimension mismatch");
    const AugmentParams p = draw_augment_params(seed, sample.low.h, sample.low.w, crop);
    return {apply_augment(sample.low, p, crop), apply_augment(sample.ref, p, crop),
            sample.name};
}

std::vector<long> shuffle_indices(long n, uint64_t epoch_seed) {
    std::vector<long> order(n);
    for (long i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(epoch_seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

std::vector<std::vector<long>> batch_indices(const std::vector<long>& order, long batch_size) {
    if (batch_size < 1) throw std::invalid_argument("batch_indices: batch_size must be >= 1");
    std::vector<std::vector<long>> out;
    for (size_t i = 0; i < order.size(); i += batch_size) {
        const size_t end = std::min(order.size(), i + batch_size);
        out.emplace_back(order.begin() + i, order.begin() + end);
    }
    return out;
}

Batch make_batch(const std::vector<PairDescriptor>& dataset, const std::vector<long>& indices,
                 uint64_t epoch_seed, long crop) {
    check(!indices.empty(), "make_batch: empty index list");
    const long N = static_cast<long>(indices.size());
    Batch b;
    b.low = Tensor::zeros({N, 3, crop, crop});
    b.ref = Tensor::zeros({N, 3, crop, crop});
    for (long i = 0; i < N; ++i) {
        const long idx = indices[i];
        PairedSample s = augment(load_pair(dataset.at(idx)), sample_seed(epoch_seed, idx), crop);
        b.names.push_back(s.name);
        double* pl = b.low.data() + i * 3 * crop * crop;
        double* pr = b.ref.data() + i * 3 * crop * crop;
        for (long y = 0; y < crop; ++y)
            for (long x = 0; x < crop; ++x)
                for (int c = 0; c < 3; ++c) {
                    pl[(c * crop + y) * crop + x] = s.low.at(y, x, c);
                    pr[(c * crop + y) * crop + x] = s.ref.at(y, x, c);
                }
    }
    return b;
}

}  // namespace lcdb
