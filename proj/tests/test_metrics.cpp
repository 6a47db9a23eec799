#include <doctest.h>

#include "lcdb/metrics.hpp"
#include "lcdb/colorspace.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <random>

using namespace lcdb;

namespace {

Plane random_plane(long h, long w, uint64_t seed) {
    Plane p(h, w);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : p.v) v = u(rng);
    return p;
}

// Literal per-window implementation of the local SSIM statistic.
double brute_force_ssim(const Plane& x, const Plane& y) {
    const auto k = ssim_gaussian_kernel();
    const int n = kSsimWindow;
    double total = 0.0;
    long count = 0;
    for (long oy = 0; oy + n <= x.h; ++oy) {
        for (long ox = 0; ox + n <= x.w; ++ox) {
            double mx = 0, my = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double wgt = k[i * n + j];
                    mx += wgt * x.at(oy + i, ox + j);
                    my += wgt * y.at(oy + i, ox + j);
                }
            double vx = 0, vy = 0, cov = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double wgt = k[i * n + j];
                    const double dx = x.at(oy + i, ox + j) - mx;
                    const double dy = y.at(oy + i, ox + j) - my;
                    vx += wgt * dx * dx;
                    vy += wgt * dy * dy;
                    cov += wgt * dx * dy;
                }
            total += ((2 * mx * my + kSsimC1) * (2 * cov + kSsimC2)) /
                     ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
            ++count;
        }
    }
    return total / count;
}

}  // namespace

TEST_CASE("psnr basics") {
    const Plane x = random_plane(16, 16, 5);
    CHECK(std::isinf(psnr(x, x)));
    Plane y = x;
    for (auto& v : y.v) v += 0.1;
    CHECK(psnr(x, y) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("psnr matches brute-force mse") {
    const Plane x = random_plane(16, 16, 7);
    const Plane y = random_plane(16, 16, 9);
    double mse = 0.0;
    for (size_t i = 0; i < x.v.size(); ++i) mse += (x.v[i] - y.v[i]) * (x.v[i] - y.v[i]);
    mse /= static_cast<double>(x.v.size());
    CHECK(psnr(x, y) == doctest::Approx(10.0 * std::log10(1.0 / mse)).epsilon(1e-9));
}

TEST_CASE("psnr shift relation") {
    const Plane x = random_plane(12, 12, 11);
    for (double delta : {0.05, 0.2}) {
        Plane y = x;
        for (auto& v : y.v) v += delta;
        CHECK(psnr(x, y) == doctest::Approx(20.0 * std::log10(1.0 / delta)).epsilon(1e-9));
    }
}

TEST_CASE("psnr shape mismatch rejected") {
    CHECK_THROWS(psnr(random_plane(4, 4, 1), random_plane(4, 5, 1)));
}

TEST_CASE("ssim of identical images is 1") {
    for (uint64_t s : {1ull, 2ull, 3ull}) {
        const Plane x = random_plane(16, 16, s);
        CHECK(std::abs(ssim(x, x) - 1.0) < 1e-9);
    }
}

TEST_CASE("ssim matches per-window brute-force oracle on 16x16") {
    const Plane x = random_plane(16, 16, 13);
    const Plane y = random_plane(16, 16, 17);
    CHECK(std::abs(ssim(x, y) - brute_force_ssim(x, y)) < 1e-6);
}

TEST_CASE("ssim of inverted checkerboard is negative") {
    Plane x(16, 16);
    for (long i = 0; i < 16; ++i)
        for (long j = 0; j < 16; ++j) x.at(i, j) = static_cast<double>((i + j) & 1);
    Plane y = x;
    for (auto& v : y.v) v = 1.0 - v;
    CHECK(ssim(x, y) < 0.0);
}

TEST_CASE("ssim symmetry and bounds") {
    const Plane x = random_plane(16, 16, 19);
    const Plane y = random_plane(16, 16, 23);
    CHECK(std::abs(ssim(x, y) - ssim(y, x)) < 1e-12);
    CHECK(std::abs(ssim(x, y)) <= 1.0);
}

TEST_CASE("image smaller than window is an error") {
    CHECK_THROWS(ssim(random_plane(8, 8, 29), random_plane(8, 8, 31)));
}

TEST_CASE("multi-channel ssim is the mean of per-channel values") {
    RgbImage a(16, 16), b(16, 16);
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : a.v) v = u(rng);
    for (auto& v : b.v) v = u(rng);
    double mean = 0.0;
    for (int c = 0; c < 3; ++c) {
        Plane pa(16, 16), pb(16, 16);
        for (long i = 0; i < 256; ++i) {
            pa.v[i] = a.v[i * 3 + c];
            pb.v[i] = b.v[i * 3 + c];
        }
        mean += ssim(pa, pb);
    }
    CHECK(ssim(a, b) == doctest::Approx(mean / 3.0).epsilon(1e-12));
}

TEST_CASE("evaluate_pair on identical and shifted inputs") {
    RgbImage ref(16, 16);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.2, 0.8);
    for (auto& v : ref.v) v = u(rng);
    const PairMetrics same = evaluate_pair(ref, ref);
    CHECK(std::isinf(same.psnr_db));
    CHECK(same.ssim == doctest::Approx(1.0).epsilon(1e-9));
    RgbImage pred = ref;
    for (auto& v : pred.v) v += 0.1;
    const PairMetrics shifted = evaluate_pair(pred, ref);
    CHECK(shifted.psnr_db == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(shifted.ssim < 1.0);
}

TEST_CASE("report serialization: means and json") {
    MetricReport r;
    r.per_image = {{"a", 20.0, 0.8}, {"b", 30.0, 0.9}, {"c", 25.0, 0.7}};
    r.recompute_means();
    CHECK(r.psnr_db == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(r.ssim == doctest::Approx(0.8).epsilon(1e-12));
    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j["per_image"].size() == 3);
    CHECK(j["mean"]["psnr_db"].get<double>() == doctest::Approx(25.0).epsilon(1e-9));
    CHECK(j["mean"]["ssim"].get<double>() == doctest::Approx(0.8).epsilon(1e-9));
    double sum = 0.0;
    for (const auto& row : j["per_image"]) sum += row["psnr_db"].get<double>();
    CHECK(j["mean"]["psnr_db"].get<double>() == doctest::Approx(sum / 3.0).epsilon(1e-9));
}
