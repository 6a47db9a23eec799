#include <doctest.h>

#include "lcdb/nn.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace lcdb;

namespace {

Tensor random_tensor(std::vector<long> shape, uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Tensor t = Tensor::zeros(shape);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    for (long i = 0; i < t.numel(); ++i) t.data()[i] = u(rng);
    return t;
}

// Small random jitter on every parameter so zero-initialized layers still
// carry gradient signal during the finite-difference comparison.
void jitter_params(ParamRegistry& reg, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (auto& [name, p] : reg.params())
        for (long i = 0; i < p.numel(); ++i) p.data()[i] += u(rng);
}

double max_rel_grad_err(Tensor& x, const std::function<Tensor()>& f, long stride = 1,
                        double step = 1e-4) {
    x.zero_grad();
    Tensor loss = f();
    loss.backward();
    std::vector<double> analytic(x.grad(), x.grad() + x.numel());
    double worst = 0.0;
    for (long i = 0; i < x.numel(); i += stride) {
        const double keep = x.data()[i];
        x.data()[i] = keep + step;
        const double up = f().item();
        x.data()[i] = keep - step;
        const double dn = f().item();
        x.data()[i] = keep;
        const double fd = (up - dn) / (2.0 * step);
        const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
        worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
    return worst;
}

Tensor scalar_loss(const Tensor& y) { return ops::mean_all(ops::mul(y, y)); }

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

}  // namespace

TEST_CASE("channel attention: shape, saturation, divisibility") {
    ParamRegistry reg(1);
    ChannelAttention ca(reg, "ca", 32, 16);
    const Tensor x = random_tensor({2, 32, 16, 16}, 3);
    CHECK(same_shape(ca.forward(x), x));

    // Saturate the output bias so the sigmoid gate is effectively 1.
    for (long i = 0; i < ca.b2.numel(); ++i) ca.b2.data()[i] = 50.0;
    const Tensor out = ca.forward(x);
    for (long i = 0; i < x.numel(); ++i)
        CHECK(out.data()[i] == doctest::Approx(x.data()[i]).epsilon(1e-9));

    ParamRegistry reg2(1);
    CHECK_THROWS(ChannelAttention(reg2, "bad", 6, 16));  // 6 % max(4, 6/16) != 0
}

TEST_CASE("channel attention gradient vs finite differences") {
    ParamRegistry reg(5);
    ChannelAttention ca(reg, "ca", 8, 16);
    jitter_params(reg, 7);
    Tensor x = random_tensor({1, 8, 4, 4}, 9);
    x.set_requires_grad(true);
    CHECK(max_rel_grad_err(x, [&] { return scalar_loss(ca.forward(x)); }) < 1e-3);
}

TEST_CASE("spatial attention: shape and uniform gating on constant input") {
    ParamRegistry reg(11);
    SpatialAttention sa(reg, "sa");
    const Tensor x = random_tensor({1, 16, 8, 8}, 13);
    CHECK(same_shape(sa.forward(x), x));

    const Tensor c = Tensor::full({1, 4, 6, 6}, 0.3);
    const Tensor out = sa.forward(c);
    const double ratio = out.data()[10] / c.data()[10];
    for (long i = 0; i < c.numel(); ++i)
        CHECK(out.data()[i] == doctest::Approx(ratio * c.data()[i]).epsilon(1e-6));
}

TEST_CASE("spatial attention gradient vs finite differences") {
    ParamRegistry reg(17);
    SpatialAttention sa(reg, "sa");
    jitter_params(reg, 19);
    Tensor x = random_tensor({1, 4, 6, 6}, 23);
    x.set_requires_grad(true);
    CHECK(max_rel_grad_err(x, [&] { return scalar_loss(sa.forward(x)); }) < 1e-3);
}

TEST_CASE("dacb: zero input with zero biases maps to zero, shape preserved") {
    ParamRegistry reg(29);
    Dacb dacb(reg, "dacb", 48, 16);
    const Tensor x = random_tensor({2, 48, 32, 32}, 31);
    CHECK(same_shape(dacb.forward(x), x));

    const Tensor zero = Tensor::zeros({1, 48, 8, 8});
    const Tensor out = dacb.forward(zero);
    for (long i = 0; i < out.numel(); ++i) CHECK(std::abs(out.data()[i]) < 1e-12);
}

TEST_CASE("dacb gradient vs finite differences") {
    ParamRegistry reg(37);
    Dacb dacb(reg, "dacb", 8, 16);
    jitter_params(reg, 41);
    Tensor x = random_tensor({1, 8, 8, 8}, 43);
    x.set_requires_grad(true);
    CHECK(max_rel_grad_err(x, [&] { return scalar_loss(dacb.forward(x)); }, 3) < 1e-3);
}

TEST_CASE("window transformer block preserves shape, padded and unpadded") {
    ParamRegistry reg(47);
    WindowTransformerBlock blk(reg, "swin", 32, 8, 2, 0);
    const Tensor x = random_tensor({1, 32, 16, 16}, 53);
    CHECK(same_shape(blk.forward(x), x));
    const Tensor odd = random_tensor({1, 32, 10, 14}, 59);  // forces internal padding
    CHECK(same_shape(blk.forward(odd), odd));
}

TEST_CASE("attention weights per query sum to one") {
    ParamRegistry reg(61);
    WindowTransformerBlock blk(reg, "swin", 16, 4, 2, 2);
    jitter_params(reg, 67);
    const Tensor x = random_tensor({1, 16, 8, 8}, 71);
    Tensor attn;
    blk.attention(x, &attn);
    const auto& s = attn.shape();
    REQUIRE(s.size() == 3);
    for (long g = 0; g < s[0]; ++g)
        for (long q = 0; q < s[1]; ++q) {
            double sum = 0.0;
            for (long k = 0; k < s[2]; ++k) sum += attn.data()[(g * s[1] + q) * s[2] + k];
            CHECK(std::abs(sum - 1.0) < 1e-6);
        }
}

TEST_CASE("shift mask matches brute-force wrap detection on an 8x8 grid") {
    const long H = 8, W = 8, win = 4, shift = 2;
    const auto mask = WindowTransformerBlock::shift_mask(H, W, win, shift);
    const long T = win * win;
    const long n_win = (H / win) * (W / win);
    REQUIRE(static_cast<long>(mask.size()) == n_win * T * T);

    // Tokens in a shifted window may attend only when neither axis wraps
    // between them: both source coordinates fall on the same side of the
    // image boundary.
    for (long wy = 0; wy < H / win; ++wy) {
        for (long wx = 0; wx < W / win; ++wx) {
            const long widx = wy * (W / win) + wx;
            for (long a = 0; a < T; ++a) {
                for (long b = 0; b < T; ++b) {
                    const long ay = wy * win + a / win, ax = wx * win + a % win;
                    const long by = wy * win + b / win, bx = wx * win + b % win;
                    const bool wrap_y = ((ay + shift) / H) != ((by + shift) / H);
                    const bool wrap_x = ((ax + shift) / W) != ((bx + shift) / W);
                    const double expected = (wrap_y || wrap_x) ? -1e9 : 0.0;
                    CHECK(mask[(widx * T + a) * T + b] == expected);
                }
            }
        }
    }
}

TEST_CASE("1x1 window attention degenerates to per-token identity mixing") {
    ParamRegistry reg(73);
    WindowTransformerBlock blk(reg, "swin", 16, 1, 1, 0);
    const Tensor x = random_tensor({1, 16, 2, 2}, 79);
    Tensor attn;
    blk.attention(x, &attn);
    // Softmax over a single key is exactly 1.
    for (long i = 0; i < attn.numel(); ++i) CHECK(attn.data()[i] == doctest::Approx(1.0));
    CHECK(same_shape(blk.forward(x), x));
}

TEST_CASE("window transformer gradient vs finite differences") {
    ParamRegistry reg(83);
    WindowTransformerBlock blk(reg, "swin", 8, 4, 1, 2);
    jitter_params(reg, 89);
    Tensor x = random_tensor({1, 8, 4, 4}, 97);
    x.set_requires_grad(true);
    CHECK(max_rel_grad_err(x, [&] { return scalar_loss(blk.forward(x)); }, 3) < 1e-3);
}

TEST_CASE("glab: shape preservation and single-branch ablations") {
    ParamRegistry reg(101);
    Glab glab(reg, "glab", 48, 8, 3, 16, 2, true, true);
    const Tensor x = random_tensor({2, 48, 32, 32}, 103);
    CHECK(same_shape(glab.forward(x), x));

    ParamRegistry reg_a(101);
    Glab no_swin(reg_a, "glab", 16, 8, 1, 16, 2, false, true);
    CHECK(same_shape(no_swin.forward(random_tensor({1, 16, 8, 8}, 107)),
                     random_tensor({1, 16, 8, 8}, 107)));
    ParamRegistry reg_b(101);
    Glab no_dacb(reg_b, "glab", 16, 8, 1, 16, 2, true, false);
    CHECK(same_shape(no_dacb.forward(random_tensor({1, 16, 8, 8}, 109)),
                     random_tensor({1, 16, 8, 8}, 109)));
}

TEST_CASE("glab gradient vs finite differences") {
    ParamRegistry reg(113);
    Glab glab(reg, "glab", 8, 4, 1, 16, 1, true, true);
    jitter_params(reg, 127);
    Tensor x = random_tensor({1, 8, 8, 8}, 131);
    x.set_requires_grad(true);
    CHECK(max_rel_grad_err(x, [&] { return scalar_loss(glab.forward(x)); }, 5) < 1e-3);
}

TEST_CASE("rcab is the identity at initialization") {
    ParamRegistry reg(137);
    Rcab rcab(reg, "rcab", 48, 16);
    const Tensor x = random_tensor({1, 48, 16, 16}, 139);
    const Tensor out = rcab.forward(x);
    REQUIRE(same_shape(out, x));
    for (long i = 0; i < x.numel(); ++i) CHECK(out.data()[i] == x.data()[i]);
}

TEST_CASE("rcab gradient vs finite differences") {
    ParamRegistry reg(149);
    Rcab rcab(reg, "rcab", 8, 16);
    jitter_params(reg, 151);
    Tensor x = random_tensor({1, 8, 4, 4}, 157);
    x.set_requires_grad(true);
    CHECK(max_rel_grad_err(x, [&] { return scalar_loss(rcab.forward(x)); }) < 1e-3);
}

TEST_CASE("supervision module: pass-through at init and declared shapes") {
    ParamRegistry reg(163);
    SupervisionModule sm(reg, "sm", 48, 1);
    const Tensor f = random_tensor({1, 48, 8, 8}, 167);
    const Tensor x_in = random_tensor({1, 1, 8, 8}, 173, 0.0, 1.0);
    const auto out = sm.forward(f, x_in);
    CHECK(out.intermediate.shape() == std::vector<long>{1, 1, 8, 8});
    CHECK(out.refined.shape() == std::vector<long>{1, 48, 8, 8});
    // Zero-initialized prediction conv: intermediate is exactly the input.
    for (long i = 0; i < x_in.numel(); ++i) CHECK(out.intermediate.data()[i] == x_in.data()[i]);
}

TEST_CASE("supervision module gradient vs finite differences") {
    ParamRegistry reg(179);
    SupervisionModule sm(reg, "sm", 8, 2);
    jitter_params(reg, 181);
    Tensor f = random_tensor({1, 8, 4, 4}, 191);
    const Tensor x_in = random_tensor({1, 2, 4, 4}, 193, 0.0, 1.0);
    f.set_requires_grad(true);
    CHECK(max_rel_grad_err(f, [&] { return scalar_loss(sm.forward(f, x_in).refined); }) < 1e-3);
}

TEST_CASE("parameter names are stable and initialization is order-independent") {
    ParamRegistry a(7), b(7);
    Rcab r1(a, "net.block", 8, 16);
    // Different construction order, same names/seed.
    SpatialAttention s2(b, "other");
    Rcab r2(b, "net.block", 8, 16);
    for (const auto& [name, p] : a.params()) {
        auto it = b.params().find(name);
        REQUIRE(it != b.params().end());
        for (long i = 0; i < p.numel(); ++i) CHECK(p.data()[i] == it->second.data()[i]);
    }
}
