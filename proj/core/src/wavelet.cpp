#include "lcdb/wavelet.hpp"

#include <cstring>
#include <stdexcept>
#include <string>

namespace lcdb {

namespace haar {

void forward(const double* x, double* out, long C, long H, long W) {
    const long h2 = H / 2, w2 = W / 2, band = C * h2 * w2;
    for (long c = 0; c < C; ++c)
        for (long i = 0; i < h2; ++i)
            for (long j = 0; j < w2; ++j) {
                const double a = x[(c * H + 2 * i) * W + 2 * j];
                const double b = x[(c * H + 2 * i) * W + 2 * j + 1];
                const double cc = x[(c * H + 2 * i + 1) * W + 2 * j];
                const double d = x[(c * H + 2 * i + 1) * W + 2 * j + 1];
                const long o = (c * h2 + i) * w2 + j;
                out[o] = 0.5 * (a + b + cc + d);
                out[band + o] = 0.5 * (a + cc - b - d);
                out[2 * band + o] = 0.5 * (a + b - cc - d);
                out[3 * band + o] = 0.5 * (a - b - cc + d);
            }
}

void inverse(const double* s, double* x, long C, long h2, long w2) {
    const long band = C * h2 * w2, H = 2 * h2, W = 2 * w2;
    for (long c = 0; c < C; ++c)
        for (long i = 0; i < h2; ++i)
            for (long j = 0; j < w2; ++j) {
                const long o = (c * h2 + i) * w2 + j;
                const double ll = s[o], lh = s[band + o], hl = s[2 * band + o],
                             hh = s[3 * band + o];
                x[(c * H + 2 * i) * W + 2 * j] = 0.5 * (ll + lh + hl + hh);
                x[(c * H + 2 * i) * W + 2 * j + 1] = 0.5 * (ll - lh + hl - hh);
                x[(c * H + 2 * i + 1) * W + 2 * j] = 0.5 * (ll + lh - hl - hh);
                x[(c * H + 2 * i + 1) * W + 2 * j + 1] = 0.5 * (ll - lh - hl + hh);
            }
}

}  // namespace haar

SubbandSet dwt2_level(const Volume& x) {
    if (x.h % 2 != 0 || x.w % 2 != 0)
        throw std::invalid_argument("dwt2_level: H and W must be even (pad first)");
    const long h2 = x.h / 2, w2 = x.w / 2, band = x.c * h2 * w2;
    std::vector<double> buf(4 * band);
    haar::forward(x.v.data(), buf.data(), x.c, x.h, x.w);
    SubbandSet s;
    s.ll = Volume(x.c, h2, w2);
    s.lh = Volume(x.c, h2, w2);
    s.hl = Volume(x.c, h2, w2);
    s.hh = Volume(x.c, h2, w2);
    std::memcpy(s.ll.v.data(), buf.data(), band * sizeof(double));
    std::memcpy(s.lh.v.data(), buf.data() + band, band * sizeof(double));
    std::memcpy(s.hl.v.data(), buf.data() + 2 * band, band * sizeof(double));
    std::memcpy(s.hh.v.data(), buf.data() + 3 * band, band * sizeof(double));
    return s;
}

Volume idwt2_level(const SubbandSet& s) {
    const Volume& r = s.ll;
    auto same = [&](const Volume& o) { return o.c == r.c && o.h == r.h && o.w == r.w; };
    if (!same(s.lh) || !same(s.hl) || !same(s.hh))
        throw std::invalid_argument("idwt2_level: subband shape mismatch");
    const long band = r.numel();
    std::vector<double> buf(4 * band);
    std::memcpy(buf.data(), s.ll.v.data(), band * sizeof(double));
    std::memcpy(buf.data() + band, s.lh.v.data(), band * sizeof(double));
    std::memcpy(buf.data() + 2 * band, s.hl.v.data(), band * sizeof(double));
    std::memcpy(buf.data() + 3 * band, s.hh.v.data(), band * sizeof(double));
    Volume x(r.c, 2 * r.h, 2 * r.w);
    haar::inverse(buf.data(), x.v.data(), r.c, r.h, r.w);
    return x;
}

WaveletPyramid decompose(const Volume& x, int levels) {
    if (levels < 1) throw std::invalid_argument("decompose: levels must be >= 1");
    long h = x.h, w = x.w;
    for (int k = 0; k < levels; ++k) {
        if (h % 2 != 0 || w % 2 != 0 || h / 2 < 1 || w / 2 < 1)
            throw std::invalid_argument("decompose: dimensions not divisible by 2^" +
                                        std::to_string(levels));
        h /= 2;
        w /= 2;
    }
    WaveletPyramid p;
    Volume cur = x;
    for (int k = 0; k < levels; ++k) {
        SubbandSet s = dwt2_level(cur);
        p.detail_levels.push_back({std::move(s.lh), std::move(s.hl), std::move(s.hh)});
        cur = std::move(s.ll);
    }
    p.approx = std::move(cur);
    return p;
}

Volume reconstruct(const WaveletPyramid& p) {
    if (p.detail_levels.empty()) throw std::invalid_argument("reconstruct: empty pyramid");
    Volume cur = p.approx;
    for (auto it = p.detail_levels.rbegin(); it != p.detail_levels.rend(); ++it) {
        SubbandSet s;
        s.ll = std::move(cur);
        s.lh = it->lh;
        s.hl = it->hl;
        s.hh = it->hh;
        cur = idwt2_level(s);
    }
    return cur;
}

}  // namespace lcdb
