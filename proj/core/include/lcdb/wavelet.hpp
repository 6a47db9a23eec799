#pragma once

#include <vector>

namespace lcdb {

// (C,H,W) volume of doubles, row-major.
struct Volume {
    long c = 0, h = 0, w = 0;
    std::vector<double> v;

    Volume() = default;
    Volume(long c_, long h_, long w_)
        : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, 0.0) {}
    double& at(long ci, long y, long x) { return v[(ci * h + y) * w + x]; }
    double at(long ci, long y, long x) const { return v[(ci * h + y) * w + x]; }
    long numel() const { return c * h * w; }
};

// One level of the orthonormal 2D Haar transform. All four subbands have
// shape (C, H/2, W/2) and together carry exactly the input's energy.
struct SubbandSet {
    Volume ll, lh, hl, hh;
};

// Detail triples ordered finest -> coarsest plus the final approximation.
struct WaveletPyramid {
    struct Detail {
        Volume lh, hl, hh;
    };
    std::vector<Detail> detail_levels;
    Volume approx;
};

namespace haar {
// Raw kernels shared with the autograd ops. out holds [LL,LH,HL,HH]
// contiguously, each band (C,H/2,W/2).
void forward(const double* x, double* out, long C, long H, long W);
void inverse(const double* subbands, double* x, long C, long h2, long w2);
}  // namespace haar

SubbandSet dwt2_level(const Volume& x);
Volume idwt2_level(const SubbandSet& s);
WaveletPyramid decompose(const Volume& x, int levels);
Volume reconstruct(const WaveletPyramid& p);

}  // namespace lcdb
