#include "lcdb/metrics.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lcdb {

void MetricReport::recompute_means() {
    double ps = 0.0, ss = 0.0;
    for (const Row& r : per_image) {
        ps += r.psnr_db;
        ss += r.ssim;
    }
    const double n = per_image.empty() ? 1.0 : static_cast<double>(per_image.size());
    psnr_db = ps / n;
    ssim = ss / n;
}

std::string MetricReport::to_text() const {
    std::ostringstream os;
    os << "name\tpsnr_db\tssim\n";
    for (const Row& r : per_image)
        os << r.name << '\t' << r.psnr_db << '\t' << r.ssim << '\n';
    os << "mean\t" << psnr_db << '\t' << ssim << '\n';
    return os.str();
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    j["per_image"] = nlohmann::json::array();
    for (const Row& r : per_image)
        j["per_image"].push_back({{"name", r.name}, {"psnr_db", r.psnr_db}, {"ssim", r.ssim}});
    j["mean"] = {{"psnr_db", psnr_db}, {"ssim", ssim}};
    return j.dump(2);
}

std::vector<double> ssim_gaussian_kernel() {
    std::vector<double> k(kSsimWindow * kSsimWindow);
    const int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i)
        for (int j = 0; j < kSsimWindow; ++j) {
            const double dy = i - half, dx = j - half;
            k[i * kSsimWindow + j] =
                std::exp(-(dy * dy + dx * dx) / (2.0 * kSsimSigma * kSsimSigma));
            sum += k[i * kSsimWindow + j];
        }
    for (double& v : k) v /= sum;
    return k;
}

double psnr(const std::vector<double>& x, const std::vector<double>& y, double peak) {
    if (x.size() != y.size()) throw std::invalid_argument("psnr: shape mismatch");
    if (peak <= 0.0) throw std::invalid_argument("psnr: peak must be positive");
    double mse = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        mse += d * d;
    }
    mse /= static_cast<double>(x.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const Plane& x, const Plane& y, double peak) {
    if (x.h != y.h || x.w != y.w) throw std::invalid_argument("psnr: shape mismatch");
    return psnr(x.v, y.v, peak);
}

double ssim(const Plane& x, const Plane& y) {
    if (x.h != y.h || x.w != y.w) throw std::invalid_argument("ssim: shape mismatch");
    if (x.h < kSsimWindow || x.w < kSsimWindow)
        throw std::invalid_argument("ssim: image smaller than the window");
    static const std::vector<double> kernel = ssim_gaussian_kernel();
    const long oh = x.h - kSsimWindow + 1, ow = x.w - kSsimWindow + 1;
    double acc = 0.0;
    for (long i = 0; i < oh; ++i)
        for (long j = 0; j < ow; ++j) {
            double mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
            for (int a = 0; a < kSsimWindow; ++a)
                for (int b = 0; b < kSsimWindow; ++b) {
                    const double k = kernel[a * kSsimWindow + b];
                    const double vx = x.at(i + a, j + b);
                    const double vy = y.at(i + a, j + b);
                    mx += k * vx;
                    my += k * vy;
                    mxx += k * vx * vx;
                    myy += k * vy * vy;
                    mxy += k * vx * vy;
                }
            const double vx = mxx - mx * mx;
            const double vy = myy - my * my;
            const double cxy = mxy - mx * my;
            acc += ((2.0 * mx * my + kSsimC1) * (2.0 * cxy + kSsimC2)) /
                   ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
        }
    return acc / static_cast<double>(oh * ow);
}

double ssim(const RgbImage& x, const RgbImage& y) {
    if (x.h != y.h || x.w != y.w) throw std::invalid_argument("ssim: shape mismatch");
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        Plane px(x.h, x.w), py(y.h, y.w);
        for (long i = 0; i < x.h * x.w; ++i) {
            px.v[i] = x.v[i * 3 + c];
            py.v[i] = y.v[i * 3 + c];
        }
        acc += ssim(px, py);
    }
    return acc / 3.0;
}

PairMetrics evaluate_pair(const RgbImage& pred, const RgbImage& ref) {
    if (pred.h != ref.h || pred.w != ref.w)
        throw std::invalid_argument("evaluate_pair: dimension mismatch");
    return {psnr(pred.v, ref.v, 1.0), ssim(pred, ref)};
}

}  // namespace lcdb
