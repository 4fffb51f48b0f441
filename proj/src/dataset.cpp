#include "icd/dataset.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace icd {

std::vector<double> MixtureParams::center(int mode) const {
    if (mode < 0 || mode >= k) throw std::out_of_range("mixture: mode " + std::to_string(mode));
    const double ang = 2.0 * std::numbers::pi * mode / k;
    return {radius * std::cos(ang), radius * std::sin(ang)};
}

void sample_batch(const MixtureParams& mix, int64_t n, Rng& rng, Tensor& points, std::vector<int>& labels) {
    points = Tensor({n, 2});
    labels.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(rng.uniform_int(mix.k));
        const auto c = mix.center(label);
        labels[static_cast<size_t>(i)] = label;
        points.at(i, 0) = c[0] + mix.sigma * rng.normal();
        points.at(i, 1) = c[1] + mix.sigma * rng.normal();
    }
}

Dataset sample_dataset(const MixtureParams& mix, int64_t n, Rng rng) {
    Dataset d;
    d.mixture = mix;
    sample_batch(mix, n, rng, d.points, d.labels);
    return d;
}

int nearest_mode(const MixtureParams& mix, double x, double y) {
    int best = 0;
    double bestd = mode_distance(mix, 0, x, y);
    for (int m = 1; m < mix.k; ++m) {
        const double d = mode_distance(mix, m, x, y);
        if (d < bestd) {
            bestd = d;
            best = m;
        }
    }
    return best;
}

double mode_distance(const MixtureParams& mix, int mode, double x, double y) {
    const auto c = mix.center(mode);
    return std::hypot(x - c[0], y - c[1]);
}

}  // namespace icd
