// Synthetic 2-D labelled dataset: K equally weighted Gaussian modes on a
// circle; the label is the mode index.
#pragma once

#include <cstdint>
#include <vector>

#include "icd/rng.hpp"
#include "icd/tensor.hpp"

namespace icd {

constexpr int kNullClass = -1;  // "no condition" sentinel in model queries

struct MixtureParams {
    int k = 8;
    double radius = 4.0;
    double sigma = 0.3;

    // mode centre, shape (2)
    std::vector<double> center(int mode) const;
};

struct LabeledSample {
    double x = 0.0, y = 0.0;
    int label = 0;
};

struct Dataset {
    MixtureParams mixture;
    Tensor points;             // [n, 2]
    std::vector<int> labels;   // size n

    int64_t size() const { return points.rows(); }
};

Dataset sample_dataset(const MixtureParams& mix, int64_t n, Rng rng);
// one batch with labels chosen uniformly; points = centre(label) + sigma*noise
void sample_batch(const MixtureParams& mix, int64_t n, Rng& rng, Tensor& points, std::vector<int>& labels);

// index of the nearest mode centre
int nearest_mode(const MixtureParams& mix, double x, double y);
// distance to the given mode's centre
double mode_distance(const MixtureParams& mix, int mode, double x, double y);

}  // namespace icd
