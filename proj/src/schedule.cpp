#include "icd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace icd {

double NoiseSchedule::abar(int t) const {
    if (t < 0 || t >= t_max)
        throw std::out_of_range("schedule: timestep " + std::to_string(t) + " outside [0," + std::to_string(t_max) + ")");
    return alpha_bar[static_cast<size_t>(t)];
}

bool NoiseSchedule::has_grid_point(int t) const {
    return std::binary_search(grid.begin(), grid.end(), t);
}

int NoiseSchedule::grid_index(int t) const {
    auto it = std::lower_bound(grid.begin(), grid.end(), t);
    if (it == grid.end() || *it != t)
        throw std::out_of_range("schedule: timestep " + std::to_string(t) + " is not a grid point");
    return static_cast<int>(it - grid.begin());
}

NoiseSchedule make_schedule(int n, int t_max) {
    if (n < 1 || t_max < 2 || n > t_max)
        throw std::invalid_argument("make_schedule: need 1 <= n <= t_max, got n=" + std::to_string(n) +
                                    " t_max=" + std::to_string(t_max));
    NoiseSchedule sc;
    sc.n_steps = n;
    sc.t_max = t_max;
    sc.alpha_bar.resize(static_cast<size_t>(t_max));
    double prod = 1.0;
    for (int t = 0; t < t_max; ++t) {
        const double beta = 1e-4 + (0.02 - 1e-4) * static_cast<double>(t) / static_cast<double>(t_max - 1);
        prod *= 1.0 - beta;
        sc.alpha_bar[static_cast<size_t>(t)] = prod;
    }

    const int t_min = static_cast<int>(std::lround(19.0 * t_max / 1000.0));
    sc.grid.resize(static_cast<size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
        const double pos = t_min + static_cast<double>(k) * (t_max - 1 - t_min) / static_cast<double>(n);
        sc.grid[static_cast<size_t>(k)] = static_cast<int>(std::lround(pos));
    }
    for (int k = 0; k < n; ++k)
        if (sc.grid[static_cast<size_t>(k)] >= sc.grid[static_cast<size_t>(k + 1)])
            throw std::invalid_argument("make_schedule: grid spacing below one timestep, reduce n");
    return sc;
}

Tensor q_sample(const NoiseSchedule& sc, const Tensor& x0, int t, const Tensor& eps) {
    if (!x0.same_shape(eps))
        throw std::invalid_argument("q_sample: shape mismatch " + x0.shape_str() + " vs " + eps.shape_str());
    const double a = sc.abar(t);
    const double sa = std::sqrt(a), sn = std::sqrt(1.0 - a);
    Tensor out(x0.shape);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = sa * x0.data[i] + sn * eps.data[i];
    return out;
}

Tensor q_sample_rows(const NoiseSchedule& sc, const Tensor& x0, const std::vector<int>& t, const Tensor& eps) {
    if (!x0.same_shape(eps))
        throw std::invalid_argument("q_sample_rows: shape mismatch " + x0.shape_str() + " vs " + eps.shape_str());
    if (x0.rank() != 2 || static_cast<int64_t>(t.size()) != x0.rows())
        throw std::invalid_argument("q_sample_rows: need one timestep per row");
    Tensor out(x0.shape);
    const int64_t cols = x0.cols();
    for (int64_t r = 0; r < x0.rows(); ++r) {
        const double a = sc.abar(t[static_cast<size_t>(r)]);
        const double sa = std::sqrt(a), sn = std::sqrt(1.0 - a);
        for (int64_t c = 0; c < cols; ++c)
            out.at(r, c) = sa * x0.at(r, c) + sn * eps.at(r, c);
    }
    return out;
}

}  // namespace icd
