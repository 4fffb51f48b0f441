// Discrete diffusion noise schedule: linear beta ramp, cumulative
// signal-retention table, and the solver's timestep grid.
#pragma once

#include <cstdint>
#include <vector>

#include "icd/tensor.hpp"

namespace icd {

struct NoiseSchedule {
    int n_steps = 0;              // grid interval count; grid has n_steps+1 points
    int t_max = 0;                // number of modeled timesteps, t in [0, t_max)
    std::vector<double> alpha_bar;  // size t_max; alpha_bar[t] includes the factor for t
    std::vector<int> grid;          // ascending, grid.front()=t_min, grid.back()=t_max-1

    double abar(int t) const;       // range-checked lookup
    int t_min() const { return grid.front(); }
    bool has_grid_point(int t) const;
    int grid_index(int t) const;    // throws if t is not a grid point
};

// beta ramps linearly 1e-4 -> 0.02 across t_max steps; the grid is n+1 evenly
// spaced integer timesteps over [t_min, t_max-1], t_min = 19 at t_max = 1000
// and scaled proportionally otherwise.
NoiseSchedule make_schedule(int n, int t_max = 1000);

// x_t = sqrt(abar_t) * x0 + sqrt(1 - abar_t) * eps, elementwise over a batch
Tensor q_sample(const NoiseSchedule& sc, const Tensor& x0, int t, const Tensor& eps);
// per-row timesteps
Tensor q_sample_rows(const NoiseSchedule& sc, const Tensor& x0, const std::vector<int>& t, const Tensor& eps);

}  // namespace icd
