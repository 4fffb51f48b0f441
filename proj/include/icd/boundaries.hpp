// Segment layout for multi-boundary consistency students. A plan splits the
// timestep grid into m segments by m+1 edge timesteps; each student maps any
// interior point of a segment to one end of that segment (reverse: lower
// edge, forward: upper edge) and is the identity at its own edges.
#pragma once

#include <vector>

#include "icd/schedule.hpp"
#include "icd/solver.hpp"

namespace icd {

struct BoundaryPlan {
    int m = 1;
    double tau = -1.0;        // requested top-segment switch point; < 0 when none
    std::vector<int> edges;   // m+1 ascending grid timesteps, first = t_min, last = top
    std::vector<int> grid;    // the full timestep grid the edges live on

    // published per-direction timestep lists: where each student is evaluated
    // when traversing (reverse starts at edges[m], forward at edges[0])
    std::vector<int> reverse_timesteps() const;  // edges[1..m]
    std::vector<int> forward_timesteps() const;  // edges[0..m-1]

    // segment index in [0, m) containing t; shared edges resolve in the
    // direction of travel so every edge is the identity point of exactly one
    // segment per direction
    int segment_of(int t, OdeDirection dir) const;

    // segment index for the grid interval [grid[j], grid[j+1]]
    int segment_of_interval(int interval) const;

    bool same_layout(const BoundaryPlan& other) const;
};

// target timestep a student jumps to from t: the segment edge in the
// direction of travel. At its own edge a student returns t itself, except at
// the final edge of the walk (reverse: top edge, forward: bottom edge), which
// maps across its segment.
int boundary_for(const BoundaryPlan& plan, int t, OdeDirection dir);

// Build a plan with m segments over the schedule grid. tau in (0, 1] pins the
// second-highest edge to the grid point nearest tau * t_max (top segment =
// unguided head of the decode); tau < 0 spaces edges evenly. The published
// reference layouts for the 50-point grid are reproduced exactly.
BoundaryPlan make_plan(const NoiseSchedule& sc, int m, double tau = -1.0);

}  // namespace icd
