// Binary model checkpoints. Fixed little-endian layout, bit-exact
// round-trips: saving and reloading reproduces every tensor byte.
#pragma once

#include <string>

#include "icd/boundaries.hpp"
#include "icd/dataset.hpp"
#include "icd/denoiser.hpp"
#include "icd/distill.hpp"
#include "icd/schedule.hpp"

namespace icd {

struct LoadedCheckpoint {
    std::string kind;  // "teacher" | "cfg_student" | "cd" | "fcd"
    Denoiser den;
    NoiseSchedule sched;
    MixtureParams mixture;
    bool has_plan = false;
    BoundaryPlan plan;              // valid when has_plan
    OdeDirection dir = OdeDirection::reverse;

    ConsistencyModel consistency() const;  // requires has_plan
};

void save_checkpoint(const std::string& path, const std::string& kind, const Denoiser& den,
                     const NoiseSchedule& sc, const MixtureParams& mix,
                     const BoundaryPlan* plan = nullptr,
                     OdeDirection dir = OdeDirection::reverse);

void save_checkpoint(const std::string& path, const ConsistencyModel& cm,
                     const NoiseSchedule& sc, const MixtureParams& mix);

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace icd
