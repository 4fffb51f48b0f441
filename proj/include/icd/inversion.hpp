// Deterministic encode/decode through a boundary plan, and the latent
// diagnostics used to compare guidance schedules.
#pragma once

#include <cstdint>
#include <vector>

#include "icd/boundaries.hpp"
#include "icd/dataset.hpp"
#include "icd/distill.hpp"
#include "icd/schedule.hpp"
#include "icd/solver.hpp"
#include "icd/tensor.hpp"

namespace icd {

// data -> latent: walk the plan edges bottom-up with the forward student,
// always unguided. path (optional) records the state at every edge.
Tensor encode(const ConsistencyModel& fcd, const NoiseSchedule& sc, const Tensor& x0,
              const std::vector<int>& cls, std::vector<Tensor>* path = nullptr);

// latent -> data: walk the plan edges top-down with the reverse student; the
// guidance scale comes from the schedule at each jump's source edge (snapped
// to the nearest embedded scale)
Tensor decode(const ConsistencyModel& cd, const NoiseSchedule& sc, const Tensor& z,
              const std::vector<int>& cls, const GuidanceSchedule& g,
              std::vector<Tensor>* path = nullptr);

// the same edge walks with an arbitrary noise source standing in for the
// student (each jump = one solver step); guided encodes are allowed here
Tensor encode_with(const NoiseModel& nm, const NoiseSchedule& sc, const BoundaryPlan& plan,
                   const Tensor& x0, const std::vector<int>& cls,
                   const GuidanceSchedule& g = GuidanceSchedule::unguided(),
                   std::vector<Tensor>* path = nullptr);

Tensor decode_with(const NoiseModel& nm, const NoiseSchedule& sc, const BoundaryPlan& plan,
                   const Tensor& z, const std::vector<int>& cls, const GuidanceSchedule& g,
                   std::vector<Tensor>* path = nullptr);

// average per-coordinate Gaussian negative log-likelihood of latents;
// low values mean the encoder maps data onto the prior
double latent_nll(const Tensor& z);

struct RoundtripReport {
    int64_t count = 0;
    double mse = 0;   // per-coordinate reconstruction error
    double nll = 0;   // latent Gaussian NLL
};

RoundtripReport roundtrip_eval(const ConsistencyModel& fcd, const ConsistencyModel& cd,
                               const NoiseSchedule& sc, const Dataset& data,
                               const GuidanceSchedule& decode_g);

}  // namespace icd
