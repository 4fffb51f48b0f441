// Consistency distillation in both time directions over a boundary plan,
// with optional cross-direction preservation terms that tie the two students
// into mutual inverses.
//
// Students embed the guidance scale as an input; the reverse student is
// trained across the whole embedded w_set, the forward student only unguided.
// Targets always come from a frozen copy of the current student pushed one
// solver step by the teacher (the target net is refreshed every step).
#pragma once

#include <cstdint>
#include <vector>

#include "icd/boundaries.hpp"
#include "icd/dataset.hpp"
#include "icd/denoiser.hpp"
#include "icd/rng.hpp"
#include "icd/schedule.hpp"
#include "icd/solver.hpp"
#include "icd/teacher.hpp"

namespace icd {

struct CfgDistillConfig {
    int64_t steps = 16000;
    int64_t batch = 128;
    double lr = 1e-3;
    double cond_drop = 0.1;
    std::vector<double> w_set = {1.0, 8.0, 12.0, 16.0, 20.0};
    int guidance_dim = 8;
    int log_every = 1;
};

// two-pass guided teacher -> single-pass guidance-embedded student; the
// student starts as the widened teacher, so its initial loss is exactly 0 on
// w == 1 rows
Denoiser distill_cfg(const Denoiser& teacher, const MixtureParams& mix, const NoiseSchedule& sc,
                     const CfgDistillConfig& cfg, Rng rng, TrainLog* log = nullptr);

// a distilled student: jumps from any grid timestep inside a segment to that
// segment's edge in its direction of travel
struct ConsistencyModel {
    Denoiser den;
    OdeDirection dir = OdeDirection::reverse;
    BoundaryPlan plan;
};

// x at timestep t -> state at timestep s, one net evaluation; snap maps w to
// the nearest embedded scale (used when decoding with a ramp schedule)
Tensor consistency_jump(const ConsistencyModel& cm, const NoiseSchedule& sc, const Tensor& x,
                        int t, int s, const std::vector<int>& cls, double w, bool snap = false);

// jump to the model's own segment edge for t (identity at that edge)
Tensor consistency_student_step(const ConsistencyModel& cm, const NoiseSchedule& sc,
                                const Tensor& x, int t, const std::vector<int>& cls, double w,
                                bool snap = false);

struct IcdTrainConfig {
    int64_t steps = 5000;
    int64_t batch = 96;
    double lr = 1e-3;
    double lambda_f = 1.5;  // weight of the forward-preservation term
    double lambda_r = 1.5;  // weight of the reverse-preservation term
    bool use_pres_f = true;
    bool use_pres_r = true;
    bool joint = true;  // false: reverse student alone first, then forward student
    int log_every = 1;
};

struct IcdPair {
    ConsistencyModel cd;   // reverse (denoising) student
    ConsistencyModel fcd;  // forward (noising) student
};

// log columns: cd_rev, cd_fwd, pres_f, pres_r, total
IcdPair train_icd(const Denoiser& cfg_teacher, const MixtureParams& mix, const NoiseSchedule& sc,
                  const BoundaryPlan& plan, const IcdTrainConfig& cfg, Rng rng,
                  TrainLog* log = nullptr);

// --- value-path diagnostics (no gradients), also the oracle hooks in tests ---

// mean squared gap between the direct jump to the segment edge and the jump
// taken after one teacher step toward it. x_at holds the batch at the
// interval's outer endpoint (upper for reverse, lower for forward).
double consistency_gap(const NoiseModel& student, const NoiseModel& teacher,
                       const NoiseSchedule& sc, const BoundaryPlan& plan, OdeDirection dir,
                       const Tensor& x_at, int interval, const std::vector<int>& cls, double w);

// mean squared error of a one-segment roundtrip started at edge_idx:
// forward_term: down across segment edge_idx then back up (the term training
// the forward student); otherwise up across segment edge_idx then back down
double preservation_gap(const NoiseModel& down, const NoiseModel& up, const NoiseSchedule& sc,
                        const BoundaryPlan& plan, const Tensor& x_edge, int edge_idx,
                        const std::vector<int>& cls, bool forward_term);

// gradient norms produced by one preservation term in isolation; shows which
// student the term actually trains
struct PreservationProbe {
    double loss = 0;
    double grad_cd = 0;   // squared gradient norm reaching the reverse student
    double grad_fcd = 0;  // squared gradient norm reaching the forward student
};

PreservationProbe probe_preservation(const IcdPair& pair, const NoiseSchedule& sc,
                                     const MixtureParams& mix, bool forward_term, Rng rng,
                                     int64_t batch = 32);

// k-step generation: one jump from the top edge, then k-1 rounds of
// re-noising to an intermediate timestep and jumping again. k == 1 is
// deterministic and consumes no randomness; requires a single-segment
// reverse student.
Tensor multistep_consistency_sample(const ConsistencyModel& cm, const NoiseSchedule& sc,
                                    const Tensor& z, int k, const std::vector<int>& cls, double w,
                                    Rng& rng);

}  // namespace icd
