// Semantic editing by condition swap: encode under the source class, decode
// under the target class with guided decoding. Success is measured against
// the known mixture geometry.
#pragma once

#include <cstdint>
#include <vector>

#include "icd/dataset.hpp"
#include "icd/distill.hpp"
#include "icd/inversion.hpp"

namespace icd {

// per-row source/target classes; identity rows (target == source) pass
// through the same unguided pipeline as a plain roundtrip
Tensor edit_points(const ConsistencyModel& fcd, const ConsistencyModel& cd,
                   const NoiseSchedule& sc, const Tensor& x0, const std::vector<int>& src,
                   const std::vector<int>& tgt, const GuidanceSchedule& g);

struct EditReport {
    int64_t count = 0;
    double success = 0;        // fraction of edits landing nearest the target mode
    double mean_move = 0;      // mean distance between input and edit
    double baseline_move = 0;  // mean distance between input and a fresh target data sample
    double fresh_move = 0;     // mean distance between input and an independently decoded
                               // fresh latent (same target class and schedule)
    double fresh_success = 0;  // fraction of those fresh decodes landing in the target mode
    double angle_corr = 0;     // correlation of angular offsets within source/target modes
};

struct EditDump {
    Tensor inputs;
    Tensor edits;
    std::vector<int> src, tgt;
};

// samples `count` points (mode s -> mode (s+shift) mod k), edits them, and
// scores the batch; dump (optional) receives the raw points for plotting
EditReport edit_eval(const ConsistencyModel& fcd, const ConsistencyModel& cd,
                     const NoiseSchedule& sc, const MixtureParams& mix, int64_t count, int shift,
                     const GuidanceSchedule& g, Rng rng, EditDump* dump = nullptr);

}  // namespace icd
