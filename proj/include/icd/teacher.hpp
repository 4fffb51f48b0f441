// Denoising-score-matching training of the conditional noise net on the
// synthetic mixture. Conditioning is dropped to the null class on a fraction
// of rows so the same net serves guided sampling later.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icd/dataset.hpp"
#include "icd/denoiser.hpp"
#include "icd/rng.hpp"
#include "icd/schedule.hpp"

namespace icd {

struct LossRow {
    int64_t step;
    std::vector<double> values;
};

struct TrainLog {
    std::vector<std::string> columns;  // value names, excluding the step column
    std::vector<LossRow> rows;
};

struct TeacherTrainConfig {
    int64_t steps = 12000;
    int64_t batch = 256;
    double lr = 1e-3;
    double cond_drop = 0.1;
    int log_every = 1;
};

// loss: mean over the batch of the squared noise-prediction error summed over
// coordinates (~2.0 at initialisation, where the net predicts zero)
Denoiser train_teacher(const DenoiserConfig& dcfg, const MixtureParams& mix,
                       const NoiseSchedule& sc, const TeacherTrainConfig& cfg, Rng rng,
                       TrainLog* log = nullptr);

}  // namespace icd
