// One function per CLI verb. Each reads what it needs from the run config,
// writes its artifacts under out_dir, prints a short summary, and returns 0.
#pragma once

#include "icd/config.hpp"

namespace icd {

int cmd_train_teacher(const RunConfig& cfg);
int cmd_distill_cfg(const RunConfig& cfg);
int cmd_distill_icd(const RunConfig& cfg);
int cmd_invert(const RunConfig& cfg);
int cmd_edit(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_plot(const RunConfig& cfg);

}  // namespace icd
