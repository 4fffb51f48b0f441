// Small deterministic SVG renderer for the CSV outputs: scatters, edit
// overlays, per-sample trajectories, and multi-series line charts.
#pragma once

#include <string>

namespace icd {

struct PlotSpec {
    std::string kind;    // "scatter" | "edit" | "trajectory" | "lines"
    std::string input;   // CSV path
    std::string output;  // SVG path
    std::string title;   // optional; defaults to the kind
};

// column contracts:
//   scatter:    x, y [, label]
//   edit:       x, y, ex, ey [, src, tgt]
//   trajectory: sample, t, x, y
//   lines:      first column = x, every other column = one series
void emit_plot(const PlotSpec& spec);

}  // namespace icd
