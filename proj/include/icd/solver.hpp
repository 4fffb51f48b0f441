// Deterministic probability-flow solver and its noise sources.
//
// A NoiseModel supplies guided noise predictions; the same solver code runs
// on the closed-form mixture oracle, on a trained net with explicit two-pass
// guidance, or on a student with the guidance scale embedded as an input.
#pragma once

#include <memory>
#include <vector>

#include "icd/dataset.hpp"
#include "icd/denoiser.hpp"
#include "icd/schedule.hpp"
#include "icd/tensor.hpp"

namespace icd {

enum class OdeDirection { forward, reverse };

const char* to_string(OdeDirection dir);

// guidance scale as a function of timestep during decoding
enum class GuidanceMode { constant, step, ramp };

struct GuidanceSchedule {
    GuidanceMode mode = GuidanceMode::constant;
    double w_max = 1.0;
    double tau1 = 0.7;  // step: switch point; ramp: below this, w = w_max
    double tau2 = 0.7;  // ramp: above this, w = 1

    static GuidanceSchedule unguided() { return {GuidanceMode::constant, 1.0, 0.0, 0.0}; }
    static GuidanceSchedule constant_w(double w) { return {GuidanceMode::constant, w, 0.0, 0.0}; }
    static GuidanceSchedule step_w(double w, double tau) { return {GuidanceMode::step, w, tau, tau}; }
    static GuidanceSchedule ramp_w(double w, double tau1, double tau2) {
        return {GuidanceMode::ramp, w, tau1, tau2};
    }
};

// scale used when stepping away from timestep t: full guidance only in the
// low-t (low-noise) part of the trajectory, unguided above the switch point
double dynamic_w(const GuidanceSchedule& g, int t, int t_max);

class NoiseModel {
  public:
    virtual ~NoiseModel() = default;
    // guided prediction for a batch sharing one timestep; cls entries may be
    // kNullClass for unconditional rows
    virtual Tensor eps_w(const Tensor& x, int t, const std::vector<int>& cls, double w) const = 0;
};

// closed-form prediction under the Gaussian-mixture data distribution;
// kNullClass rows get the mixture-marginal prediction
Tensor analytic_epsilon(const MixtureParams& mix, const NoiseSchedule& sc, const Tensor& x, int t,
                        const std::vector<int>& cls);

class AnalyticEps final : public NoiseModel {
  public:
    AnalyticEps(MixtureParams mix, const NoiseSchedule& sc) : mix_(mix), sc_(&sc) {}
    Tensor eps_w(const Tensor& x, int t, const std::vector<int>& cls, double w) const override;

  private:
    MixtureParams mix_;
    const NoiseSchedule* sc_;
};

// two-pass guidance on a conditional net: one evaluation at w == 1,
// exactly two otherwise (conditional and null passes)
Tensor cfg_epsilon(const Denoiser& den, const Tensor& x, int t, const std::vector<int>& cls,
                   double w);

class TeacherCfg final : public NoiseModel {
  public:
    explicit TeacherCfg(const Denoiser& den) : den_(&den) {}
    Tensor eps_w(const Tensor& x, int t, const std::vector<int>& cls, double w) const override;

  private:
    const Denoiser* den_;
};

// single evaluation per call on a guidance-embedded net; snap=true maps w to
// the nearest embedded scale instead of requiring exact membership
class EmbeddedCfg final : public NoiseModel {
  public:
    explicit EmbeddedCfg(const Denoiser& den, bool snap = false) : den_(&den), snap_(snap) {}
    Tensor eps_w(const Tensor& x, int t, const std::vector<int>& cls, double w) const override;

  private:
    const Denoiser* den_;
    bool snap_;
};

// one deterministic update x_t -> x_s with a given prediction at (x, t);
// s == t returns x unchanged by construction
Tensor ddim_step_with(const NoiseSchedule& sc, const Tensor& x, const Tensor& eps, int t, int s);

// query the model at (x, t) under scale w, then step t -> s
Tensor ddim_step(const NoiseModel& nm, const NoiseSchedule& sc, const Tensor& x, int t, int s,
                 const std::vector<int>& cls, double w);

struct SolveResult {
    Tensor x;                  // final state
    std::vector<int> times;    // visited grid timesteps (first = start)
    std::vector<Tensor> path;  // states at those timesteps; empty unless recorded
};

// walk the whole timestep grid in the given direction; the guidance scale for
// each update is dynamic_w at the step's source timestep
SolveResult ddim_solve(const NoiseModel& nm, const NoiseSchedule& sc, const Tensor& x,
                       OdeDirection dir, const std::vector<int>& cls, const GuidanceSchedule& g,
                       bool record = false);

struct ThresholdRow {
    double threshold;  // guidance switch point (normalized timestep)
    double mse;        // per-coordinate reconstruction error
};

// encode every dataset point unguided, then decode with step guidance at each
// threshold; mse row-order follows the thresholds argument
std::vector<ThresholdRow> threshold_sweep(const NoiseModel& nm, const NoiseSchedule& sc,
                                          const Dataset& data,
                                          const std::vector<double>& thresholds, double w_max);

}  // namespace icd
