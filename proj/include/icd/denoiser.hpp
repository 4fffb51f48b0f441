// Conditional noise-prediction MLP. Input row = [x | time embedding |
// class embedding | guidance embedding], three tanh hidden layers, linear
// output head (zero-initialised so the untrained net predicts zero noise).
//
// Guidance-embedded nets add a second, zero-initialised output head whose
// contribution is multiplied by the row's actual guidance scale:
//   eps(x,t,c,w) = base(h) + w * delta(h).
// Guided targets are affine in w with a w-proportional part, so giving the
// net the multiplication for free removes the hardest thing it would
// otherwise have to emulate through saturating units.
//
// Two forward paths share the same kernels in the same order, so their
// outputs are bit-identical: eps_rows (plain, counted) and eps_graph (tape).
#pragma once

#include <vector>

#include "icd/autodiff.hpp"
#include "icd/rng.hpp"
#include "icd/tensor.hpp"

namespace icd {

struct DenoiserConfig {
    int x_dim = 2;
    int time_dim = 32;
    int class_dim = 16;
    int guidance_dim = 8;
    int hidden = 128;
    int hidden_layers = 3;
    int num_classes = 8;
    int t_max = 1000;
    bool has_guidance = false;
    std::vector<double> w_set;  // embedded guidance scales, required iff has_guidance

    int input_dim() const {
        return x_dim + time_dim + class_dim + (has_guidance ? guidance_dim : 0);
    }
};

struct Denoiser {
    DenoiserConfig cfg;
    Tensor time_table;            // [t_max, time_dim], fixed sinusoidal, not trained
    Tensor class_table;           // [num_classes+1, class_dim]; last row is the null class
    Tensor guidance_table;        // [w_set.size(), guidance_dim]
    std::vector<Tensor> weights;  // hidden_layers+1 entries
    std::vector<Tensor> biases;
    Tensor delta_w;               // [hidden, x_dim], w-scaled head; guidance nets only
    Tensor delta_b;               // [x_dim]

    mutable int64_t eval_count = 0;  // eps_rows invocations (call-count contracts)

    static Denoiser create(const DenoiserConfig& cfg, Rng rng);

    // per-row timesteps/classes; widx: per-row index into cfg.w_set (empty iff no guidance)
    Tensor eps_rows(const Tensor& x, const std::vector<int>& t, const std::vector<int>& cls,
                    const std::vector<int>& widx) const;
    // shared timestep helpers
    Tensor eps(const Tensor& x, int t, const std::vector<int>& cls) const;
    Tensor eps(const Tensor& x, int t, const std::vector<int>& cls, double w) const;

    int class_row(int cls) const;          // kNullClass maps to the null row
    int w_index(double w) const;           // exact membership in w_set
    int nearest_w_index(double w) const;   // closest embedded scale

    int64_t param_count() const;
};

// teacher -> guidance-embedded student: copies all weights, appends
// zero-filled first-layer rows for the guidance block so the student's output
// at initialisation equals the teacher's for every w
Denoiser widen_with_guidance(const Denoiser& teacher, const std::vector<double>& w_set,
                             int guidance_dim, Rng rng);

// gradient buffers aligned with a Denoiser's trainable tensors
struct DenoiserGrads {
    std::vector<Tensor> weights, biases;
    Tensor class_table, guidance_table, delta_w, delta_b;

    static DenoiserGrads like(const Denoiser& d);
    void zero();
    double sq_norm() const;
};

// Adam moments aligned with a Denoiser's trainable tensors
struct DenoiserOpt {
    std::vector<ad::AdamState> weights, biases;
    ad::AdamState class_table, guidance_table, delta_w, delta_b;

    static DenoiserOpt like(const Denoiser& d);
};

void apply_adam(Denoiser& d, const DenoiserGrads& g, DenoiserOpt& opt, double lr);

// cosine decay from base_lr down to floor*base_lr across the run; every
// trainer uses it so late steps polish instead of dithering
double decayed_lr(double base_lr, int64_t step, int64_t total_steps, double floor = 0.05);

// parameter nodes for one tape; reuse across several forward calls on the
// same tape so all loss terms accumulate into one set of gradients
struct DenoiserBinding {
    std::vector<ad::ValueId> weights, biases;
    ad::ValueId class_table = -1, guidance_table = -1, delta_w = -1, delta_b = -1;
};

DenoiserBinding bind_params(ad::Tape& tape, const Denoiser& d, DenoiserGrads& g);

ad::ValueId eps_graph(ad::Tape& tape, const Denoiser& d, const DenoiserBinding& b, const Tensor& x,
                      const std::vector<int>& t, const std::vector<int>& cls,
                      const std::vector<int>& widx);

}  // namespace icd
