#include "icd/teacher.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "icd/autodiff.hpp"

namespace icd {

Denoiser train_teacher(const DenoiserConfig& dcfg, const MixtureParams& mix,
                       const NoiseSchedule& sc, const TeacherTrainConfig& cfg, Rng rng,
                       TrainLog* log) {
    if (dcfg.has_guidance)
        throw std::invalid_argument("train_teacher: the base net has no guidance input");
    if (dcfg.num_classes != mix.k)
        throw std::invalid_argument("train_teacher: num_classes must match the mixture");
    if (dcfg.t_max != sc.t_max)
        throw std::invalid_argument("train_teacher: net t_max must match the schedule");
    if (cfg.steps < 1 || cfg.batch < 1)
        throw std::invalid_argument("train_teacher: steps and batch must be positive");

    Denoiser den = Denoiser::create(dcfg, rng);
    DenoiserGrads grads = DenoiserGrads::like(den);
    DenoiserOpt opt = DenoiserOpt::like(den);
    Rng data = rng.stream(streams::train);
    if (log) log->columns = {"loss"};

    Tensor x0({cfg.batch, 2});
    std::vector<int> labels;
    std::vector<int> t(cfg.batch);
    Tensor eps({cfg.batch, 2});

    for (int64_t step = 0; step < cfg.steps; ++step) {
        sample_batch(mix, cfg.batch, data, x0, labels);
        for (int64_t i = 0; i < cfg.batch; ++i) {
            if (data.u01() < cfg.cond_drop) labels[i] = kNullClass;
            t[i] = static_cast<int>(data.uniform_int(sc.t_max));
        }
        data.fill_normal(eps.data.data(), eps.numel());
        Tensor xt = q_sample_rows(sc, x0, t, eps);

        ad::Tape tape;
        grads.zero();
        DenoiserBinding bind = bind_params(tape, den, grads);
        ad::ValueId pred = eps_graph(tape, den, bind, xt, t, labels, {});
        ad::ValueId loss = tape.scale(
            tape.sum_all(tape.square(tape.sub(pred, tape.constant(eps)))),
            1.0 / static_cast<double>(cfg.batch));
        const double value = tape.value(loss).data[0];
        if (!std::isfinite(value))
            throw std::runtime_error("train_teacher: loss diverged at step " +
                                     std::to_string(step));
        tape.backward(loss);
        apply_adam(den, grads, opt, decayed_lr(cfg.lr, step, cfg.steps));

        if (log && (step % cfg.log_every == 0 || step + 1 == cfg.steps))
            log->rows.push_back({step, {value}});
    }
    return den;
}

}  // namespace icd
