#include "icd/distill.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "icd/autodiff.hpp"

namespace icd {

namespace {

// per-row deterministic-update coefficients t[i] -> s[i]
void step_coeffs(const NoiseSchedule& sc, const std::vector<int>& t, const std::vector<int>& s,
                 std::vector<double>& a, std::vector<double>& b) {
    a.resize(t.size());
    b.resize(t.size());
    for (size_t i = 0; i < t.size(); ++i) {
        const double at = sc.abar(t[i]), as = sc.abar(s[i]);
        a[i] = std::sqrt(as / at);
        b[i] = std::sqrt(1.0 - as) - a[i] * std::sqrt(1.0 - at);
    }
}

Tensor affine_rows(const Tensor& x, const Tensor& eps, const std::vector<double>& a,
                   const std::vector<double>& b) {
    Tensor out(x.shape);
    const int64_t cols = x.cols();
    for (int64_t r = 0; r < x.rows(); ++r)
        for (int64_t c = 0; c < cols; ++c)
            out.at(r, c) = a[r] * x.at(r, c) + b[r] * eps.at(r, c);
    return out;
}

// raw (no-gradient) jump with per-row endpoints
Tensor jump_rows(const Denoiser& den, const NoiseSchedule& sc, const Tensor& x,
                 const std::vector<int>& t, const std::vector<int>& s,
                 const std::vector<int>& cls, const std::vector<int>& widx) {
    Tensor eps = den.eps_rows(x, t, cls, widx);
    std::vector<double> a, b;
    step_coeffs(sc, t, s, a, b);
    return affine_rows(x, eps, a, b);
}

// tape node for the same jump, differentiable through the net prediction
ad::ValueId jump_graph(ad::Tape& tape, const Denoiser& den, const DenoiserBinding& bind,
                       const NoiseSchedule& sc, const Tensor& x, const std::vector<int>& t,
                       const std::vector<int>& s, const std::vector<int>& cls,
                       const std::vector<int>& widx) {
    ad::ValueId pred = eps_graph(tape, den, bind, x, t, cls, widx);
    std::vector<double> a, b;
    step_coeffs(sc, t, s, a, b);
    Tensor xa(x.shape);
    for (int64_t r = 0; r < x.rows(); ++r)
        for (int64_t c = 0; c < x.cols(); ++c) xa.at(r, c) = a[r] * x.at(r, c);
    Tensor bt({x.rows()});
    for (int64_t r = 0; r < x.rows(); ++r) bt.data[r] = b[r];
    return tape.add(tape.constant(xa), tape.row_scale(pred, bt));
}

ad::ValueId mse_rows(ad::Tape& tape, ad::ValueId pred, const Tensor& target) {
    return tape.scale(tape.sum_all(tape.square(tape.sub(pred, tape.constant(target)))),
                      1.0 / static_cast<double>(target.rows()));
}

struct TermInputs {
    const NoiseSchedule& sc;
    const BoundaryPlan& plan;
    const Denoiser& teacher;  // guidance-embedded solver teacher
    const Tensor& x0;
    const std::vector<int>& cls;
};

// consistency term for one direction: noise the batch at the interval's outer
// endpoint, push one teacher step toward the segment edge, and match the online
// jump from the original point against the frozen jump from the pushed point.
// the frozen side sits nearer the edge, so the recursion grounds in the
// parametrization's identity there: when the pushed point IS the edge the
// target is exactly the teacher step
ad::ValueId cd_term(ad::Tape& tape, const TermInputs& in, const Denoiser& student,
                    const DenoiserBinding& bind, OdeDirection dir, Rng& rng) {
    const int64_t B = in.x0.rows();
    const int n_intervals = static_cast<int>(in.sc.grid.size()) - 1;
    const int w1 = student.w_index(1.0);
    const int nw = static_cast<int>(student.cfg.w_set.size());

    std::vector<int> t_outer(B), t_adj(B), s_edge(B), widx(B);
    for (int64_t i = 0; i < B; ++i) {
        const int j = static_cast<int>(rng.uniform_int(n_intervals));
        const int seg = in.plan.segment_of_interval(j);
        if (dir == OdeDirection::reverse) {
            t_outer[i] = in.sc.grid[j + 1];
            t_adj[i] = in.sc.grid[j];
            s_edge[i] = in.plan.edges[seg];
            widx[i] = static_cast<int>(rng.uniform_int(nw));
        } else {
            t_outer[i] = in.sc.grid[j];
            t_adj[i] = in.sc.grid[j + 1];
            s_edge[i] = in.plan.edges[seg + 1];
            widx[i] = w1;
        }
    }
    Tensor eps({B, 2});
    rng.fill_normal(eps.data.data(), eps.numel());
    Tensor x_outer = q_sample_rows(in.sc, in.x0, t_outer, eps);

    // teacher step toward the edge, at the same guidance scale
    Tensor eps_t = in.teacher.eps_rows(x_outer, t_outer, in.cls, widx);
    std::vector<double> a, b;
    step_coeffs(in.sc, t_outer, t_adj, a, b);
    Tensor x_adj = affine_rows(x_outer, eps_t, a, b);

    Tensor target = jump_rows(student, in.sc, x_adj, t_adj, s_edge, in.cls, widx);
    ad::ValueId online = jump_graph(tape, student, bind, in.sc, x_outer, t_outer, s_edge, in.cls,
                                    widx);
    return mse_rows(tape, online, target);
}

// preservation term: start on an edge, cross one segment with the frozen
// student, and train the other student to come back
ad::ValueId pres_term(ad::Tape& tape, const TermInputs& in, const Denoiser& frozen,
                      const Denoiser& online, const DenoiserBinding& online_bind,
                      bool forward_term, Rng& rng) {
    const int64_t B = in.x0.rows();
    const int m = in.plan.m;
    const int w1f = frozen.w_index(1.0);
    const int w1o = online.w_index(1.0);

    std::vector<int> t_edge(B), t_mid(B), widx_f(B, w1f), widx_o(B, w1o);
    for (int64_t i = 0; i < B; ++i) {
        const int seg = static_cast<int>(rng.uniform_int(m));
        if (forward_term) {  // frozen reverse student descends, online forward returns
            t_edge[i] = in.plan.edges[seg + 1];
            t_mid[i] = in.plan.edges[seg];
        } else {  // frozen forward student ascends, online reverse returns
            t_edge[i] = in.plan.edges[seg];
            t_mid[i] = in.plan.edges[seg + 1];
        }
    }
    Tensor eps({B, 2});
    rng.fill_normal(eps.data.data(), eps.numel());
    Tensor x_edge = q_sample_rows(in.sc, in.x0, t_edge, eps);

    Tensor y = jump_rows(frozen, in.sc, x_edge, t_edge, t_mid, in.cls, widx_f);
    ad::ValueId back = jump_graph(tape, online, online_bind, in.sc, y, t_mid, t_edge, in.cls,
                                  widx_o);
    return mse_rows(tape, back, x_edge);
}

void check_icd_inputs(const Denoiser& teacher, const NoiseSchedule& sc, const BoundaryPlan& plan) {
    if (!teacher.cfg.has_guidance)
        throw std::invalid_argument(
            "train_icd: the solver teacher must embed guidance (distill it first)");
    teacher.w_index(1.0);  // throws when 1 is not an embedded scale
    if (plan.grid != sc.grid)
        throw std::invalid_argument("train_icd: plan was built for a different grid");
}

}  // namespace

Denoiser distill_cfg(const Denoiser& teacher, const MixtureParams& mix, const NoiseSchedule& sc,
                     const CfgDistillConfig& cfg, Rng rng, TrainLog* log) {
    if (cfg.w_set.empty() || cfg.steps < 1 || cfg.batch < 1)
        throw std::invalid_argument("distill_cfg: bad config");
    Denoiser student = widen_with_guidance(teacher, cfg.w_set, cfg.guidance_dim, rng);
    DenoiserGrads grads = DenoiserGrads::like(student);
    DenoiserOpt opt = DenoiserOpt::like(student);
    Rng data = rng.stream(streams::train);
    if (log) log->columns = {"loss"};

    const int nw = static_cast<int>(cfg.w_set.size());
    Tensor x0({cfg.batch, 2});
    std::vector<int> labels, t(cfg.batch), widx(cfg.batch);
    Tensor eps({cfg.batch, 2});

    for (int64_t step = 0; step < cfg.steps; ++step) {
        sample_batch(mix, cfg.batch, data, x0, labels);
        for (int64_t i = 0; i < cfg.batch; ++i) {
            if (data.u01() < cfg.cond_drop) labels[i] = kNullClass;
            t[i] = static_cast<int>(data.uniform_int(sc.t_max));
            widx[i] = static_cast<int>(data.uniform_int(nw));
        }
        data.fill_normal(eps.data.data(), eps.numel());
        Tensor xt = q_sample_rows(sc, x0, t, eps);

        // two teacher passes cover every row's guidance scale
        Tensor ec = teacher.eps_rows(xt, t, labels, {});
        Tensor eu = teacher.eps_rows(xt, t, std::vector<int>(labels.size(), kNullClass), {});
        Tensor target(ec.shape);
        for (int64_t i = 0; i < cfg.batch; ++i) {
            const double w = cfg.w_set[widx[i]];
            for (int64_t c = 0; c < 2; ++c)
                target.at(i, c) = eu.at(i, c) + w * (ec.at(i, c) - eu.at(i, c));
        }

        ad::Tape tape;
        grads.zero();
        DenoiserBinding bind = bind_params(tape, student, grads);
        ad::ValueId pred = eps_graph(tape, student, bind, xt, t, labels, widx);
        ad::ValueId loss = mse_rows(tape, pred, target);
        const double value = tape.value(loss).data[0];
        if (!std::isfinite(value))
            throw std::runtime_error("distill_cfg: loss diverged at step " + std::to_string(step));
        tape.backward(loss);
        apply_adam(student, grads, opt, decayed_lr(cfg.lr, step, cfg.steps));
        if (log && (step % cfg.log_every == 0 || step + 1 == cfg.steps))
            log->rows.push_back({step, {value}});
    }
    return student;
}

Tensor consistency_jump(const ConsistencyModel& cm, const NoiseSchedule& sc, const Tensor& x,
                        int t, int s, const std::vector<int>& cls, double w, bool snap) {
    const int wi = snap ? cm.den.nearest_w_index(w) : cm.den.w_index(w);
    return jump_rows(cm.den, sc, x, std::vector<int>(x.rows(), t), std::vector<int>(x.rows(), s),
                     cls, std::vector<int>(x.rows(), wi));
}

Tensor consistency_student_step(const ConsistencyModel& cm, const NoiseSchedule& sc,
                                const Tensor& x, int t, const std::vector<int>& cls, double w,
                                bool snap) {
    return consistency_jump(cm, sc, x, t, boundary_for(cm.plan, t, cm.dir), cls, w, snap);
}

IcdPair train_icd(const Denoiser& cfg_teacher, const MixtureParams& mix, const NoiseSchedule& sc,
                  const BoundaryPlan& plan, const IcdTrainConfig& cfg, Rng rng, TrainLog* log) {
    check_icd_inputs(cfg_teacher, sc, plan);
    if (cfg.steps < 1 || cfg.batch < 1) throw std::invalid_argument("train_icd: bad config");

    IcdPair pair;
    pair.cd = {cfg_teacher, OdeDirection::reverse, plan};
    pair.fcd = {cfg_teacher, OdeDirection::forward, plan};

    DenoiserGrads g_cd = DenoiserGrads::like(pair.cd.den);
    DenoiserGrads g_fcd = DenoiserGrads::like(pair.fcd.den);
    DenoiserOpt o_cd = DenoiserOpt::like(pair.cd.den);
    DenoiserOpt o_fcd = DenoiserOpt::like(pair.fcd.den);
    Rng data = rng.stream(streams::train);
    if (log) log->columns = {"cd_rev", "cd_fwd", "pres_f", "pres_r", "total"};

    Tensor x0({cfg.batch, 2});
    std::vector<int> labels;

    // separate mode trains the reverse student alone first, then the forward
    // student against the frozen result; joint mode updates both every step
    const int64_t phase_a = cfg.joint ? 0 : cfg.steps / 2;

    for (int64_t step = 0; step < cfg.steps; ++step) {
        sample_batch(mix, cfg.batch, data, x0, labels);
        TermInputs in{sc, plan, cfg_teacher, x0, labels};

        ad::Tape tape;
        g_cd.zero();
        g_fcd.zero();
        double v_rev = 0, v_fwd = 0, v_pf = 0, v_pr = 0;
        ad::ValueId total = -1;

        auto add_term = [&](ad::ValueId term, double weight, double* slot) {
            *slot = tape.value(term).data[0];
            ad::ValueId weighted = weight == 1.0 ? term : tape.scale(term, weight);
            total = total < 0 ? weighted : tape.add(total, weighted);
        };

        const bool train_cd = cfg.joint || step < phase_a;
        const bool train_fcd = cfg.joint || step >= phase_a;

        DenoiserBinding b_cd, b_fcd;
        if (train_cd) b_cd = bind_params(tape, pair.cd.den, g_cd);
        if (train_fcd) b_fcd = bind_params(tape, pair.fcd.den, g_fcd);

        if (train_cd) {
            add_term(cd_term(tape, in, pair.cd.den, b_cd, OdeDirection::reverse, data), 1.0,
                     &v_rev);
            if (cfg.use_pres_r && cfg.joint)
                add_term(pres_term(tape, in, pair.fcd.den, pair.cd.den, b_cd, false, data),
                         cfg.lambda_r, &v_pr);
        }
        if (train_fcd) {
            add_term(cd_term(tape, in, pair.fcd.den, b_fcd, OdeDirection::forward, data), 1.0,
                     &v_fwd);
            if (cfg.use_pres_f)
                add_term(pres_term(tape, in, pair.cd.den, pair.fcd.den, b_fcd, true, data),
                         cfg.lambda_f, &v_pf);
        }

        const double v_total = tape.value(total).data[0];
        if (!std::isfinite(v_total))
            throw std::runtime_error("train_icd: loss diverged at step " + std::to_string(step));
        tape.backward(total);
        // each phase of a two-phase run gets its own decay cycle; anneal all
        // the way to zero so the late equilibrium between the four loss terms
        // stops wandering
        const double lr_now =
            cfg.joint ? decayed_lr(cfg.lr, step, cfg.steps, 0.0)
                      : (step < phase_a
                             ? decayed_lr(cfg.lr, step, phase_a, 0.0)
                             : decayed_lr(cfg.lr, step - phase_a, cfg.steps - phase_a, 0.0));
        if (train_cd) apply_adam(pair.cd.den, g_cd, o_cd, lr_now);
        if (train_fcd) apply_adam(pair.fcd.den, g_fcd, o_fcd, lr_now);

        if (log && (step % cfg.log_every == 0 || step + 1 == cfg.steps))
            log->rows.push_back({step, {v_rev, v_fwd, v_pf, v_pr, v_total}});
    }
    return pair;
}

double consistency_gap(const NoiseModel& student, const NoiseModel& teacher,
                       const NoiseSchedule& sc, const BoundaryPlan& plan, OdeDirection dir,
                       const Tensor& x_at, int interval, const std::vector<int>& cls, double w) {
    const int seg = plan.segment_of_interval(interval);
    const int t_lo = sc.grid[interval], t_hi = sc.grid[interval + 1];
    int t_outer, t_adj, s_edge;
    if (dir == OdeDirection::reverse) {
        t_outer = t_hi;
        t_adj = t_lo;
        s_edge = plan.edges[seg];
    } else {
        t_outer = t_lo;
        t_adj = t_hi;
        s_edge = plan.edges[seg + 1];
    }
    Tensor direct = ddim_step(student, sc, x_at, t_outer, s_edge, cls, w);
    Tensor x_adj = ddim_step(teacher, sc, x_at, t_outer, t_adj, cls, w);
    Tensor after = ddim_step(student, sc, x_adj, t_adj, s_edge, cls, w);
    double se = 0.0;
    for (int64_t i = 0; i < direct.numel(); ++i) {
        const double d = after.data[i] - direct.data[i];
        se += d * d;
    }
    return se / static_cast<double>(x_at.rows());
}

double preservation_gap(const NoiseModel& down, const NoiseModel& up, const NoiseSchedule& sc,
                        const BoundaryPlan& plan, const Tensor& x_edge, int edge_idx,
                        const std::vector<int>& cls, bool forward_term) {
    const auto& e = plan.edges;
    Tensor back({0});
    if (forward_term) {
        if (edge_idx < 1 || edge_idx > plan.m)
            throw std::out_of_range("preservation_gap: edge index must be in [1, m]");
        Tensor y = ddim_step(down, sc, x_edge, e[edge_idx], e[edge_idx - 1], cls, 1.0);
        back = ddim_step(up, sc, y, e[edge_idx - 1], e[edge_idx], cls, 1.0);
    } else {
        if (edge_idx < 0 || edge_idx >= plan.m)
            throw std::out_of_range("preservation_gap: edge index must be in [0, m)");
        Tensor y = ddim_step(up, sc, x_edge, e[edge_idx], e[edge_idx + 1], cls, 1.0);
        back = ddim_step(down, sc, y, e[edge_idx + 1], e[edge_idx], cls, 1.0);
    }
    double se = 0.0;
    for (int64_t i = 0; i < back.numel(); ++i) {
        const double d = back.data[i] - x_edge.data[i];
        se += d * d;
    }
    return se / static_cast<double>(x_edge.rows());
}

PreservationProbe probe_preservation(const IcdPair& pair, const NoiseSchedule& sc,
                                     const MixtureParams& mix, bool forward_term, Rng rng,
                                     int64_t batch) {
    Tensor x0({batch, 2});
    std::vector<int> labels;
    Rng data = rng.stream(streams::eval);
    sample_batch(mix, batch, data, x0, labels);
    TermInputs in{sc, pair.cd.plan, pair.cd.den, x0, labels};

    DenoiserGrads g_cd = DenoiserGrads::like(pair.cd.den);
    DenoiserGrads g_fcd = DenoiserGrads::like(pair.fcd.den);
    ad::Tape tape;
    DenoiserBinding b_cd = bind_params(tape, pair.cd.den, g_cd);
    DenoiserBinding b_fcd = bind_params(tape, pair.fcd.den, g_fcd);

    ad::ValueId term = forward_term
                           ? pres_term(tape, in, pair.cd.den, pair.fcd.den, b_fcd, true, data)
                           : pres_term(tape, in, pair.fcd.den, pair.cd.den, b_cd, false, data);
    PreservationProbe probe;
    probe.loss = tape.value(term).data[0];
    tape.backward(term);
    probe.grad_cd = g_cd.sq_norm();
    probe.grad_fcd = g_fcd.sq_norm();
    return probe;
}

Tensor multistep_consistency_sample(const ConsistencyModel& cm, const NoiseSchedule& sc,
                                    const Tensor& z, int k, const std::vector<int>& cls, double w,
                                    Rng& rng) {
    if (cm.dir != OdeDirection::reverse)
        throw std::invalid_argument("multistep sample: needs the reverse student");
    if (cm.plan.m != 1)
        throw std::invalid_argument("multistep sample: needs a single-segment student");
    const int n = static_cast<int>(sc.grid.size()) - 1;
    if (k < 1 || k > n)
        throw std::invalid_argument("multistep sample: k must be in [1, " + std::to_string(n) +
                                    "]");
    const int t0 = cm.plan.edges[0], t1 = cm.plan.edges[1];
    Tensor x = consistency_jump(cm, sc, z, t1, t0, cls, w);
    Tensor eps({z.rows(), z.cols()});
    for (int i = 1; i < k; ++i) {
        const int idx = static_cast<int>(std::lround(static_cast<double>(n) * (k - i) / k));
        const int t = sc.grid[idx];
        rng.fill_normal(eps.data.data(), eps.numel());
        Tensor xt = q_sample_rows(sc, x, std::vector<int>(x.rows(), t), eps);
        x = consistency_jump(cm, sc, xt, t, t0, cls, w);
    }
    return x;
}

}  // namespace icd
