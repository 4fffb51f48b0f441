#include "icd/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "icd/checkpoint.hpp"
#include "icd/csvio.hpp"
#include "icd/dataset.hpp"
#include "icd/distill.hpp"
#include "icd/editing.hpp"
#include "icd/inversion.hpp"
#include "icd/svg.hpp"
#include "icd/teacher.hpp"

namespace icd {

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return cfg.out_dir + "/" + name;
}

GuidanceSchedule guidance_from(const RunConfig& cfg) {
    if (cfg.guidance_mode == "constant") return GuidanceSchedule::constant_w(cfg.guidance_w);
    if (cfg.guidance_mode == "step") return GuidanceSchedule::step_w(cfg.guidance_w, cfg.guidance_tau1);
    if (cfg.guidance_mode == "ramp")
        return GuidanceSchedule::ramp_w(cfg.guidance_w, cfg.guidance_tau1, cfg.guidance_tau2);
    throw std::invalid_argument("config: guidance.mode must be constant|step|ramp, got '" +
                                cfg.guidance_mode + "'");
}

MixtureParams mixture_from(const RunConfig& cfg) {
    MixtureParams m;
    m.k = cfg.data_k;
    m.radius = cfg.data_radius;
    m.sigma = cfg.data_sigma;
    return m;
}

void write_train_log(const std::string& path, const TrainLog& log) {
    CsvWriter w(path);
    std::vector<std::string> head = {"step"};
    head.insert(head.end(), log.columns.begin(), log.columns.end());
    w.header(head);
    for (const auto& r : log.rows) {
        std::vector<std::string> cells = {std::to_string(r.step)};
        for (double v : r.values) cells.push_back(fmt_g(v));
        w.row(cells);
    }
    w.close();
}

LoadedCheckpoint load_kind(const std::string& path, const std::string& kind) {
    LoadedCheckpoint lc = load_checkpoint(path);
    if (lc.kind != kind)
        throw std::runtime_error("expected a '" + kind + "' checkpoint at " + path + ", found '" +
                                 lc.kind + "'");
    return lc;
}

struct StudentPair {
    LoadedCheckpoint cd, fcd;

    ConsistencyModel cd_model() const { return cd.consistency(); }
    ConsistencyModel fcd_model() const { return fcd.consistency(); }
};

StudentPair load_students(const RunConfig& cfg) {
    StudentPair p{load_kind(cfg.in_cd, "cd"), load_kind(cfg.in_fcd, "fcd")};
    if (!p.cd.plan.same_layout(p.fcd.plan))
        throw std::runtime_error("cd and fcd checkpoints use different boundary plans");
    return p;
}

}  // namespace

int cmd_train_teacher(const RunConfig& cfg) {
    const NoiseSchedule sc = make_schedule(cfg.sched_n, cfg.sched_t_max);
    const MixtureParams mix = mixture_from(cfg);
    DenoiserConfig dc;
    dc.hidden = cfg.model_hidden;
    dc.hidden_layers = cfg.model_layers;
    dc.time_dim = cfg.model_time_dim;
    dc.class_dim = cfg.model_class_dim;
    dc.num_classes = mix.k;
    dc.t_max = sc.t_max;

    TeacherTrainConfig tc;
    tc.steps = cfg.teacher_steps;
    tc.batch = cfg.teacher_batch;
    tc.lr = cfg.teacher_lr;
    tc.cond_drop = cfg.teacher_cond_drop;
    tc.log_every = cfg.log_every;

    TrainLog log;
    Denoiser den = train_teacher(dc, mix, sc, tc, Rng(cfg.seed), &log);

    save_checkpoint(out_path(cfg, "teacher.ckpt"), "teacher", den, sc, mix);
    write_train_log(out_path(cfg, "teacher_loss.csv"), log);
    save_config(cfg, out_path(cfg, "teacher_config.txt"));
    std::printf("teacher: %lld steps, final loss %.6f -> %s\n",
                static_cast<long long>(tc.steps), log.rows.back().values[0],
                out_path(cfg, "teacher.ckpt").c_str());
    return 0;
}

int cmd_distill_cfg(const RunConfig& cfg) {
    LoadedCheckpoint t = load_kind(cfg.in_teacher, "teacher");
    CfgDistillConfig dc;
    dc.steps = cfg.cfg_steps;
    dc.batch = cfg.cfg_batch;
    dc.lr = cfg.cfg_lr;
    dc.cond_drop = cfg.cfg_cond_drop;
    dc.w_set = cfg.w_set;
    dc.guidance_dim = cfg.model_guidance_dim;
    dc.log_every = cfg.log_every;

    TrainLog log;
    Denoiser student = distill_cfg(t.den, t.mixture, t.sched, dc, Rng(cfg.seed), &log);

    save_checkpoint(out_path(cfg, "cfg_student.ckpt"), "cfg_student", student, t.sched,
                    t.mixture);
    write_train_log(out_path(cfg, "cfg_loss.csv"), log);
    save_config(cfg, out_path(cfg, "cfg_config.txt"));
    std::printf("cfg student: %lld steps, final loss %.6f -> %s\n",
                static_cast<long long>(dc.steps), log.rows.back().values[0],
                out_path(cfg, "cfg_student.ckpt").c_str());
    return 0;
}

int cmd_distill_icd(const RunConfig& cfg) {
    LoadedCheckpoint t = load_kind(cfg.in_cfg, "cfg_student");
    const BoundaryPlan plan = make_plan(t.sched, cfg.plan_m, cfg.plan_tau);

    IcdTrainConfig ic;
    ic.steps = cfg.icd_steps;
    ic.batch = cfg.icd_batch;
    ic.lr = cfg.icd_lr;
    ic.lambda_f = cfg.icd_lambda_f;
    ic.lambda_r = cfg.icd_lambda_r;
    ic.use_pres_f = cfg.icd_pres_f;
    ic.use_pres_r = cfg.icd_pres_r;
    ic.joint = cfg.icd_joint;
    ic.log_every = cfg.log_every;

    TrainLog log;
    IcdPair pair = train_icd(t.den, t.mixture, t.sched, plan, ic, Rng(cfg.seed), &log);

    save_checkpoint(out_path(cfg, "cd.ckpt"), pair.cd, t.sched, t.mixture);
    save_checkpoint(out_path(cfg, "fcd.ckpt"), pair.fcd, t.sched, t.mixture);
    write_train_log(out_path(cfg, "icd_loss.csv"), log);
    save_config(cfg, out_path(cfg, "icd_config.txt"));
    std::printf("students: m=%d, %lld steps, final total loss %.6f -> %s, %s\n", plan.m,
                static_cast<long long>(ic.steps), log.rows.back().values.back(),
                out_path(cfg, "cd.ckpt").c_str(), out_path(cfg, "fcd.ckpt").c_str());
    return 0;
}

int cmd_invert(const RunConfig& cfg) {
    StudentPair p = load_students(cfg);
    const ConsistencyModel cd = p.cd_model(), fcd = p.fcd_model();
    const Dataset data =
        sample_dataset(p.cd.mixture, cfg.data_count, Rng(cfg.seed).stream(streams::dataset));
    const GuidanceSchedule g = guidance_from(cfg);

    std::vector<Tensor> enc_path, dec_path;
    Tensor z = encode(fcd, p.cd.sched, data.points, data.labels, &enc_path);
    Tensor rec = decode(cd, p.cd.sched, z, data.labels, g, &dec_path);

    double se = 0.0;
    CsvWriter w(out_path(cfg, "invert_points.csv"));
    w.header({"x", "y", "label", "zx", "zy", "rx", "ry", "sqerr"});
    for (int64_t i = 0; i < data.points.rows(); ++i) {
        const double dx = rec.at(i, 0) - data.points.at(i, 0);
        const double dy = rec.at(i, 1) - data.points.at(i, 1);
        se += dx * dx + dy * dy;
        w.row({fmt_g(data.points.at(i, 0)), fmt_g(data.points.at(i, 1)),
               std::to_string(data.labels[i]), fmt_g(z.at(i, 0)), fmt_g(z.at(i, 1)),
               fmt_g(rec.at(i, 0)), fmt_g(rec.at(i, 1)), fmt_g(dx * dx + dy * dy)});
    }
    w.close();

    const double mse = se / static_cast<double>(rec.numel());
    const double nll = latent_nll(z);
    {
        CsvWriter s(out_path(cfg, "invert_summary.csv"));
        s.header({"count", "mse", "latent_nll"});
        s.row({std::to_string(data.points.rows()), fmt_g(mse), fmt_g(nll)});
        s.close();
    }

    // edge-walk paths for the first few samples, encode then decode
    {
        CsvWriter tr(out_path(cfg, "invert_paths.csv"));
        tr.header({"sample", "t", "x", "y"});
        const int64_t show = std::min<int64_t>(8, data.points.rows());
        const auto& e = cd.plan.edges;
        for (int64_t i = 0; i < show; ++i) {
            for (size_t j = 0; j < enc_path.size(); ++j)
                tr.row({std::to_string(i), std::to_string(j == 0 ? e.front() : e[j]),
                        fmt_g(enc_path[j].at(i, 0)), fmt_g(enc_path[j].at(i, 1))});
            for (size_t j = 1; j < dec_path.size(); ++j)
                tr.row({std::to_string(i), std::to_string(e[e.size() - 1 - j]),
                        fmt_g(dec_path[j].at(i, 0)), fmt_g(dec_path[j].at(i, 1))});
        }
        tr.close();
    }

    save_config(cfg, out_path(cfg, "invert_config.txt"));
    std::printf("invert: %lld points, roundtrip mse %.6g, latent nll %.6g\n",
                static_cast<long long>(data.points.rows()), mse, nll);
    return 0;
}

int cmd_edit(const RunConfig& cfg) {
    StudentPair p = load_students(cfg);
    const GuidanceSchedule g = guidance_from(cfg);
    EditDump dump;
    EditReport rep = edit_eval(p.fcd_model(), p.cd_model(), p.cd.sched, p.cd.mixture,
                               cfg.eval_count, cfg.edit_shift, g, Rng(cfg.seed), &dump);

    CsvWriter w(out_path(cfg, "edit_points.csv"));
    w.header({"x", "y", "ex", "ey", "src", "tgt"});
    for (int64_t i = 0; i < dump.inputs.rows(); ++i)
        w.row({fmt_g(dump.inputs.at(i, 0)), fmt_g(dump.inputs.at(i, 1)),
               fmt_g(dump.edits.at(i, 0)), fmt_g(dump.edits.at(i, 1)),
               std::to_string(dump.src[i]), std::to_string(dump.tgt[i])});
    w.close();

    {
        CsvWriter s(out_path(cfg, "edit_report.csv"));
        s.header({"count", "success", "mean_move", "baseline_move", "fresh_move", "fresh_success",
                  "angle_corr"});
        s.row({std::to_string(rep.count), fmt_g(rep.success), fmt_g(rep.mean_move),
               fmt_g(rep.baseline_move), fmt_g(rep.fresh_move), fmt_g(rep.fresh_success),
               fmt_g(rep.angle_corr)});
        s.close();
    }
    emit_plot({"edit", out_path(cfg, "edit_points.csv"), out_path(cfg, "edit_overlay.svg"),
               "condition-swap edits"});
    save_config(cfg, out_path(cfg, "edit_config.txt"));
    std::printf("edit: success %.3f, move %.3f (fresh %.3f, data %.3f), angle corr %.3f\n",
                rep.success, rep.mean_move, rep.fresh_move, rep.baseline_move, rep.angle_corr);
    return 0;
}

int cmd_eval(const RunConfig& cfg) {
    StudentPair p = load_students(cfg);
    const ConsistencyModel cd = p.cd_model(), fcd = p.fcd_model();
    const NoiseSchedule& sc = p.cd.sched;
    const Dataset data =
        sample_dataset(p.cd.mixture, cfg.eval_count, Rng(cfg.seed).stream(streams::dataset));

    struct Row {
        const char* name;
        GuidanceSchedule g;
    };
    const Row rows[] = {
        {"unguided", GuidanceSchedule::unguided()},
        {"step", GuidanceSchedule::step_w(cfg.guidance_w, cfg.guidance_tau1)},
        {"constant", GuidanceSchedule::constant_w(cfg.guidance_w)},
    };

    Rng gen = Rng(cfg.seed).stream(streams::sampler);
    Tensor z({cfg.eval_count, 2});
    std::vector<int> glab(cfg.eval_count);
    gen.fill_normal(z.data.data(), z.numel());
    for (auto& l : glab) l = static_cast<int>(gen.uniform_int(p.cd.mixture.k));

    CsvWriter w(out_path(cfg, "eval_table.csv"));
    w.header({"decode", "roundtrip_mse", "latent_nll", "gen_mode_rate"});
    for (const Row& r : rows) {
        const RoundtripReport rt = roundtrip_eval(fcd, cd, sc, data, r.g);
        Tensor gx = decode(cd, sc, z, glab, r.g);
        int64_t hit = 0;
        for (int64_t i = 0; i < gx.rows(); ++i)
            if (nearest_mode(p.cd.mixture, gx.at(i, 0), gx.at(i, 1)) == glab[i]) ++hit;
        const double rate = static_cast<double>(hit) / static_cast<double>(gx.rows());
        w.row({r.name, fmt_g(rt.mse), fmt_g(rt.nll), fmt_g(rate)});
        std::printf("eval[%s]: roundtrip mse %.6g, latent nll %.6g, generated mode rate %.3f\n",
                    r.name, rt.mse, rt.nll, rate);
    }
    w.close();
    save_config(cfg, out_path(cfg, "eval_config.txt"));
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    StudentPair p = load_students(cfg);
    const ConsistencyModel cd = p.cd_model(), fcd = p.fcd_model();
    const NoiseSchedule& sc = p.cd.sched;
    const Dataset data =
        sample_dataset(p.cd.mixture, cfg.eval_count, Rng(cfg.seed).stream(streams::dataset));

    CsvWriter w(out_path(cfg, "tau_frontier.csv"));
    w.header({"tau", "edit_success", "edit_move", "roundtrip_mse"});
    for (double tau : cfg.sweep_taus) {
        const GuidanceSchedule g = GuidanceSchedule::step_w(cfg.guidance_w, tau);
        const EditReport er = edit_eval(fcd, cd, sc, p.cd.mixture, cfg.eval_count,
                                        cfg.edit_shift, g, Rng(cfg.seed));
        const RoundtripReport rt = roundtrip_eval(fcd, cd, sc, data, g);
        w.row({fmt_g(tau), fmt_g(er.success), fmt_g(er.mean_move), fmt_g(rt.mse)});
        std::printf("sweep tau=%.3g: edit success %.3f, move %.3f, roundtrip mse %.6g\n", tau,
                    er.success, er.mean_move, rt.mse);
    }
    w.close();
    save_config(cfg, out_path(cfg, "sweep_config.txt"));
    return 0;
}

int cmd_plot(const RunConfig& cfg) {
    if (cfg.plot_input.empty() || cfg.plot_output.empty())
        throw std::invalid_argument("plot: plot.input and plot.output are required");
    emit_plot({cfg.plot_kind, cfg.plot_input, cfg.plot_output, cfg.plot_title});
    std::printf("plot: %s -> %s\n", cfg.plot_input.c_str(), cfg.plot_output.c_str());
    return 0;
}

}  // namespace icd
