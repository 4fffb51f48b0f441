// Command-line front end: one subcommand per pipeline stage, all reading the
// same flat key=value configuration. Sources apply in order: defaults,
// --config file, --set pairs, then dedicated flags.
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "icd/commands.hpp"
#include "icd/config.hpp"

namespace {

struct Pending {
    std::string config_file;
    std::vector<std::string> sets;       // from --set key=value
    std::vector<std::string> flag_sets;  // from dedicated flags, applied last
};

// dedicated flag that routes through the config key machinery, so flag
// values win over --config and --set regardless of argv order
void key_flag(CLI::App* cmd, Pending& p, const char* flag, const char* key, const char* desc) {
    cmd->add_option_function<std::string>(
        flag,
        [&p, key](const std::string& v) { p.flag_sets.push_back(std::string(key) + "=" + v); },
        desc);
}

void add_common(CLI::App* cmd, Pending& p) {
    cmd->add_option("--config", p.config_file, "key=value config file");
    cmd->add_option("--set", p.sets, "override one key, e.g. --set icd.steps=500");
    key_flag(cmd, p, "--seed", "seed", "run seed");
    key_flag(cmd, p, "--out", "out_dir", "output directory");
}

void apply_kv_arg(icd::RunConfig& cfg, const std::string& kv) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    icd::apply_kv(cfg, kv.substr(0, eq), kv.substr(eq + 1));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"invertible consistency distillation on synthetic 2-D mixtures"};
    app.require_subcommand(1);

    Pending pending;
    std::function<int(const icd::RunConfig&)> run;

    auto verb = [&](const char* name, const char* desc, int (*fn)(const icd::RunConfig&)) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        add_common(cmd, pending);
        cmd->callback([&run, fn] { run = fn; });
        return cmd;
    };

    verb("train-teacher", "train the base conditional noise net", icd::cmd_train_teacher);

    CLI::App* c_cfg = verb("distill-cfg", "embed guidance scales into a one-pass student",
                           icd::cmd_distill_cfg);
    key_flag(c_cfg, pending, "--teacher", "in.teacher", "teacher checkpoint");

    CLI::App* c_icd = verb("distill-icd", "train forward and reverse consistency students",
                           icd::cmd_distill_icd);
    key_flag(c_icd, pending, "--cfg-student", "in.cfg", "guidance-embedded checkpoint");
    key_flag(c_icd, pending, "--m", "plan.m", "number of segments");
    key_flag(c_icd, pending, "--tau", "plan.tau", "top boundary switch point");

    auto add_students = [&pending](CLI::App* cmd) {
        key_flag(cmd, pending, "--cd", "in.cd", "reverse student checkpoint");
        key_flag(cmd, pending, "--fcd", "in.fcd", "forward student checkpoint");
        key_flag(cmd, pending, "--w", "guidance.w", "decode guidance scale");
        key_flag(cmd, pending, "--guidance", "guidance.mode", "constant|step|ramp");
        key_flag(cmd, pending, "--tau1", "guidance.tau1", "guidance switch point");
    };

    CLI::App* c_inv = verb("invert", "encode a dataset and reconstruct it", icd::cmd_invert);
    add_students(c_inv);
    key_flag(c_inv, pending, "--count", "data.count", "points to invert");

    CLI::App* c_edit = verb("edit", "swap conditions through the latent space", icd::cmd_edit);
    add_students(c_edit);
    key_flag(c_edit, pending, "--count", "eval.count", "points to edit");
    key_flag(c_edit, pending, "--shift", "edit.shift", "mode shift of the edit target");

    CLI::App* c_eval = verb("eval", "score inversion and generation per decode mode",
                            icd::cmd_eval);
    add_students(c_eval);
    key_flag(c_eval, pending, "--count", "eval.count", "evaluation points");

    CLI::App* c_sweep = verb("sweep", "editability/faithfulness frontier over switch points",
                             icd::cmd_sweep);
    add_students(c_sweep);
    key_flag(c_sweep, pending, "--count", "eval.count", "points per setting");
    key_flag(c_sweep, pending, "--taus", "sweep.taus", "comma-separated switch points");

    CLI::App* c_plot = verb("plot", "render a CSV artifact as SVG", icd::cmd_plot);
    key_flag(c_plot, pending, "--kind", "plot.kind", "scatter|edit|trajectory|lines");
    key_flag(c_plot, pending, "--input", "plot.input", "CSV file");
    key_flag(c_plot, pending, "--output", "plot.output", "SVG file");
    key_flag(c_plot, pending, "--title", "plot.title", "plot title");

    CLI11_PARSE(app, argc, argv);

    try {
        icd::RunConfig cfg;
        if (!pending.config_file.empty()) icd::apply_config_file(cfg, pending.config_file);
        for (const std::string& kv : pending.sets) apply_kv_arg(cfg, kv);
        for (const std::string& kv : pending.flag_sets) apply_kv_arg(cfg, kv);
        return run(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
