// Flat key=value run configuration shared by every CLI verb. Unknown keys
// are rejected by name; save_config emits keys in a fixed order so configs
// round-trip byte-identically.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icd {

struct RunConfig {
    uint64_t seed = 1;
    std::string out_dir = "out";

    // data
    int data_k = 8;
    double data_radius = 4.0;
    double data_sigma = 0.3;
    int64_t data_count = 512;

    // schedule
    int sched_n = 49;
    int sched_t_max = 1000;

    // net
    int model_hidden = 128;
    int model_layers = 3;
    int model_time_dim = 32;
    int model_class_dim = 16;
    int model_guidance_dim = 8;

    // teacher
    int64_t teacher_steps = 12000;
    int64_t teacher_batch = 256;
    double teacher_lr = 1e-3;
    double teacher_cond_drop = 0.1;

    // guidance distillation
    int64_t cfg_steps = 16000;
    int64_t cfg_batch = 128;
    double cfg_lr = 1e-3;
    double cfg_cond_drop = 0.1;
    std::vector<double> w_set = {1.0, 8.0, 12.0, 16.0, 20.0};

    // consistency distillation
    int64_t icd_steps = 5000;
    int64_t icd_batch = 96;
    double icd_lr = 1e-3;
    double icd_lambda_f = 1.5;
    double icd_lambda_r = 1.5;
    bool icd_pres_f = true;
    bool icd_pres_r = true;
    bool icd_joint = true;

    // boundary plan
    int plan_m = 4;
    double plan_tau = 0.8;

    // decoding guidance
    std::string guidance_mode = "step";  // constant | step | ramp
    double guidance_w = 8.0;
    double guidance_tau1 = 0.8;
    double guidance_tau2 = 0.8;

    // evaluation / editing / sweeps
    int64_t eval_count = 256;
    int edit_shift = 2;
    std::vector<double> sweep_taus = {0.2, 0.4, 0.6, 0.7, 0.8, 0.9, 1.0};
    int sample_k = 1;

    // model inputs
    std::string in_teacher = "out/teacher.ckpt";
    std::string in_cfg = "out/cfg_student.ckpt";
    std::string in_cd = "out/cd.ckpt";
    std::string in_fcd = "out/fcd.ckpt";

    // plotting
    std::string plot_kind = "scatter";
    std::string plot_input;
    std::string plot_output;
    std::string plot_title;

    int log_every = 10;
};

// set one key; throws listing the key when it is unknown or the value does
// not parse
void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value);

// key=value lines, '#' comments, blank lines allowed
RunConfig load_config(const std::string& path);
void apply_config_file(RunConfig& cfg, const std::string& path);

void save_config(const RunConfig& cfg, const std::string& path);

std::vector<double> parse_double_list(const std::string& s);  // comma-separated
std::string join_double_list(const std::vector<double>& v);

}  // namespace icd
