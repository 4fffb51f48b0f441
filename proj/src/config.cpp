#include "icd/config.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "icd/csvio.hpp"

namespace icd {

namespace {

uint64_t parse_u64(const std::string& s) {
    size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return static_cast<uint64_t>(v);
}

int64_t parse_i64(const std::string& s) {
    size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
}

int parse_int(const std::string& s) {
    const int64_t v = parse_i64(s);
    if (v < INT32_MIN || v > INT32_MAX) throw std::invalid_argument("out of int range");
    return static_cast<int>(v);
}

double parse_f64(const std::string& s) {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("expected true/false/1/0");
}

// one table drives parsing, saving, and the unknown-key message
struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> f = [] {
        std::vector<std::pair<std::string, Field>> v;
        auto add = [&v](const std::string& key, auto setter, auto getter) {
            v.push_back({key, Field{setter, getter}});
        };
#define INT_FIELD(key, member, parser)                                              \
    add(key, [](RunConfig& c, const std::string& s) { c.member = parser(s); },      \
        [](const RunConfig& c) { return std::to_string(c.member); })
#define F64_FIELD(key, member)                                                      \
    add(key, [](RunConfig& c, const std::string& s) { c.member = parse_f64(s); },   \
        [](const RunConfig& c) { return fmt_g(c.member); })
#define STR_FIELD(key, member)                                                      \
    add(key, [](RunConfig& c, const std::string& s) { c.member = s; },              \
        [](const RunConfig& c) { return c.member; })
#define BOOL_FIELD(key, member)                                                     \
    add(key, [](RunConfig& c, const std::string& s) { c.member = parse_bool(s); },  \
        [](const RunConfig& c) { return c.member ? std::string("true") : std::string("false"); })
#define LIST_FIELD(key, member)                                                     \
    add(key, [](RunConfig& c, const std::string& s) { c.member = parse_double_list(s); }, \
        [](const RunConfig& c) { return join_double_list(c.member); })

        INT_FIELD("seed", seed, parse_u64);
        STR_FIELD("out_dir", out_dir);
        INT_FIELD("data.k", data_k, parse_int);
        F64_FIELD("data.radius", data_radius);
        F64_FIELD("data.sigma", data_sigma);
        INT_FIELD("data.count", data_count, parse_i64);
        INT_FIELD("schedule.n", sched_n, parse_int);
        INT_FIELD("schedule.t_max", sched_t_max, parse_int);
        INT_FIELD("model.hidden", model_hidden, parse_int);
        INT_FIELD("model.layers", model_layers, parse_int);
        INT_FIELD("model.time_dim", model_time_dim, parse_int);
        INT_FIELD("model.class_dim", model_class_dim, parse_int);
        INT_FIELD("model.guidance_dim", model_guidance_dim, parse_int);
        INT_FIELD("teacher.steps", teacher_steps, parse_i64);
        INT_FIELD("teacher.batch", teacher_batch, parse_i64);
        F64_FIELD("teacher.lr", teacher_lr);
        F64_FIELD("teacher.cond_drop", teacher_cond_drop);
        INT_FIELD("cfg.steps", cfg_steps, parse_i64);
        INT_FIELD("cfg.batch", cfg_batch, parse_i64);
        F64_FIELD("cfg.lr", cfg_lr);
        F64_FIELD("cfg.cond_drop", cfg_cond_drop);
        LIST_FIELD("cfg.w_set", w_set);
        INT_FIELD("icd.steps", icd_steps, parse_i64);
        INT_FIELD("icd.batch", icd_batch, parse_i64);
        F64_FIELD("icd.lr", icd_lr);
        F64_FIELD("icd.lambda_f", icd_lambda_f);
        F64_FIELD("icd.lambda_r", icd_lambda_r);
        BOOL_FIELD("icd.pres_f", icd_pres_f);
        BOOL_FIELD("icd.pres_r", icd_pres_r);
        BOOL_FIELD("icd.joint", icd_joint);
        INT_FIELD("plan.m", plan_m, parse_int);
        F64_FIELD("plan.tau", plan_tau);
        STR_FIELD("guidance.mode", guidance_mode);
        F64_FIELD("guidance.w", guidance_w);
        F64_FIELD("guidance.tau1", guidance_tau1);
        F64_FIELD("guidance.tau2", guidance_tau2);
        INT_FIELD("eval.count", eval_count, parse_i64);
        INT_FIELD("edit.shift", edit_shift, parse_int);
        LIST_FIELD("sweep.taus", sweep_taus);
        INT_FIELD("sample.k", sample_k, parse_int);
        STR_FIELD("in.teacher", in_teacher);
        STR_FIELD("in.cfg", in_cfg);
        STR_FIELD("in.cd", in_cd);
        STR_FIELD("in.fcd", in_fcd);
        STR_FIELD("plot.kind", plot_kind);
        STR_FIELD("plot.input", plot_input);
        STR_FIELD("plot.output", plot_output);
        STR_FIELD("plot.title", plot_title);
        INT_FIELD("log_every", log_every, parse_int);
#undef INT_FIELD
#undef F64_FIELD
#undef STR_FIELD
#undef BOOL_FIELD
#undef LIST_FIELD
        return v;
    }();
    return f;
}

}  // namespace

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw std::invalid_argument("empty list element");
        out.push_back(parse_f64(item));
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

std::string join_double_list(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt_g(v[i]);
    }
    return s;
}

void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& [name, field] : fields()) {
        if (name == key) {
            try {
                field.set(cfg, value);
            } catch (const std::exception& e) {
                throw std::invalid_argument("config: bad value '" + value + "' for key '" + key +
                                            "': " + e.what());
            }
            return;
        }
    }
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const size_t e = line.find_last_not_of(" \t");
        line = line.substr(b, e - b + 1);
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
            value.erase(value.begin());
        apply_kv(cfg, key, value);
    }
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    apply_config_file(cfg, path);
    return cfg;
}

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("config: cannot open " + path + " for writing");
    for (const auto& [name, field] : fields()) os << name << "=" << field.get(cfg) << "\n";
    if (!os.flush()) throw std::runtime_error("config: write failed for " + path);
}

}  // namespace icd
