#include "icd/denoiser.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "icd/dataset.hpp"
#include "icd/kernels.hpp"

namespace icd {

namespace {

Tensor make_time_table(int t_max, int time_dim) {
    if (time_dim < 2 || time_dim % 2 != 0)
        throw std::invalid_argument("time_dim must be even and >= 2, got " +
                                    std::to_string(time_dim));
    const int half = time_dim / 2;
    Tensor tab({t_max, time_dim});
    const double denom = half > 1 ? static_cast<double>(half - 1) : 1.0;
    for (int t = 0; t < t_max; ++t) {
        for (int i = 0; i < half; ++i) {
            const double freq = std::exp(-std::log(10000.0) * i / denom);
            const double arg = t * freq;
            tab.at(t, i) = std::sin(arg);
            tab.at(t, half + i) = std::cos(arg);
        }
    }
    return tab;
}

void check_rows(const Denoiser& d, const Tensor& x, const std::vector<int>& t,
                const std::vector<int>& cls, const std::vector<int>& widx) {
    if (x.rank() != 2 || x.cols() != d.cfg.x_dim)
        throw std::invalid_argument("denoiser: x must be [B," + std::to_string(d.cfg.x_dim) +
                                    "], got " + x.shape_str());
    const auto b = static_cast<size_t>(x.rows());
    if (t.size() != b || cls.size() != b)
        throw std::invalid_argument("denoiser: t/cls size must match batch rows");
    if (d.cfg.has_guidance) {
        if (widx.size() != b)
            throw std::invalid_argument("denoiser: guidance model needs one w index per row");
    } else if (!widx.empty()) {
        throw std::invalid_argument("denoiser: model has no guidance embedding");
    }
    for (int tt : t)
        if (tt < 0 || tt >= d.cfg.t_max)
            throw std::out_of_range("denoiser: timestep " + std::to_string(tt) +
                                    " outside [0," + std::to_string(d.cfg.t_max) + ")");
    for (int wi : widx)
        if (wi < 0 || wi >= static_cast<int>(d.cfg.w_set.size()))
            throw std::out_of_range("denoiser: guidance index out of range");
}

}  // namespace

Denoiser Denoiser::create(const DenoiserConfig& cfg, Rng rng) {
    if (cfg.has_guidance && cfg.w_set.empty())
        throw std::invalid_argument("denoiser: guidance model needs a non-empty w_set");
    if (!cfg.has_guidance && !cfg.w_set.empty())
        throw std::invalid_argument("denoiser: w_set given but has_guidance is false");
    Denoiser d;
    d.cfg = cfg;
    d.time_table = make_time_table(cfg.t_max, cfg.time_dim);

    Rng init = rng.stream(streams::init);
    d.class_table = Tensor({cfg.num_classes + 1, cfg.class_dim});
    for (auto& v : d.class_table.data) v = 0.1 * init.normal();
    if (cfg.has_guidance) {
        d.guidance_table = Tensor({static_cast<int64_t>(cfg.w_set.size()), cfg.guidance_dim});
        for (auto& v : d.guidance_table.data) v = 0.1 * init.normal();
    }

    int in = cfg.input_dim();
    for (int l = 0; l < cfg.hidden_layers; ++l) {
        Tensor w({in, cfg.hidden});
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (auto& v : w.data) v = scale * init.normal();
        d.weights.push_back(std::move(w));
        d.biases.push_back(Tensor::zeros({cfg.hidden}));
        in = cfg.hidden;
    }
    // zero output head: the fresh net predicts zero noise everywhere
    d.weights.push_back(Tensor::zeros({in, cfg.x_dim}));
    d.biases.push_back(Tensor::zeros({cfg.x_dim}));
    if (cfg.has_guidance) {
        d.delta_w = Tensor::zeros({in, cfg.x_dim});
        d.delta_b = Tensor::zeros({cfg.x_dim});
    }
    return d;
}

int Denoiser::class_row(int cls) const {
    if (cls == kNullClass) return cfg.num_classes;
    if (cls < 0 || cls >= cfg.num_classes)
        throw std::out_of_range("denoiser: class " + std::to_string(cls) + " outside [0," +
                                std::to_string(cfg.num_classes) + ") and not the null class");
    return cls;
}

int Denoiser::w_index(double w) const {
    for (size_t i = 0; i < cfg.w_set.size(); ++i)
        if (cfg.w_set[i] == w) return static_cast<int>(i);
    throw std::invalid_argument("denoiser: guidance scale " + std::to_string(w) +
                                " is not in the embedded w_set");
}

int Denoiser::nearest_w_index(double w) const {
    if (cfg.w_set.empty()) throw std::logic_error("denoiser: empty w_set");
    size_t best = 0;
    for (size_t i = 1; i < cfg.w_set.size(); ++i)
        if (std::abs(cfg.w_set[i] - w) < std::abs(cfg.w_set[best] - w)) best = i;
    return static_cast<int>(best);
}

int64_t Denoiser::param_count() const {
    int64_t n = class_table.numel() + guidance_table.numel() + delta_w.numel() + delta_b.numel();
    for (const auto& w : weights) n += w.numel();
    for (const auto& b : biases) n += b.numel();
    return n;
}

Tensor Denoiser::eps_rows(const Tensor& x, const std::vector<int>& t, const std::vector<int>& cls,
                          const std::vector<int>& widx) const {
    check_rows(*this, x, t, cls, widx);
    ++eval_count;
    const int64_t b = x.rows();
    const int in_dim = cfg.input_dim();
    Tensor input({b, in_dim});
    for (int64_t r = 0; r < b; ++r) {
        double* row = input.data.data() + r * in_dim;
        int off = 0;
        for (int j = 0; j < cfg.x_dim; ++j) row[off++] = x.at(r, j);
        const double* te = time_table.data.data() + static_cast<int64_t>(t[r]) * cfg.time_dim;
        for (int j = 0; j < cfg.time_dim; ++j) row[off++] = te[j];
        const double* ce =
            class_table.data.data() + static_cast<int64_t>(class_row(cls[r])) * cfg.class_dim;
        for (int j = 0; j < cfg.class_dim; ++j) row[off++] = ce[j];
        if (cfg.has_guidance) {
            const double* ge =
                guidance_table.data.data() + static_cast<int64_t>(widx[r]) * cfg.guidance_dim;
            for (int j = 0; j < cfg.guidance_dim; ++j) row[off++] = ge[j];
        }
    }

    Tensor h = std::move(input);
    for (size_t l = 0; l < weights.size(); ++l) {
        const Tensor& w = weights[l];
        Tensor out({h.rows(), w.cols()});
        kern::matmul_nn(h.data.data(), w.data.data(), out.data.data(), h.rows(), h.cols(),
                        w.cols());
        const Tensor& bias = biases[l];
        for (int64_t r = 0; r < out.rows(); ++r)
            for (int64_t j = 0; j < out.cols(); ++j) out.at(r, j) += bias.data[j];
        if (l + 1 < weights.size()) {
            kern::vtanh(out.data.data(), out.data.data(), out.numel());
            h = std::move(out);
        } else if (!cfg.has_guidance) {
            h = std::move(out);
        } else {
            // guided head: out + w * (h . delta_w + delta_b), with the same
            // operation order as the tape path (multiply, then add)
            Tensor dd({h.rows(), delta_w.cols()});
            kern::matmul_nn(h.data.data(), delta_w.data.data(), dd.data.data(), h.rows(),
                            h.cols(), delta_w.cols());
            for (int64_t r = 0; r < dd.rows(); ++r)
                for (int64_t j = 0; j < dd.cols(); ++j) dd.at(r, j) += delta_b.data[j];
            for (int64_t r = 0; r < dd.rows(); ++r) {
                const double wv = cfg.w_set[static_cast<size_t>(widx[static_cast<size_t>(r)])];
                for (int64_t j = 0; j < dd.cols(); ++j) {
                    dd.at(r, j) = wv * dd.at(r, j);
                    out.at(r, j) = out.at(r, j) + dd.at(r, j);
                }
            }
            h = std::move(out);
        }
    }
    return h;
}

Tensor Denoiser::eps(const Tensor& x, int t, const std::vector<int>& cls) const {
    return eps_rows(x, std::vector<int>(x.rows(), t), cls, {});
}

Tensor Denoiser::eps(const Tensor& x, int t, const std::vector<int>& cls, double w) const {
    return eps_rows(x, std::vector<int>(x.rows(), t), cls,
                    std::vector<int>(x.rows(), w_index(w)));
}

Denoiser widen_with_guidance(const Denoiser& teacher, const std::vector<double>& w_set,
                             int guidance_dim, Rng rng) {
    if (teacher.cfg.has_guidance)
        throw std::invalid_argument("widen_with_guidance: teacher already has guidance inputs");
    if (w_set.empty()) throw std::invalid_argument("widen_with_guidance: empty w_set");
    Denoiser s;
    s.cfg = teacher.cfg;
    s.cfg.has_guidance = true;
    s.cfg.guidance_dim = guidance_dim;
    s.cfg.w_set = w_set;
    s.time_table = teacher.time_table;
    s.class_table = teacher.class_table;

    Rng init = rng.stream(streams::init);
    s.guidance_table = Tensor({static_cast<int64_t>(w_set.size()), guidance_dim});
    for (auto& v : s.guidance_table.data) v = 0.1 * init.normal();

    // first layer grows by guidance_dim input rows, all zero: output at
    // initialisation is the teacher's output for every embedded w
    const Tensor& w0 = teacher.weights[0];
    Tensor w0s({w0.rows() + guidance_dim, w0.cols()});
    std::fill(w0s.data.begin(), w0s.data.end(), 0.0);
    for (int64_t r = 0; r < w0.rows(); ++r)
        for (int64_t c = 0; c < w0.cols(); ++c) w0s.at(r, c) = w0.at(r, c);
    s.weights.push_back(std::move(w0s));
    for (size_t l = 1; l < teacher.weights.size(); ++l) s.weights.push_back(teacher.weights[l]);
    s.biases = teacher.biases;
    // zero w-scaled head: the student starts exactly at the teacher
    s.delta_w = Tensor::zeros({teacher.weights.back().rows(), teacher.cfg.x_dim});
    s.delta_b = Tensor::zeros({teacher.cfg.x_dim});
    return s;
}

DenoiserGrads DenoiserGrads::like(const Denoiser& d) {
    DenoiserGrads g;
    for (const auto& w : d.weights) g.weights.push_back(Tensor::zeros(w.shape));
    for (const auto& b : d.biases) g.biases.push_back(Tensor::zeros(b.shape));
    g.class_table = Tensor::zeros(d.class_table.shape);
    if (d.cfg.has_guidance) {
        g.guidance_table = Tensor::zeros(d.guidance_table.shape);
        g.delta_w = Tensor::zeros(d.delta_w.shape);
        g.delta_b = Tensor::zeros(d.delta_b.shape);
    }
    return g;
}

void DenoiserGrads::zero() {
    auto z = [](Tensor& t) { std::fill(t.data.begin(), t.data.end(), 0.0); };
    for (auto& w : weights) z(w);
    for (auto& b : biases) z(b);
    z(class_table);
    z(guidance_table);
    z(delta_w);
    z(delta_b);
}

double DenoiserGrads::sq_norm() const {
    double s = 0.0;
    auto acc = [&s](const Tensor& t) {
        for (double v : t.data) s += v * v;
    };
    for (const auto& w : weights) acc(w);
    for (const auto& b : biases) acc(b);
    acc(class_table);
    acc(guidance_table);
    acc(delta_w);
    acc(delta_b);
    return s;
}

DenoiserOpt DenoiserOpt::like(const Denoiser& d) {
    DenoiserOpt o;
    o.weights.resize(d.weights.size());
    o.biases.resize(d.biases.size());
    return o;
}

void apply_adam(Denoiser& d, const DenoiserGrads& g, DenoiserOpt& opt, double lr) {
    for (size_t l = 0; l < d.weights.size(); ++l) {
        ad::adam_step(d.weights[l], g.weights[l], opt.weights[l], lr);
        ad::adam_step(d.biases[l], g.biases[l], opt.biases[l], lr);
    }
    ad::adam_step(d.class_table, g.class_table, opt.class_table, lr);
    if (d.cfg.has_guidance) {
        ad::adam_step(d.guidance_table, g.guidance_table, opt.guidance_table, lr);
        ad::adam_step(d.delta_w, g.delta_w, opt.delta_w, lr);
        ad::adam_step(d.delta_b, g.delta_b, opt.delta_b, lr);
    }
}

double decayed_lr(double base_lr, int64_t step, int64_t total_steps, double floor) {
    if (total_steps <= 1) return base_lr;
    const double u = static_cast<double>(step) / static_cast<double>(total_steps - 1);
    const double cos_part = 0.5 * (1.0 + std::cos(u * 3.14159265358979323846));
    return base_lr * (floor + (1.0 - floor) * cos_part);
}

DenoiserBinding bind_params(ad::Tape& tape, const Denoiser& d, DenoiserGrads& g) {
    DenoiserBinding b;
    for (size_t l = 0; l < d.weights.size(); ++l) {
        b.weights.push_back(tape.param(&d.weights[l], &g.weights[l]));
        b.biases.push_back(tape.param(&d.biases[l], &g.biases[l]));
    }
    b.class_table = tape.param(&d.class_table, &g.class_table);
    if (d.cfg.has_guidance) {
        b.guidance_table = tape.param(&d.guidance_table, &g.guidance_table);
        b.delta_w = tape.param(&d.delta_w, &g.delta_w);
        b.delta_b = tape.param(&d.delta_b, &g.delta_b);
    }
    return b;
}

ad::ValueId eps_graph(ad::Tape& tape, const Denoiser& d, const DenoiserBinding& b, const Tensor& x,
                      const std::vector<int>& t, const std::vector<int>& cls,
                      const std::vector<int>& widx) {
    check_rows(d, x, t, cls, widx);
    const int64_t rows = x.rows();

    Tensor temb({rows, d.cfg.time_dim});
    for (int64_t r = 0; r < rows; ++r)
        for (int j = 0; j < d.cfg.time_dim; ++j) temb.at(r, j) = d.time_table.at(t[r], j);

    std::vector<int64_t> cls_rows(rows), w_rows(widx.size());
    for (int64_t r = 0; r < rows; ++r) cls_rows[r] = d.class_row(cls[r]);
    for (size_t r = 0; r < widx.size(); ++r) w_rows[r] = widx[r];

    std::vector<ad::ValueId> parts;
    parts.push_back(tape.constant(x));
    parts.push_back(tape.constant(temb));
    parts.push_back(tape.gather_rows(b.class_table, cls_rows));
    if (d.cfg.has_guidance) parts.push_back(tape.gather_rows(b.guidance_table, w_rows));

    ad::ValueId h = tape.concat_cols(parts);
    for (size_t l = 0; l + 1 < d.weights.size(); ++l)
        h = tape.tanh_act(tape.add_bias(tape.matmul(h, b.weights[l]), b.biases[l]));
    ad::ValueId out = tape.add_bias(tape.matmul(h, b.weights.back()), b.biases.back());
    if (d.cfg.has_guidance) {
        Tensor wv({rows});
        for (int64_t r = 0; r < rows; ++r)
            wv.data[static_cast<size_t>(r)] =
                d.cfg.w_set[static_cast<size_t>(widx[static_cast<size_t>(r)])];
        ad::ValueId dd = tape.add_bias(tape.matmul(h, b.delta_w), b.delta_b);
        out = tape.add(out, tape.row_scale(dd, wv));
    }
    return out;
}

}  // namespace icd
