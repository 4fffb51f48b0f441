#include "icd/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace icd {

const char* to_string(OdeDirection dir) {
    return dir == OdeDirection::forward ? "forward" : "reverse";
}

double dynamic_w(const GuidanceSchedule& g, int t, int t_max) {
    if (t_max <= 0) throw std::invalid_argument("dynamic_w: t_max must be positive");
    const double r = static_cast<double>(t) / t_max;
    switch (g.mode) {
        case GuidanceMode::constant:
            return g.w_max;
        case GuidanceMode::step:
            return r > g.tau1 ? 1.0 : g.w_max;
        case GuidanceMode::ramp: {
            if (g.tau2 < g.tau1)
                throw std::invalid_argument("dynamic_w: ramp needs tau1 <= tau2");
            if (r >= g.tau2) return 1.0;
            if (r <= g.tau1) return g.w_max;
            const double f = (r - g.tau1) / (g.tau2 - g.tau1);  // tau2 > tau1 here
            return g.w_max + (1.0 - g.w_max) * f;
        }
    }
    throw std::logic_error("dynamic_w: unknown guidance mode");
}

Tensor analytic_epsilon(const MixtureParams& mix, const NoiseSchedule& sc, const Tensor& x, int t,
                        const std::vector<int>& cls) {
    if (x.rank() != 2 || x.cols() != 2)
        throw std::invalid_argument("analytic_epsilon: x must be [B,2], got " + x.shape_str());
    if (cls.size() != static_cast<size_t>(x.rows()))
        throw std::invalid_argument("analytic_epsilon: one class per row required");
    const double a = sc.abar(t);
    const double ra = std::sqrt(a);
    const double s2 = a * mix.sigma * mix.sigma + (1.0 - a);
    const double coef = std::sqrt(1.0 - a) / s2;

    Tensor out({x.rows(), 2});
    std::vector<double> logw(mix.k);
    for (int64_t r = 0; r < x.rows(); ++r) {
        const double px = x.at(r, 0), py = x.at(r, 1);
        if (cls[r] != kNullClass) {
            const auto c = mix.center(cls[r]);
            out.at(r, 0) = coef * (px - ra * c[0]);
            out.at(r, 1) = coef * (py - ra * c[1]);
            continue;
        }
        // marginal: responsibility-weighted pull toward each noised center
        double mx = 0.0;
        for (int k = 0; k < mix.k; ++k) {
            const auto c = mix.center(k);
            const double dx = px - ra * c[0], dy = py - ra * c[1];
            logw[k] = -(dx * dx + dy * dy) / (2.0 * s2);
            if (k == 0 || logw[k] > mx) mx = logw[k];
        }
        double z = 0.0, cx = 0.0, cy = 0.0;
        for (int k = 0; k < mix.k; ++k) {
            const double g = std::exp(logw[k] - mx);
            const auto c = mix.center(k);
            z += g;
            cx += g * ra * c[0];
            cy += g * ra * c[1];
        }
        out.at(r, 0) = coef * (px - cx / z);
        out.at(r, 1) = coef * (py - cy / z);
    }
    return out;
}

Tensor AnalyticEps::eps_w(const Tensor& x, int t, const std::vector<int>& cls, double w) const {
    if (w == 1.0) return analytic_epsilon(mix_, *sc_, x, t, cls);
    Tensor ec = analytic_epsilon(mix_, *sc_, x, t, cls);
    Tensor eu = analytic_epsilon(mix_, *sc_, x, t, std::vector<int>(cls.size(), kNullClass));
    Tensor out(ec.shape);
    for (int64_t i = 0; i < out.numel(); ++i)
        out.data[i] = eu.data[i] + w * (ec.data[i] - eu.data[i]);
    return out;
}

Tensor cfg_epsilon(const Denoiser& den, const Tensor& x, int t, const std::vector<int>& cls,
                   double w) {
    if (w == 1.0) return den.eps(x, t, cls);
    Tensor ec = den.eps(x, t, cls);
    Tensor eu = den.eps(x, t, std::vector<int>(cls.size(), kNullClass));
    Tensor out(ec.shape);
    for (int64_t i = 0; i < out.numel(); ++i)
        out.data[i] = eu.data[i] + w * (ec.data[i] - eu.data[i]);
    return out;
}

Tensor TeacherCfg::eps_w(const Tensor& x, int t, const std::vector<int>& cls, double w) const {
    return cfg_epsilon(*den_, x, t, cls, w);
}

Tensor EmbeddedCfg::eps_w(const Tensor& x, int t, const std::vector<int>& cls, double w) const {
    const int wi = snap_ ? den_->nearest_w_index(w) : den_->w_index(w);
    return den_->eps_rows(x, std::vector<int>(x.rows(), t), cls,
                          std::vector<int>(x.rows(), wi));
}

Tensor ddim_step_with(const NoiseSchedule& sc, const Tensor& x, const Tensor& eps, int t, int s) {
    if (!x.same_shape(eps))
        throw std::invalid_argument("ddim_step: x " + x.shape_str() + " vs eps " +
                                    eps.shape_str());
    const double at = sc.abar(t), as = sc.abar(s);
    const double a = std::sqrt(as / at);
    const double b = std::sqrt(1.0 - as) - a * std::sqrt(1.0 - at);
    Tensor out(x.shape);
    for (int64_t i = 0; i < x.numel(); ++i) out.data[i] = a * x.data[i] + b * eps.data[i];
    return out;
}

Tensor ddim_step(const NoiseModel& nm, const NoiseSchedule& sc, const Tensor& x, int t, int s,
                 const std::vector<int>& cls, double w) {
    return ddim_step_with(sc, x, nm.eps_w(x, t, cls, w), t, s);
}

SolveResult ddim_solve(const NoiseModel& nm, const NoiseSchedule& sc, const Tensor& x,
                       OdeDirection dir, const std::vector<int>& cls, const GuidanceSchedule& g,
                       bool record) {
    if (cls.size() != static_cast<size_t>(x.rows()))
        throw std::invalid_argument("ddim_solve: one class per row required");
    const auto& grid = sc.grid;
    const int n = static_cast<int>(grid.size()) - 1;

    SolveResult res;
    res.x = x;
    res.times.push_back(dir == OdeDirection::reverse ? grid[n] : grid[0]);
    if (record) res.path.push_back(res.x);
    for (int i = 0; i < n; ++i) {
        int t, s;
        if (dir == OdeDirection::reverse) {
            t = grid[n - i];
            s = grid[n - i - 1];
        } else {
            t = grid[i];
            s = grid[i + 1];
        }
        const double w = dynamic_w(g, t, sc.t_max);
        res.x = ddim_step(nm, sc, res.x, t, s, cls, w);
        if (!res.x.all_finite())
            throw std::runtime_error("ddim_solve: non-finite state stepping " +
                                     std::to_string(t) + " -> " + std::to_string(s));
        res.times.push_back(s);
        if (record) res.path.push_back(res.x);
    }
    return res;
}

std::vector<ThresholdRow> threshold_sweep(const NoiseModel& nm, const NoiseSchedule& sc,
                                          const Dataset& data,
                                          const std::vector<double>& thresholds, double w_max) {
    SolveResult enc = ddim_solve(nm, sc, data.points, OdeDirection::forward, data.labels,
                                 GuidanceSchedule::unguided());
    std::vector<ThresholdRow> rows;
    rows.reserve(thresholds.size());
    for (double tau : thresholds) {
        SolveResult dec = ddim_solve(nm, sc, enc.x, OdeDirection::reverse, data.labels,
                                     GuidanceSchedule::step_w(w_max, tau));
        double se = 0.0;
        for (int64_t i = 0; i < dec.x.numel(); ++i) {
            const double d = dec.x.data[i] - data.points.data[i];
            se += d * d;
        }
        rows.push_back({tau, se / static_cast<double>(dec.x.numel())});
    }
    return rows;
}

}  // namespace icd
