#include "icd/inversion.hpp"

#include <cmath>
#include <stdexcept>

namespace icd {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // ln(2*pi)

void check_dir(const ConsistencyModel& cm, OdeDirection want, const char* who) {
    if (cm.dir != want)
        throw std::invalid_argument(std::string(who) + ": student direction mismatch");
}

}  // namespace

Tensor encode(const ConsistencyModel& fcd, const NoiseSchedule& sc, const Tensor& x0,
              const std::vector<int>& cls, std::vector<Tensor>* path) {
    check_dir(fcd, OdeDirection::forward, "encode");
    const auto& e = fcd.plan.edges;
    Tensor x = x0;
    if (path) path->push_back(x);
    for (size_t i = 0; i + 1 < e.size(); ++i) {
        x = consistency_jump(fcd, sc, x, e[i], e[i + 1], cls, 1.0);
        if (path) path->push_back(x);
    }
    return x;
}

Tensor decode(const ConsistencyModel& cd, const NoiseSchedule& sc, const Tensor& z,
              const std::vector<int>& cls, const GuidanceSchedule& g,
              std::vector<Tensor>* path) {
    check_dir(cd, OdeDirection::reverse, "decode");
    const auto& e = cd.plan.edges;
    Tensor x = z;
    if (path) path->push_back(x);
    for (size_t i = e.size() - 1; i > 0; --i) {
        const double w = dynamic_w(g, e[i], sc.t_max);
        x = consistency_jump(cd, sc, x, e[i], e[i - 1], cls, w, /*snap=*/true);
        if (path) path->push_back(x);
    }
    return x;
}

Tensor encode_with(const NoiseModel& nm, const NoiseSchedule& sc, const BoundaryPlan& plan,
                   const Tensor& x0, const std::vector<int>& cls, const GuidanceSchedule& g,
                   std::vector<Tensor>* path) {
    const auto& e = plan.edges;
    Tensor x = x0;
    if (path) path->push_back(x);
    for (size_t i = 0; i + 1 < e.size(); ++i) {
        const double w = dynamic_w(g, e[i], sc.t_max);
        x = ddim_step(nm, sc, x, e[i], e[i + 1], cls, w);
        if (path) path->push_back(x);
    }
    return x;
}

Tensor decode_with(const NoiseModel& nm, const NoiseSchedule& sc, const BoundaryPlan& plan,
                   const Tensor& z, const std::vector<int>& cls, const GuidanceSchedule& g,
                   std::vector<Tensor>* path) {
    const auto& e = plan.edges;
    Tensor x = z;
    if (path) path->push_back(x);
    for (size_t i = e.size() - 1; i > 0; --i) {
        const double w = dynamic_w(g, e[i], sc.t_max);
        x = ddim_step(nm, sc, x, e[i], e[i - 1], cls, w);
        if (path) path->push_back(x);
    }
    return x;
}

double latent_nll(const Tensor& z) {
    if (z.numel() == 0) throw std::invalid_argument("latent_nll: empty tensor");
    double s = 0.0;
    for (double v : z.data) s += 0.5 * (v * v + kLog2Pi);
    return s / static_cast<double>(z.numel());
}

RoundtripReport roundtrip_eval(const ConsistencyModel& fcd, const ConsistencyModel& cd,
                               const NoiseSchedule& sc, const Dataset& data,
                               const GuidanceSchedule& decode_g) {
    if (!fcd.plan.same_layout(cd.plan))
        throw std::invalid_argument("roundtrip_eval: students use different boundary plans");
    RoundtripReport rep;
    rep.count = data.points.rows();
    Tensor z = encode(fcd, sc, data.points, data.labels);
    rep.nll = latent_nll(z);
    Tensor back = decode(cd, sc, z, data.labels, decode_g);
    double se = 0.0;
    for (int64_t i = 0; i < back.numel(); ++i) {
        const double d = back.data[i] - data.points.data[i];
        se += d * d;
    }
    rep.mse = se / static_cast<double>(back.numel());
    return rep;
}

}  // namespace icd
