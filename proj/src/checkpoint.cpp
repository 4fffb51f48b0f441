#include "icd/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace icd {

namespace {

constexpr char kMagic[4] = {'I', 'C', 'D', '1'};
constexpr uint32_t kVersion = 1;

// explicit little-endian primitives so files are portable across hosts
void put_bytes(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put_le(std::ostream& os, T v) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(v);
    for (size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(u >> (8 * i));
    put_bytes(os, buf, sizeof(T));
}

void put_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_le(os, bits);
}

void put_str(std::ostream& os, const std::string& s) {
    put_le<uint32_t>(os, static_cast<uint32_t>(s.size()));
    put_bytes(os, s.data(), s.size());
}

void put_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
    put_str(os, name);
    put_le<uint32_t>(os, static_cast<uint32_t>(t.shape.size()));
    for (int64_t d : t.shape) put_le<int64_t>(os, d);
    for (double v : t.data) put_f64(os, v);
}

void get_bytes(std::istream& is, void* p, size_t n, const char* what) {
    if (!is.read(static_cast<char*>(p), static_cast<std::streamsize>(n)))
        throw std::runtime_error(std::string("checkpoint: truncated while reading ") + what);
}

template <typename T>
T get_le(std::istream& is, const char* what) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    get_bytes(is, buf, sizeof(T), what);
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(buf[i]) << (8 * i);
    return static_cast<T>(u);
}

double get_f64(std::istream& is, const char* what) {
    uint64_t bits = get_le<uint64_t>(is, what);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

std::string get_str(std::istream& is, const char* what) {
    uint32_t n = get_le<uint32_t>(is, what);
    if (n > (1u << 20)) throw std::runtime_error("checkpoint: implausible string length");
    std::string s(n, '\0');
    get_bytes(is, s.data(), n, what);
    return s;
}

Tensor get_tensor(std::istream& is, std::string* name) {
    *name = get_str(is, "tensor name");
    uint32_t rank = get_le<uint32_t>(is, "tensor rank");
    if (rank > 8) throw std::runtime_error("checkpoint: implausible tensor rank");
    std::vector<int64_t> shape(rank);
    for (auto& d : shape) d = get_le<int64_t>(is, "tensor shape");
    Tensor t(shape);
    for (auto& v : t.data) v = get_f64(is, "tensor data");
    return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& kind, const Denoiser& den,
                     const NoiseSchedule& sc, const MixtureParams& mix, const BoundaryPlan* plan,
                     OdeDirection dir) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");

    put_bytes(os, kMagic, 4);
    put_le<uint32_t>(os, kVersion);
    put_str(os, kind);

    put_le<int32_t>(os, sc.n_steps);
    put_le<int32_t>(os, sc.t_max);

    put_le<int32_t>(os, mix.k);
    put_f64(os, mix.radius);
    put_f64(os, mix.sigma);

    const auto& c = den.cfg;
    put_le<int32_t>(os, c.x_dim);
    put_le<int32_t>(os, c.time_dim);
    put_le<int32_t>(os, c.class_dim);
    put_le<int32_t>(os, c.guidance_dim);
    put_le<int32_t>(os, c.hidden);
    put_le<int32_t>(os, c.hidden_layers);
    put_le<int32_t>(os, c.num_classes);
    put_le<int32_t>(os, c.t_max);
    put_le<uint8_t>(os, c.has_guidance ? 1 : 0);
    put_le<uint32_t>(os, static_cast<uint32_t>(c.w_set.size()));
    for (double w : c.w_set) put_f64(os, w);

    put_le<uint8_t>(os, plan ? 1 : 0);
    if (plan) {
        put_le<int32_t>(os, plan->m);
        put_f64(os, plan->tau);
        put_le<uint32_t>(os, static_cast<uint32_t>(plan->edges.size()));
        for (int e : plan->edges) put_le<int32_t>(os, e);
    }
    put_le<uint8_t>(os, dir == OdeDirection::forward ? 1 : 0);

    uint32_t count = static_cast<uint32_t>(den.weights.size() + den.biases.size()) + 1 +
                     (c.has_guidance ? 3 : 0);
    put_le<uint32_t>(os, count);
    for (size_t l = 0; l < den.weights.size(); ++l) {
        put_tensor(os, "w" + std::to_string(l), den.weights[l]);
        put_tensor(os, "b" + std::to_string(l), den.biases[l]);
    }
    put_tensor(os, "class_table", den.class_table);
    if (c.has_guidance) {
        put_tensor(os, "guidance_table", den.guidance_table);
        put_tensor(os, "delta_w", den.delta_w);
        put_tensor(os, "delta_b", den.delta_b);
    }

    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

void save_checkpoint(const std::string& path, const ConsistencyModel& cm, const NoiseSchedule& sc,
                     const MixtureParams& mix) {
    save_checkpoint(path, cm.dir == OdeDirection::forward ? "fcd" : "cd", cm.den, sc, mix,
                    &cm.plan, cm.dir);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);

    char magic[4];
    get_bytes(is, magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: " + path + " is not a model checkpoint");
    const uint32_t version = get_le<uint32_t>(is, "version");
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

    LoadedCheckpoint lc;
    lc.kind = get_str(is, "kind");

    const int n = get_le<int32_t>(is, "schedule steps");
    const int t_max = get_le<int32_t>(is, "schedule t_max");
    lc.sched = make_schedule(n, t_max);

    lc.mixture.k = get_le<int32_t>(is, "mixture k");
    lc.mixture.radius = get_f64(is, "mixture radius");
    lc.mixture.sigma = get_f64(is, "mixture sigma");

    DenoiserConfig c;
    c.x_dim = get_le<int32_t>(is, "x_dim");
    c.time_dim = get_le<int32_t>(is, "time_dim");
    c.class_dim = get_le<int32_t>(is, "class_dim");
    c.guidance_dim = get_le<int32_t>(is, "guidance_dim");
    c.hidden = get_le<int32_t>(is, "hidden");
    c.hidden_layers = get_le<int32_t>(is, "hidden_layers");
    c.num_classes = get_le<int32_t>(is, "num_classes");
    c.t_max = get_le<int32_t>(is, "net t_max");
    c.has_guidance = get_le<uint8_t>(is, "has_guidance") != 0;
    const uint32_t nw = get_le<uint32_t>(is, "w_set size");
    c.w_set.resize(nw);
    for (auto& w : c.w_set) w = get_f64(is, "w_set");

    lc.has_plan = get_le<uint8_t>(is, "plan flag") != 0;
    if (lc.has_plan) {
        lc.plan.m = get_le<int32_t>(is, "plan m");
        lc.plan.tau = get_f64(is, "plan tau");
        const uint32_t ne = get_le<uint32_t>(is, "edge count");
        lc.plan.edges.resize(ne);
        for (auto& e : lc.plan.edges) e = get_le<int32_t>(is, "edge");
        lc.plan.grid = lc.sched.grid;
        if (ne != static_cast<uint32_t>(lc.plan.m) + 1)
            throw std::runtime_error("checkpoint: plan edge count does not match m");
    }
    lc.dir = get_le<uint8_t>(is, "direction") != 0 ? OdeDirection::forward
                                                   : OdeDirection::reverse;

    lc.den = Denoiser::create(c, Rng(0));
    const uint32_t count = get_le<uint32_t>(is, "tensor count");
    for (uint32_t i = 0; i < count; ++i) {
        std::string name;
        Tensor t = get_tensor(is, &name);
        Tensor* dst = nullptr;
        if (name == "class_table") {
            dst = &lc.den.class_table;
        } else if (name == "guidance_table") {
            dst = &lc.den.guidance_table;
        } else if (name == "delta_w") {
            dst = &lc.den.delta_w;
        } else if (name == "delta_b") {
            dst = &lc.den.delta_b;
        } else if (name.size() >= 2 && (name[0] == 'w' || name[0] == 'b')) {
            const size_t l = std::stoul(name.substr(1));
            auto& vec = name[0] == 'w' ? lc.den.weights : lc.den.biases;
            if (l >= vec.size())
                throw std::runtime_error("checkpoint: layer index out of range: " + name);
            dst = &vec[l];
        } else {
            throw std::runtime_error("checkpoint: unknown tensor " + name);
        }
        if (dst->shape != t.shape)
            throw std::runtime_error("checkpoint: shape mismatch for tensor " + name);
        *dst = std::move(t);
    }
    return lc;
}

ConsistencyModel LoadedCheckpoint::consistency() const {
    if (!has_plan)
        throw std::runtime_error("checkpoint: '" + kind + "' carries no boundary plan");
    return ConsistencyModel{den, dir, plan};
}

}  // namespace icd
