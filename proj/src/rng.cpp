#include "icd/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace icd {

namespace {

// splitmix64 finalizer
inline uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(uint64_t seed) : key(mix(seed ^ 0x853c49e6748fea9bULL)), ctr(0) {}

Rng Rng::stream(uint64_t tag) const {
    Rng r;
    r.key = mix(key ^ mix(tag ^ 0xda3e39cb94b95bdbULL));
    r.ctr = 0;
    return r;
}

uint64_t Rng::next_u64() { return mix(key ^ ctr++); }

double Rng::u01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    // u in (0,1] so log stays finite
    const double u = 1.0 - u01();
    const double v = u01();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

int64_t Rng::uniform_int(int64_t n) {
    if (n <= 0) throw std::invalid_argument("rng: uniform_int needs n > 0");
    // rejection-free: bias is negligible for n << 2^64 and determinism matters more
    return static_cast<int64_t>(next_u64() % static_cast<uint64_t>(n));
}

void Rng::fill_normal(Tensor& t) { fill_normal(t.data.data(), t.numel()); }

void Rng::fill_normal(double* p, int64_t n) {
    for (int64_t i = 0; i < n; ++i) p[i] = normal();
}

}  // namespace icd
