// Splittable counter-based RNG. Every generator is a pure function of
// (seed, stream path, draw counter), so batch elements can be generated in
// any order or in parallel and still reproduce the serial sequence.
#pragma once

#include <cstdint>

#include "icd/tensor.hpp"

namespace icd {

struct Rng {
    uint64_t key = 0;
    uint64_t ctr = 0;

    explicit Rng(uint64_t seed);
    Rng() = default;

    // derive an independent substream; does not advance this generator
    Rng stream(uint64_t tag) const;

    uint64_t next_u64();
    double u01();                       // uniform [0, 1)
    double normal();                    // standard normal (Box-Muller)
    int64_t uniform_int(int64_t n);     // uniform {0, ..., n-1}
    void fill_normal(Tensor& t);
    void fill_normal(double* p, int64_t n);
};

// common stream tags (values arbitrary but frozen: they are part of what a
// seed reproduces)
namespace streams {
constexpr uint64_t dataset = 1;
constexpr uint64_t init = 2;
constexpr uint64_t train = 3;
constexpr uint64_t eval = 4;
constexpr uint64_t sampler = 5;
}  // namespace streams

}  // namespace icd
