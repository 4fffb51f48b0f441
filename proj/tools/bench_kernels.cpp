// Compares the serial reference kernels against the parallel dispatch path:
// verifies bit-identical results, then times both on training-shaped work.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "icd/kernels.hpp"
#include "icd/rng.hpp"
#include "icd/tensor.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Case {
    int64_t m, k, n;
    int reps;
};

}  // namespace

int main() {
    std::printf("kernel dispatch: %s, omp threads: %d\n",
                icd::kern::mode() == icd::kern::Mode::serial ? "serial" : "parallel",
                icd::kern::thread_count());

    const Case cases[] = {{64, 186, 128, 400}, {128, 128, 128, 400}, {512, 128, 2, 400}};
    icd::Rng rng(7);

    bool all_exact = true;
    for (const Case& c : cases) {
        icd::Tensor a({c.m, c.k}), b({c.k, c.n});
        rng.fill_normal(a.data.data(), a.numel());
        rng.fill_normal(b.data.data(), b.numel());
        icd::Tensor out_s({c.m, c.n}), out_p({c.m, c.n});

        icd::kern::matmul_nn_serial(a.data.data(), b.data.data(), out_s.data.data(), c.m, c.k,
                                    c.n);
        icd::kern::matmul_nn_parallel(a.data.data(), b.data.data(), out_p.data.data(), c.m, c.k,
                                      c.n);
        const bool exact = icd::bit_equal(out_s, out_p);
        all_exact = all_exact && exact;

        auto t0 = Clock::now();
        for (int r = 0; r < c.reps; ++r)
            icd::kern::matmul_nn_serial(a.data.data(), b.data.data(), out_s.data.data(), c.m, c.k,
                                        c.n);
        const double ts = seconds_since(t0);

        t0 = Clock::now();
        for (int r = 0; r < c.reps; ++r)
            icd::kern::matmul_nn_parallel(a.data.data(), b.data.data(), out_p.data.data(), c.m,
                                          c.k, c.n);
        const double tp = seconds_since(t0);

        const double flops = 2.0 * c.m * c.k * c.n * c.reps;
        std::printf(
            "matmul %4lld x %4lld x %4lld: serial %7.1f ms (%6.2f GFLOP/s), parallel %7.1f ms "
            "(%6.2f GFLOP/s), speedup %.2fx, bit-identical: %s\n",
            static_cast<long long>(c.m), static_cast<long long>(c.k),
            static_cast<long long>(c.n), ts * 1e3, flops / ts * 1e-9, tp * 1e3,
            flops / tp * 1e-9, ts / tp, exact ? "yes" : "NO");
    }

    // elementwise kernels on a training-sized buffer
    {
        const int64_t n = 1 << 20;
        std::vector<double> x(n), y_s(n), y_p(n);
        rng.fill_normal(x.data(), n);

        auto t0 = Clock::now();
        for (int r = 0; r < 40; ++r) icd::kern::vtanh_serial(x.data(), y_s.data(), n);
        const double ts = seconds_since(t0);
        t0 = Clock::now();
        for (int r = 0; r < 40; ++r) icd::kern::vtanh_parallel(x.data(), y_p.data(), n);
        const double tp = seconds_since(t0);
        const bool exact = std::memcmp(y_s.data(), y_p.data(), sizeof(double) * n) == 0;
        all_exact = all_exact && exact;
        std::printf("vtanh  %lld elems: serial %7.1f ms, parallel %7.1f ms, speedup %.2fx, "
                    "bit-identical: %s\n",
                    static_cast<long long>(n), ts * 1e3, tp * 1e3, ts / tp,
                    exact ? "yes" : "NO");
    }

    std::printf("result: %s\n", all_exact ? "parallel path matches serial bit-for-bit"
                                          : "MISMATCH between serial and parallel kernels");
    return all_exact ? 0 : 1;
}
