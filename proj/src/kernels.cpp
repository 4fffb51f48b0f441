#include "icd/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace icd::kern {

namespace {

Mode g_mode = [] {
    const char* e = std::getenv("ICD_KERNELS");
    if (e && std::strcmp(e, "serial") == 0) return Mode::serial;
    return Mode::parallel;
}();

// below this many output elements the fork/join overhead dominates
constexpr int64_t kParallelCutoff = 4096;

}  // namespace

Mode mode() { return g_mode; }
void set_mode(Mode m) { g_mode = m; }

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// ---- matmul ----
// i-k-j loop order: row of C accumulated with k ascending, identical in the
// serial and parallel variants.

void matmul_nn_serial(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n) {
    for (int64_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        for (int64_t j = 0; j < n; ++j) ci[j] = 0.0;
        const double* ai = a + i * k;
        for (int64_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + p * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void matmul_nn_parallel(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n) {
#ifdef _OPENMP
    if (m * n >= kParallelCutoff) {
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < m; ++i) {
            double* ci = c + i * n;
            for (int64_t j = 0; j < n; ++j) ci[j] = 0.0;
            const double* ai = a + i * k;
            for (int64_t p = 0; p < k; ++p) {
                const double aip = ai[p];
                const double* bp = b + p * n;
                for (int64_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
            }
        }
        return;
    }
#endif
    matmul_nn_serial(a, b, c, m, k, n);
}

void matmul_nt_serial(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n) {
    for (int64_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (int64_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double s = 0.0;
            for (int64_t p = 0; p < k; ++p) s += ai[p] * bj[p];
            ci[j] = s;
        }
    }
}

void matmul_nt_parallel(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n) {
#ifdef _OPENMP
    if (m * n >= kParallelCutoff) {
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < m; ++i) {
            const double* ai = a + i * k;
            double* ci = c + i * n;
            for (int64_t j = 0; j < n; ++j) {
                const double* bj = b + j * k;
                double s = 0.0;
                for (int64_t p = 0; p < k; ++p) s += ai[p] * bj[p];
                ci[j] = s;
            }
        }
        return;
    }
#endif
    matmul_nt_serial(a, b, c, m, k, n);
}

void matmul_tn_serial(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n) {
    for (int64_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        for (int64_t j = 0; j < n; ++j) ci[j] = 0.0;
        for (int64_t p = 0; p < k; ++p) {
            const double api = a[p * m + i];
            const double* bp = b + p * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
}

void matmul_tn_parallel(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n) {
#ifdef _OPENMP
    if (m * n >= kParallelCutoff) {
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < m; ++i) {
            double* ci = c + i * n;
            for (int64_t j = 0; j < n; ++j) ci[j] = 0.0;
            for (int64_t p = 0; p < k; ++p) {
                const double api = a[p * m + i];
                const double* bp = b + p * n;
                for (int64_t j = 0; j < n; ++j) ci[j] += api * bp[j];
            }
        }
        return;
    }
#endif
    matmul_tn_serial(a, b, c, m, k, n);
}

// ---- elementwise ----

void vtanh_serial(const double* x, double* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vtanh_parallel(const double* x, double* y, int64_t n) {
#ifdef _OPENMP
    if (n >= kParallelCutoff) {
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
        return;
    }
#endif
    vtanh_serial(x, y, n);
}

void vaxpby_serial(const double* x, double a, double b, double* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void vaxpby_parallel(const double* x, double a, double b, double* y, int64_t n) {
#ifdef _OPENMP
    if (n >= kParallelCutoff) {
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
        return;
    }
#endif
    vaxpby_serial(x, a, b, y, n);
}

void vmul_serial(const double* x, const double* y, double* z, int64_t n) {
    for (int64_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void vmul_parallel(const double* x, const double* y, double* z, int64_t n) {
#ifdef _OPENMP
    if (n >= kParallelCutoff) {
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
        return;
    }
#endif
    vmul_serial(x, y, z, n);
}

// ---- dispatch ----

void matmul_nn(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n) {
    g_mode == Mode::serial ? matmul_nn_serial(a, b, c, m, k, n) : matmul_nn_parallel(a, b, c, m, k, n);
}
void matmul_nt(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n) {
    g_mode == Mode::serial ? matmul_nt_serial(a, b, c, m, k, n) : matmul_nt_parallel(a, b, c, m, k, n);
}
void matmul_tn(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n) {
    g_mode == Mode::serial ? matmul_tn_serial(a, b, c, m, k, n) : matmul_tn_parallel(a, b, c, m, k, n);
}
void vtanh(const double* x, double* y, int64_t n) {
    g_mode == Mode::serial ? vtanh_serial(x, y, n) : vtanh_parallel(x, y, n);
}
void vaxpby(const double* x, double a, double b, double* y, int64_t n) {
    g_mode == Mode::serial ? vaxpby_serial(x, a, b, y, n) : vaxpby_parallel(x, a, b, y, n);
}
void vmul(const double* x, const double* y, double* z, int64_t n) {
    g_mode == Mode::serial ? vmul_serial(x, y, z, n) : vmul_parallel(x, y, z, n);
}

double reduce_sum(const double* x, int64_t n) {
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double reduce_sqsum(const double* x, int64_t n) {
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

}  // namespace icd::kern
