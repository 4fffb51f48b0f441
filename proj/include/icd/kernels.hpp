// Dense math kernels. Every kernel has a serial reference and an OpenMP
// variant; the parallel variants split work across independent output
// elements only, so per-element accumulation order never changes and results
// are bit-identical to the serial reference at any thread count.
#pragma once

#include <cstdint>

namespace icd::kern {

enum class Mode { serial, parallel };

// process-wide dispatch mode, default parallel (honours ICD_KERNELS=serial)
Mode mode();
void set_mode(Mode m);
int thread_count();

// C[MxN] = A[MxK] * B[KxN]
void matmul_nn_serial(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);
void matmul_nn_parallel(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);
// C[MxN] = A[MxK] * B[NxK]^T
void matmul_nt_serial(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);
void matmul_nt_parallel(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);
// C[MxN] = A[KxM]^T * B[KxN]
void matmul_tn_serial(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);
void matmul_tn_parallel(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);

void vtanh_serial(const double* x, double* y, int64_t n);
void vtanh_parallel(const double* x, double* y, int64_t n);
// y = a*x + b*y elementwise
void vaxpby_serial(const double* x, double a, double b, double* y, int64_t n);
void vaxpby_parallel(const double* x, double a, double b, double* y, int64_t n);
void vmul_serial(const double* x, const double* y, double* z, int64_t n);
void vmul_parallel(const double* x, const double* y, double* z, int64_t n);

// mode-dispatching fronts
void matmul_nn(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);
void matmul_nt(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);
void matmul_tn(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);
void vtanh(const double* x, double* y, int64_t n);
void vaxpby(const double* x, double a, double b, double* y, int64_t n);
void vmul(const double* x, const double* y, double* z, int64_t n);

// reductions stay serial: a fixed summation order keeps aggregates
// reproducible no matter how the surrounding loops are scheduled
double reduce_sum(const double* x, int64_t n);
double reduce_sqsum(const double* x, int64_t n);

}  // namespace icd::kern
