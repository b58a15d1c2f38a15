#include "peg/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace peg::kernels {

void gemm_serial(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
                 const double* b, double* c, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = accumulate ? c[i * n + j] : 0.0;
            for (int p = 0; p < k; ++p) {
                const double av = trans_a ? a[p * m + i] : a[i * k + p];
                const double bv = trans_b ? b[j * k + p] : b[p * n + j];
                acc += av * bv;
            }
            c[i * n + j] = acc;
        }
    }
}

void gemm_omp(bool trans_a, bool trans_b, int m, int n, int k, const double* a, const double* b,
              double* c, bool accumulate) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = accumulate ? c[i * n + j] : 0.0;
            for (int p = 0; p < k; ++p) {
                const double av = trans_a ? a[p * m + i] : a[i * k + p];
                const double bv = trans_b ? b[j * k + p] : b[p * n + j];
                acc += av * bv;
            }
            c[i * n + j] = acc;
        }
    }
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a, const double* b,
          double* c, bool accumulate) {
    const std::int64_t work = static_cast<std::int64_t>(m) * n * k;
    if (work >= 32768)
        gemm_omp(trans_a, trans_b, m, n, k, a, b, c, accumulate);
    else
        gemm_serial(trans_a, trans_b, m, n, k, a, b, c, accumulate);
}

}  // namespace peg::kernels
