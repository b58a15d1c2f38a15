#pragma once

namespace peg::kernels {

// C[m x n] (+)= op(A) * op(B), row-major. op is transpose when the flag is set:
// trans_a=false reads A as m x k, trans_a=true reads A as k x m, same for B.
void gemm_serial(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
                 const double* b, double* c, bool accumulate);

// OpenMP version, parallel over output rows. Each output element is written by
// exactly one thread so results are bit-identical to the serial kernel.
void gemm_omp(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
              const double* b, double* c, bool accumulate);

// Dispatch: omp for large products, serial otherwise.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a, const double* b,
          double* c, bool accumulate);

}  // namespace peg::kernels
