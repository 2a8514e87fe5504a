#pragma once

#include "gccfp/matrix.hpp"

namespace gccfp::kernels {

// Every kernel exists twice: a serial reference and an OpenMP version that
// parallelizes over independent output rows. Both accumulate each output
// element in the same order, so their results are bit-identical; the tests
// and the bench tool rely on that. Library code calls the dispatching
// wrappers below, which honor the process-wide backend switch.

enum class Backend { serial, parallel };

void set_backend(Backend b) noexcept;
Backend active_backend() noexcept;

namespace detail {

void gemm_nn_serial(MatView a, MatView b, double* c);
void gemm_nn_parallel(MatView a, MatView b, double* c);
void gemm_tn_serial(MatView a, MatView b, double* c);
void gemm_tn_parallel(MatView a, MatView b, double* c);
void gemm_nt_serial(MatView a, MatView b, double* c);
void gemm_nt_parallel(MatView a, MatView b, double* c);
void spmm_serial(const CsrMatrix& s, MatView b, double* c);
void spmm_parallel(const CsrMatrix& s, MatView b, double* c);
CsrMatrix spgemm_serial(const CsrMatrix& a, const CsrMatrix& b);
CsrMatrix spgemm_parallel(const CsrMatrix& a, const CsrMatrix& b);
double masked_bilinear_sum_serial(const CsrMatrix& s, MatView a, MatView b);
double masked_bilinear_sum_parallel(const CsrMatrix& s, MatView a, MatView b);
double frob_sq_diff_serial(MatView a, MatView b);
double frob_sq_diff_parallel(MatView a, MatView b);
double frob_sq_serial(MatView a);
double frob_sq_parallel(MatView a);

} // namespace detail

/// c = a * b, shape (a.rows x b.cols).
Matrix gemm_nn(MatView a, MatView b);

/// c = a^T * b, shape (a.cols x b.cols); a and b must have equal row counts.
Matrix gemm_tn(MatView a, MatView b);

/// c = a * b^T, shape (a.rows x b.rows); a and b must have equal col counts.
Matrix gemm_nt(MatView a, MatView b);

/// c = s * b, shape (s.rows x b.cols).
Matrix spmm(const CsrMatrix& s, MatView b);

/// Sparse-sparse product with sorted output rows.
CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b);

/// sum over stored (i,j) of s_ij * dot(a.row(i), b.row(j)).
/// Equals tr(S^T A B^T) restricted to the sparsity pattern of S.
double masked_bilinear_sum(const CsrMatrix& s, MatView a, MatView b);

double frob_sq_diff(MatView a, MatView b);
double frob_sq(MatView a);

/// tr(a * b) for small dense matrices; always serial.
double trace_product(MatView a, MatView b);

} // namespace gccfp::kernels
