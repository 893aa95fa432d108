#pragma once

// OpenMP kernels. Every parallel routine has a serial twin used as the
// reference in tests and benchmarks.

#include "equimorse/common.hpp"

#include <functional>

namespace equimorse {

/// Worker count: EQUIMORSE_THREADS if set (>= 1), otherwise the OpenMP default.
int worker_count();

/// Runs job(i) for i in [0, count). Exceptions thrown by jobs are rethrown on
/// the calling thread (the one with the lowest index wins, so the outcome does
/// not depend on scheduling).
void run_jobs(int count, const std::function<void(int)>& job, int threads = 0);
void run_jobs_serial(int count, const std::function<void(int)>& job);

/// y = A x for a row-major compressed matrix.
void spmv(const SparseMatrix& a, const Vector& x, Vector& y, int threads = 0);
void spmv_serial(const SparseMatrix& a, const Vector& x, Vector& y);

/// Y = A X, one column at a time through spmv.
void spmm(const SparseMatrix& a, const Matrix& x, Matrix& y, int threads = 0);
void spmm_serial(const SparseMatrix& a, const Matrix& x, Matrix& y);

}  // namespace equimorse
