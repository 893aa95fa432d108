#include "equimorse/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

namespace equimorse {

int worker_count() {
  if (const char* env = std::getenv("EQUIMORSE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    throw ConfigError(std::string("EQUIMORSE_THREADS must be a positive integer, got '") + env +
                      "'");
  }
  return omp_get_max_threads();
}

namespace {

int resolve(int threads) { return threads > 0 ? threads : worker_count(); }

void require_compressed(const SparseMatrix& a, const Vector& x, const Vector& y) {
  if (!a.isCompressed()) throw Error("spmv: matrix must be compressed");
  if (x.size() != a.cols() || y.size() != a.rows()) throw Error("spmv: size mismatch");
}

}  // namespace

void run_jobs(int count, const std::function<void(int)>& job, int threads) {
  std::vector<std::exception_ptr> errors(count > 0 ? count : 0);
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve(threads))
  for (int i = 0; i < count; ++i) {
    try {
      job(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void run_jobs_serial(int count, const std::function<void(int)>& job) {
  for (int i = 0; i < count; ++i) job(i);
}

void spmv(const SparseMatrix& a, const Vector& x, Vector& y, int threads) {
  y.resize(a.rows());
  require_compressed(a, x, y);
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  const int rows = static_cast<int>(a.rows());
#pragma omp parallel for schedule(static) num_threads(resolve(threads))
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int p = outer[r]; p < outer[r + 1]; ++p) acc += val[p] * x[inner[p]];
    y[r] = acc;
  }
}

void spmv_serial(const SparseMatrix& a, const Vector& x, Vector& y) {
  y.resize(a.rows());
  require_compressed(a, x, y);
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  for (int r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    for (int p = outer[r]; p < outer[r + 1]; ++p) acc += val[p] * x[inner[p]];
    y[r] = acc;
  }
}

void spmm(const SparseMatrix& a, const Matrix& x, Matrix& y, int threads) {
  y.resize(a.rows(), x.cols());
  Vector col(a.rows());
  for (int c = 0; c < x.cols(); ++c) {
    spmv(a, x.col(c), col, threads);
    y.col(c) = col;
  }
}

void spmm_serial(const SparseMatrix& a, const Matrix& x, Matrix& y) {
  y.resize(a.rows(), x.cols());
  Vector col(a.rows());
  for (int c = 0; c < x.cols(); ++c) {
    spmv_serial(a, x.col(c), col);
    y.col(c) = col;
  }
}

}  // namespace equimorse
