#include "equimorse/catalog.hpp"
#include "equimorse/parallel.hpp"
#include "equimorse/spectral.hpp"

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <random>
#include <vector>

using namespace equimorse;

namespace {

SparseMatrix random_sparse(int rows, int cols, double density, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Triplet> t;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if ((u(rng) + 1.0) / 2.0 < density) t.emplace_back(r, c, u(rng));
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

struct ThreadsEnv {
  explicit ThreadsEnv(const char* value) { setenv("EQUIMORSE_THREADS", value, 1); }
  ~ThreadsEnv() { unsetenv("EQUIMORSE_THREADS"); }
};

}  // namespace

TEST_CASE("parallel spmv and spmm match the serial reference bit for bit") {
  const SparseMatrix a = random_sparse(500, 300, 0.05, 7);
  const Vector x = Vector::LinSpaced(300, -1.0, 2.0);
  Vector ref;
  spmv_serial(a, x, ref);
  CHECK((ref - a * x).cwiseAbs().maxCoeff() <= 1e-13);
  for (int threads : {1, 2, 4}) {
    Vector y;
    spmv(a, x, y, threads);
    CHECK(y == ref);
  }
  const Matrix xs = Matrix::Random(300, 5);
  Matrix ys, yr;
  spmm(a, xs, ys, 3);
  spmm_serial(a, xs, yr);
  CHECK(ys == yr);

  SparseMatrix loose = a;
  loose.uncompress();
  Vector y;
  CHECK_THROWS_AS(spmv(loose, x, y), Error);
  CHECK_THROWS_AS(spmv_serial(a, Vector::Ones(3), y), Error);
}

TEST_CASE("run_jobs visits every index once and rethrows the lowest failure") {
  std::vector<std::atomic<int>> hits(64);
  run_jobs(64, [&](int i) { hits[i]++; }, 4);
  for (auto& h : hits) CHECK(h.load() == 1);

  std::vector<int> serial;
  run_jobs_serial(5, [&](int i) { serial.push_back(i); });
  CHECK(serial == std::vector<int>{0, 1, 2, 3, 4});

  try {
    run_jobs(
        16,
        [](int i) {
          if (i % 5 == 3) throw ConfigError("job " + std::to_string(i));
        },
        4);
    FAIL("expected an exception");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()) == "job 3");
  }
  run_jobs(0, [](int) { FAIL("no jobs expected"); });
}

TEST_CASE("EQUIMORSE_THREADS") {
  {
    ThreadsEnv env("3");
    CHECK(worker_count() == 3);
  }
  {
    ThreadsEnv env("zero");
    CHECK_THROWS_AS(worker_count(), ConfigError);
  }
  {
    ThreadsEnv env("0");
    CHECK_THROWS_AS(worker_count(), ConfigError);
  }
  CHECK(worker_count() >= 1);
}

TEST_CASE("Betti numbers do not depend on the worker count") {
  const BackendMatrices b = make_case("torus_height", {{"grid", 64}}).backend();
  std::vector<int> one, four;
  {
    ThreadsEnv env("1");
    one = betti_numbers(b, 4, 4.0);
  }
  {
    ThreadsEnv env("4");
    four = betti_numbers(b, 4, 4.0);
  }
  CHECK(one == four);
}
