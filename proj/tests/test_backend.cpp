#include "equimorse/catalog.hpp"
#include "equimorse/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace equimorse;

namespace {

BackendMatrices sphere(int grid = 64, int weight = 1) {
  return make_case("sphere_height", {{"grid", grid}, {"weight", weight}}).backend();
}

bool message_contains(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
  } catch (const std::exception& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("structural identities hold on every catalog case") {
  for (const auto& name : catalog_names()) {
    CAPTURE(name);
    const BackendMatrices b = make_case(name, name == "circle_trivial"
                                                  ? CatalogParams{}
                                                  : CatalogParams{{"grid", 64}})
                                  .backend();
    const BackendReport r = validate_backend(b);
    CHECK(r.d_squared <= 1e-12 * r.scale * r.scale);
    CHECK(r.iv_squared <= 1e-12 * r.scale * r.scale);
    CHECK(r.cartan <= 1e-12 * r.scale * r.scale);
    CHECK(r.wedge_anticommute <= 1e-12 * r.scale * r.scale);
    CHECK(r.wedge_contract <= 1e-12 * r.scale * r.scale);
    CHECK(r.min_mass > 0.0);
  }
}

TEST_CASE("a corrupted contraction is rejected as a Cartan violation") {
  BackendMatrices b = sphere();
  b.iv_[1] *= 1.5;  // h -> u no longer matches w -> g
  CHECK(message_contains([&] { validate_backend(b); }, "Cartan"));
  CHECK_THROWS_AS(validate_backend(b), InvalidBackendError);
}

TEST_CASE("negative mass is rejected") {
  BackendMatrices b = sphere();
  b.forms[0].mass[3] = -1.0;
  CHECK_THROWS_AS(validate_backend(b), InvalidBackendError);
}

TEST_CASE("circle backend is the two-dimensional algebra span{1, dpsi}") {
  const BackendMatrices b = build_circle_backend(3);
  CHECK(b.n == 1);
  CHECK(b.dim(0) == 1);
  CHECK(b.dim(1) == 1);
  CHECK(max_abs(b.d(0)) == 0.0);
  CHECK(Matrix(b.iv(1))(0, 0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(build_circle_backend(0), ValidationError);
}

TEST_CASE("degree-indexed accessors are empty outside 0..n") {
  const BackendMatrices b = sphere();
  CHECK(b.dim(-1) == 0);
  CHECK(b.dim(3) == 0);
  CHECK(b.d(2).rows() == 0);
  CHECK(b.d(2).cols() == b.dim(2));
  CHECK(b.iv(0).rows() == 0);
  CHECK(b.iv(0).cols() == b.dim(0));
}

TEST_CASE("profile validation") {
  RevolutionProfile p = make_case("sphere_height", {{"grid", 64}}).profile;
  SUBCASE("grid too small") {
    p.grid = 8;
    CHECK(message_contains([&] { p.validate(); }, "grid N must be >= 16"));
  }
  SUBCASE("nonpositive interior radius") {
    p.radius = [](double th) { return std::sin(th) * std::cos(th); };
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }
  SUBCASE("pole without unit slope") {
    p.radius = [](double th) { return 2.0 * std::sin(th); };
    p.radius_slope = [](double th) { return 2.0 * std::cos(th); };
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }
  SUBCASE("function with nonzero slope at a pole") {
    InvariantMorseFunction f{[](double th) { return th; }, [](double) { return 1.0; },
                             [](double) { return 0.0; }};
    CHECK_THROWS_AS(build_backend(p, f), ValidationError);
  }
}

TEST_CASE("catalog parameter handling") {
  CHECK_THROWS_AS(make_case("klein_bottle"), ConfigError);
  CHECK_THROWS_AS(make_case("sphere_height", {{"tube", 1.0}}), ConfigError);
  CHECK_THROWS_AS(make_case("sphere_height", {{"grid", 8}}), ValidationError);
  CHECK_THROWS_AS(make_case("sphere_height", {{"weight", 1.5}}), ConfigError);
  // c = 1/3 merges the two extra latitudes into a degenerate one at the equator.
  CHECK_THROWS_AS(make_case("sphere_bumpy", {{"c", 1.0 / 3.0}}), DegeneracyError);
  CHECK(make_case("sphere_bumpy").params.at("radius") == 3.0);
  CHECK(make_case("sphere_height").params.at("radius") == 1.0);
}

TEST_CASE("expected sequences in the catalog") {
  CHECK(make_case("sphere_height").expected_betti == std::vector<int>{1, 0, 2, 0, 2, 0});
  CHECK(make_case("torus_height").expected_betti == std::vector<int>{1, 1, 0, 0, 0});
  CHECK(make_case("sphere_bumpy").expected_tilde_c == std::vector<int>{2, 1, 2, 0, 2, 0});
  CHECK(make_case("circle_trivial").expected_betti == std::vector<int>{1, 0, 0, 0, 0});
}

TEST_CASE("discrete |df|^2 and Clifford Hessian approach their pointwise symbols") {
  // Smooth test data away from the poles; the discrete operators are first
  // order in h and must act on it like multiplication by the sampled symbol.
  for (int j = 0; j <= 2; ++j) {
    CAPTURE(j);
    double err_coarse = 0.0;
    double err_fine = 0.0;
    for (int grid : {128, 256}) {
      const BackendMatrices b = sphere(grid);
      const auto& comps = b.forms[j].components;
      Vector x = Vector::Zero(b.dim(j));
      for (const auto& c : comps)
        for (std::size_t i = 0; i < c.positions.size(); ++i)
          x[c.offset + static_cast<int>(i)] = std::sin(2.0 * c.positions[i]) + 1.0;
      const Vector y = b.cliff_hess(j) * x;
      const Vector z = b.mult_df2(j) * x;
      double err = 0.0;
      for (const auto& c : comps)
        for (std::size_t i = 0; i < c.positions.size(); ++i) {
          const double th = c.positions[i];
          if (th < 0.5 || th > M_PI - 0.5) continue;
          const int r = c.offset + static_cast<int>(i);
          err = std::max({err, std::abs(y[r] - b.cliff_hess_pointwise_[j][r] * x[r]),
                          std::abs(z[r] - b.df2_pointwise_[j][r] * x[r])});
        }
      (grid == 128 ? err_coarse : err_fine) = err;
    }
    CHECK(err_fine < 1e-3);
    CHECK(err_fine <= err_coarse);
  }
}

TEST_CASE("doubling the weight multiplies the circle Laplacian by four") {
  for (int m : {1, 2, 3}) {
    const auto r1 = laplacian_spectrum(build_circle_backend(m), 1, 0.0);
    const auto r2 = laplacian_spectrum(build_circle_backend(2 * m), 1, 0.0);
    CHECK(r2.eigenvalues[0] == doctest::Approx(4.0 * r1.eigenvalues[0]).epsilon(1e-14));
  }
}

TEST_CASE("grid refinement leaves Betti numbers and low eigenvalues stable") {
  const BackendMatrices coarse = sphere(128);
  const BackendMatrices fine = sphere(256);
  CHECK(betti_numbers(coarse, 3, 0.0) == betti_numbers(fine, 3, 0.0));
  for (int k = 0; k <= 2; ++k) {
    CAPTURE(k);
    const auto a = laplacian_spectrum(coarse, k, 0.0);
    const auto b = laplacian_spectrum(fine, k, 0.0);
    for (int i = 0; i < 10; ++i) {
      const double x = a.eigenvalues[a.kernel_dim + i];
      const double y = b.eigenvalues[b.kernel_dim + i];
      CHECK(std::abs(x - y) <= 0.02 * y);
    }
  }
}

TEST_CASE("v* and df-contraction are mass adjoints of i_v and df-wedge") {
  const BackendMatrices b = make_case("torus_height", {{"grid", 64}}).backend();
  for (int j = 0; j < b.n; ++j) {
    CAPTURE(j);
    const Vector x = Vector::LinSpaced(b.dim(j + 1), -1.0, 2.0).array().sin();
    const Vector y = Vector::LinSpaced(b.dim(j), 0.5, 3.0).array().cos();
    const Vector& m0 = b.mass(j);
    const Vector& m1 = b.mass(j + 1);
    const double lhs = (b.iv(j + 1) * x).cwiseProduct(m0).dot(y);
    const double rhs = x.cwiseProduct(m1).dot(b.vstar(j) * y);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    const double lw = (b.df_wedge(j) * y).cwiseProduct(m1).dot(x);
    const double rw = y.cwiseProduct(m0).dot(b.df_contract(j + 1) * x);
    CHECK(lw == doctest::Approx(rw).epsilon(1e-12));
  }
}
