#include "equimorse/local_models.hpp"

#include "equimorse/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace equimorse {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> lowest(const Matrix& sym, int count) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
  const int keep = std::min<int>(count, static_cast<int>(es.eigenvalues().size()));
  return {es.eigenvalues().data(), es.eigenvalues().data() + keep};
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
}

void require_sign(int e, const char* what) {
  if (e != 1 && e != -1) throw ConfigError(std::string(what) + " must be +1 or -1");
}

}  // namespace

std::vector<double> ho_spectrum(double a, int count) {
  require_positive(a, "oscillator frequency a");
  std::vector<double> out;
  for (int p = 0; p < count; ++p) out.push_back(a * (1 + 2 * p));
  return out;
}

std::function<double(double)> ho_ground(double a) {
  require_positive(a, "oscillator frequency a");
  const double c = std::pow(a / kPi, 0.25);
  return [a, c](double x) { return c * std::exp(-0.5 * a * x * x); };
}

std::vector<double> ho_grid_spectrum(double a, int count, int intervals) {
  require_positive(a, "oscillator frequency a");
  const double big = std::sqrt(40.0 / a);
  const double h = 2 * big / intervals;
  const int n = intervals - 1;
  Matrix op = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double x = -big + (i + 1) * h;
    op(i, i) = 2.0 / (h * h) + a * a * x * x;
    if (i + 1 < n) op(i, i + 1) = op(i + 1, i) = -1.0 / (h * h);
  }
  return lowest(op, count);
}

double ho_operator_residual(double a, int intervals) {
  const auto w = ho_ground(a);
  const double big = std::sqrt(40.0 / a);
  const double h = 2 * big / intervals;
  double worst = 0.0, scale = 0.0;
  for (int i = 1; i < intervals; ++i) {
    const double x = -big + i * h;
    const double lw = -(w(x - h) - 2 * w(x) + w(x + h)) / (h * h) + a * a * x * x * w(x);
    worst = std::max(worst, std::abs(lw - a * w(x)));
    scale = std::max(scale, std::abs(a * w(x)));
  }
  return worst / scale;
}

double simpson(const std::function<double(double)>& g, double lo, double hi, int panels) {
  if (panels < 2 || panels % 2) throw ConfigError("simpson needs an even panel count");
  const double h = (hi - lo) / panels;
  double sum = g(lo) + g(hi);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * g(lo + i * h);
  return sum * h / 3.0;
}

double bump(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

double ho_localization(double a) {
  const auto w = ho_ground(a);
  return simpson([&](double x) { return bump(x) * w(x) * w(x); }, -1.0, 1.0, 40000);
}

Eigen::Matrix2d block_matrix(double s, double m, int eps) {
  Eigen::Matrix2d b;
  b << -2 * eps * s, 2 * m, 2 * m, 2 * eps * s;
  return b;
}

std::array<BlockEigenPair, 2> block_matrix_eigen(double s, double m, int eps) {
  require_sign(eps, "ε");
  if (s < 0 || m < 0) throw ConfigError("block matrix needs s, m >= 0");
  const double sp = std::hypot(s, m);
  std::array<BlockEigenPair, 2> out;
  for (int k = 0; k < 2; ++k) {
    const int sigma = k == 0 ? -1 : 1;
    Eigen::Vector2d v;
    // Two algebraically equivalent forms; pick the one without cancellation.
    if (eps * sigma == 1)
      v << m, eps * s + sigma * sp;
    else
      v << 1.0, (sp + s > 0 ? sigma * m / (sp + s) : 0.0);
    if (v.norm() == 0.0) v << (sigma == -eps ? 1.0 : 0.0), (sigma == -eps ? 0.0 : 1.0);
    out[k] = {sigma * 2 * sp, v.normalized()};
  }
  return out;
}

std::array<BranchSpectrum, 2> ab_branch_spectra(double s, double m, int eps, int count) {
  require_positive(s, "s");
  require_sign(eps, "ε");
  BranchSpectrum a{"A", {}}, b{"B", {}};
  for (int p = 0; p < count; ++p) a.eigenvalues.push_back(2 * s * (1 + 2 * p) - 2 * eps * s);
  const double sp = std::hypot(s, m);
  for (int p = 0; p < count; ++p) {
    b.eigenvalues.push_back(2 * sp * (1 + 2 * p) - 2 * sp);
    b.eigenvalues.push_back(2 * sp * (1 + 2 * p) + 2 * sp);
  }
  std::sort(b.eigenvalues.begin(), b.eigenvalues.end());
  b.eigenvalues.resize(count);
  return {a, b};
}

namespace {

// M^{-1/2} K M^{-1/2} for -(1/r)(r u')' on cells r_i = (i - 1/2)h with mass r_i h.
Matrix radial_laplacian(double big, int cells, std::vector<double>& r) {
  const double h = big / cells;
  r.resize(cells);
  for (int i = 0; i < cells; ++i) r[i] = (i + 0.5) * h;
  Matrix k = Matrix::Zero(cells, cells);
  for (int i = 0; i < cells; ++i) {
    const double inner = i * h, outer = (i + 1) * h;  // face radii
    k(i, i) = (inner + outer) / h;
    if (i + 1 < cells) k(i, i + 1) = k(i + 1, i) = -outer / h;
  }
  for (int i = 0; i < cells; ++i)
    for (int j = std::max(0, i - 1); j <= std::min(cells - 1, i + 1); ++j)
      k(i, j) /= std::sqrt(r[i] * h * r[j] * h);
  return k;
}

}  // namespace

std::array<BranchSpectrum, 2> ab_branch_grid(double s, double m, int eps, int count, int cells) {
  require_positive(s, "s");
  require_sign(eps, "ε");
  const double sp = std::hypot(s, m);
  std::vector<double> r;

  const Matrix lap_a = radial_laplacian(std::sqrt(40.0 / s), cells, r);
  Matrix op_a = lap_a;
  for (int i = 0; i < cells; ++i) op_a(i, i) += s * s * r[i] * r[i] - 2 * eps * s;

  const Matrix lap_b = radial_laplacian(std::sqrt(40.0 / sp), cells, r);
  Matrix op_b = Matrix::Zero(2 * cells, 2 * cells);
  op_b.topLeftCorner(cells, cells) = lap_b;
  op_b.bottomRightCorner(cells, cells) = lap_b;
  const Eigen::Matrix2d c = block_matrix(s, m, eps);
  for (int i = 0; i < cells; ++i) {
    const double v = sp * sp * r[i] * r[i];
    op_b(i, i) += v + c(0, 0);
    op_b(cells + i, cells + i) += v + c(1, 1);
    op_b(i, cells + i) = op_b(cells + i, i) = c(0, 1);
  }
  return {BranchSpectrum{"A", lowest(op_a, count)}, BranchSpectrum{"B", lowest(op_b, count)}};
}

int LocalPointModel::morse_index() const {
  int idx = 0;
  for (int e : eps) idx += e == -1 ? 2 : 0;
  for (int l : lambdas) idx += l == -1 ? 1 : 0;
  return idx;
}

void LocalPointModel::validate() const {
  if (eps.size() != weights.size()) throw ConfigError("need one ε per rotation plane");
  if (2 * q() > n) throw ConfigError("2q must not exceed n");
  if (static_cast<int>(lambdas.size()) != n - 2 * q())
    throw ConfigError("need n - 2q values λ");
  for (int w : weights)
    if (w < 1) throw ConfigError("weights m_i must be positive integers");
  for (int e : eps) require_sign(e, "ε_i");
  for (int l : lambdas) require_sign(l, "λ_l");
  require_positive(s, "s");
}

void LocalOrbitModel::validate() const {
  if (weight < 1) throw ConfigError("orbit weight must be a positive integer");
  if (radius < 0.0) throw ConfigError("orbit radius must be positive (0 selects s)");
  transverse.validate();
}

int point_contribution(const LocalPointModel& model, int k) {
  model.validate();
  const int idx = model.morse_index();
  return (k >= idx && (k - idx) % 2 == 0) ? 1 : 0;
}

int orbit_contribution(const LocalOrbitModel& model, int k) {
  model.validate();
  return model.morse_index() == k ? 1 : 0;
}

int asymptotic_counts(const std::vector<LocalPointModel>& points,
                      const std::vector<LocalOrbitModel>& orbits, int k) {
  int total = 0;
  for (const auto& p : points) total += point_contribution(p, k);
  for (const auto& o : orbits) total += orbit_contribution(o, k);
  return total;
}

namespace {

// Truncation radius: the ground states have width s^{-1/2}; exp(-s R²/2) = e^{-40}.
double truncation(double s) { return std::sqrt(80.0 / s); }

EndKind wall_for(int sign) { return sign > 0 ? EndKind::kWallAbsolute : EndKind::kWallRelative; }

InvariantMorseFunction centred_quadratic(int sign, double centre) {
  return {[sign, centre](double x) { return 0.5 * sign * (x - centre) * (x - centre); },
          [sign, centre](double x) { return sign * (x - centre); },
          [sign](double) { return static_cast<double>(sign); }};
}

}  // namespace

BackendMatrices point_model_backend(const LocalPointModel& model, int grid) {
  model.validate();
  const double big = truncation(model.s);
  if (model.q() == 1 && model.n == 2) {
    RevolutionProfile disk;
    disk.theta_max = big;
    disk.left = EndKind::kPole;
    disk.right = wall_for(model.eps[0]);
    disk.radius = [](double r) { return r; };
    disk.radius_slope = [](double) { return 1.0; };
    disk.weight = model.weights[0];
    disk.grid = grid;
    return build_backend(disk, centred_quadratic(model.eps[0], 0.0));
  }
  if (model.q() == 0 && model.n == 1) {
    const int l = model.lambdas[0];
    return build_line_backend(2 * big, wall_for(l), wall_for(l), grid, centred_quadratic(l, big));
  }
  throw ConfigError("no grid realization for a point model with q=" + std::to_string(model.q()) +
                    ", n=" + std::to_string(model.n) + " (supported: q=1,n=2 and q=0,n=1)");
}

BackendMatrices orbit_model_backend(const LocalOrbitModel& model, int grid) {
  model.validate();
  const auto& t = model.transverse;
  if (t.q() != 0 || t.n != 1)
    throw ConfigError("no grid realization for an orbit model with transverse dimension " +
                      std::to_string(t.n) + " (supported: 1)");
  const double big = truncation(t.s);
  const int l = t.lambdas[0];
  RevolutionProfile cyl;
  cyl.theta_max = 2 * big;
  cyl.left = cyl.right = wall_for(l);
  const double rho = model.orbit_radius();
  cyl.radius = [rho](double) { return rho; };
  cyl.radius_slope = [](double) { return 0.0; };
  cyl.weight = model.weight;
  cyl.grid = grid;
  return build_backend(cyl, centred_quadratic(l, big));
}

NearZeroCount near_zero_count(const BackendMatrices& backend, int k, double s) {
  SolveOptions opt;
  opt.check_separation = false;
  const SpectrumReport r = laplacian_spectrum(backend, k, s, -1, opt);
  NearZeroCount out;
  const double cut = s / 10.0;
  for (double v : r.eigenvalues) {
    if (v < cut) {
      ++out.count;
      out.largest = std::max(out.largest, v);
    } else {
      out.gap = v;
      break;
    }
  }
  out.separated = out.gap >= s / 2.0;
  return out;
}

Matrix clifford_hessian_fiber(const std::vector<double>& lambdas) {
  const int n = static_cast<int>(lambdas.size());
  const int dim = 1 << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (int mono = 0; mono < dim; ++mono)
    for (int i = 0; i < n; ++i) h(mono, mono) += lambdas[i] * ((mono >> i) & 1 ? 1.0 : -1.0);
  return h;
}

Matrix clifford_hessian_fiber_direct(const std::vector<double>& lambdas) {
  const int n = static_cast<int>(lambdas.size());
  const int dim = 1 << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    Matrix wedge = Matrix::Zero(dim, dim);
    for (int mono = 0; mono < dim; ++mono) {
      if ((mono >> i) & 1) continue;
      // dx_i moves past the factors dx_j, j < i.
      const int below = __builtin_popcount(mono & ((1 << i) - 1));
      wedge(mono | (1 << i), mono) = below % 2 ? -1.0 : 1.0;
    }
    const Matrix contract = wedge.transpose();
    h += lambdas[i] * (wedge * contract - contract * wedge);
  }
  return h;
}

}  // namespace equimorse
