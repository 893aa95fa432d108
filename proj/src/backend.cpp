#include "equimorse/backend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace equimorse {

double max_abs(const SparseMatrix& m) {
  double best = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      best = std::max(best, std::abs(it.value()));
  return best;
}

SparseMatrix mass_adjoint(const SparseMatrix& a, const Vector& mass_domain,
                          const Vector& mass_codomain) {
  SparseMatrix t = SparseMatrix(a.transpose());
  // t : cod -> dom; scale rows by 1/M_dom and columns by M_cod.
  for (int r = 0; r < t.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(t, r); it; ++it)
      it.valueRef() *= mass_codomain[it.col()] / mass_domain[r];
  return t;
}

std::string to_string(EndKind kind) {
  switch (kind) {
    case EndKind::kPole: return "pole";
    case EndKind::kPeriodic: return "periodic";
    case EndKind::kWallAbsolute: return "wall_absolute";
    case EndKind::kWallRelative: return "wall_relative";
  }
  return "?";
}

void RevolutionProfile::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("profile: " + what); };
  if (!(theta_max > 0.0)) fail("theta_max must be positive");
  if (!radius || !radius_slope) fail("radius function missing");
  if (grid < 16) fail("grid N must be >= 16 (got " + std::to_string(grid) + ")");
  if (weight < 1) fail("weight m must be a positive integer");
  if ((left == EndKind::kPeriodic) != (right == EndKind::kPeriodic))
    fail("periodic ends must come in pairs");
  const double tol = 1e-8;
  if (left == EndKind::kPeriodic) {
    if (std::abs(radius(0.0) - radius(theta_max)) > tol ||
        std::abs(radius_slope(0.0) - radius_slope(theta_max)) > tol)
      fail("periodic profile does not close up smoothly");
  }
  auto check_pole = [&](double at, double expected_slope, const char* side) {
    if (std::abs(radius(at)) > tol || std::abs(radius_slope(at) - expected_slope) > tol)
      fail(std::string("pole at ") + side + " end needs a -> 0 and a' -> " +
           (expected_slope > 0 ? "+1" : "-1"));
  };
  if (left == EndKind::kPole) check_pole(0.0, 1.0, "left");
  if (right == EndKind::kPole) check_pole(theta_max, -1.0, "right");
  // a > 0 strictly inside (sampled on a grid finer than the discretization).
  const int samples = 4 * grid;
  for (int i = 1; i < samples; ++i) {
    const double th = theta_max * i / samples;
    if (!(radius(th) > 0.0))
      fail("radius a(θ) must be positive in the interior (θ=" + std::to_string(th) + ")");
  }
}

InvariantMorseFunction InvariantMorseFunction::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

// ---------------------------------------------------------------------------
// BackendMatrices accessors

namespace {

const Vector& empty_vector() {
  static const Vector v;
  return v;
}

SparseMatrix zeros(int rows, int cols) {
  SparseMatrix z(rows, cols);
  z.makeCompressed();
  return z;
}

}  // namespace

int BackendMatrices::dim(int j) const {
  return (j < 0 || j > n) ? 0 : forms[j].dim;
}

const Vector& BackendMatrices::mass(int j) const {
  return (j < 0 || j > n) ? empty_vector() : forms[j].mass;
}

SparseMatrix BackendMatrices::d(int j) const {
  if (j < 0 || j >= n) return zeros(dim(j + 1), dim(j));
  return d_[j];
}

SparseMatrix BackendMatrices::iv(int j) const {
  if (j < 1 || j > n) return zeros(dim(j - 1), dim(j));
  return iv_[j];
}

SparseMatrix BackendMatrices::vstar(int j) const {
  return mass_adjoint(iv(j + 1), mass(j + 1), mass(j));
}

SparseMatrix BackendMatrices::df_wedge(int j) const {
  if (j < 0 || j >= n) return zeros(dim(j + 1), dim(j));
  return df_wedge_[j];
}

SparseMatrix BackendMatrices::df_contract(int j) const {
  return mass_adjoint(df_wedge(j - 1), mass(j - 1), mass(j));
}

SparseMatrix BackendMatrices::mult_df2(int j) const {
  if (j < 0 || j > n) return zeros(0, 0);
  return mult_df2_[j];
}

SparseMatrix BackendMatrices::cliff_hess(int j) const {
  if (j < 0 || j > n) return zeros(0, 0);
  return cliff_hess_[j];
}

double BackendMatrices::deformation_limit() const {
  if (slope_bound <= 0.0 || cell <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 / (cell * slope_bound);
}

void BackendMatrices::finalize_clifford() {
  mult_df2_.assign(n + 1, SparseMatrix());
  cliff_hess_.assign(n + 1, SparseMatrix());
  for (int j = 0; j <= n; ++j) {
    const SparseMatrix d_up = d(j), d_down = d(j - 1);
    const SparseMatrix w_up = df_wedge(j), w_down = df_wedge(j - 1);
    const SparseMatrix dstar_up = mass_adjoint(d_up, mass(j), mass(j + 1));
    const SparseMatrix dstar_down = mass_adjoint(d_down, mass(j - 1), mass(j));
    const SparseMatrix c_up = df_contract(j + 1), c_down = df_contract(j);
    mult_df2_[j] = SparseMatrix(c_up * w_up) + SparseMatrix(w_down * c_down);
    cliff_hess_[j] = SparseMatrix(dstar_up * w_up) + SparseMatrix(w_down * dstar_down) +
                     SparseMatrix(c_up * d_up) + SparseMatrix(d_down * c_down);
    mult_df2_[j].prune(0.0);
    cliff_hess_[j].prune(0.0);
  }
}

// ---------------------------------------------------------------------------
// Uniform staggered θ-grid

namespace {

struct StaggeredGrid {
  double theta_max = 0.0;
  int cells = 0;
  double h = 0.0;
  bool periodic = false;
  EndKind left{}, right{};

  int node_count() const { return periodic ? cells : cells + 1; }
  double node(int i) const { return h * i; }
  double half(int j) const { return h * (j + 0.5); }
  int right_node(int j) const { return periodic ? (j + 1) % cells : j + 1; }
  bool is_end(int i) const { return !periodic && (i == 0 || i == cells); }
  EndKind end_kind(int i) const { return i == 0 ? left : right; }

  // Dual cell of node i: length and the point where weights are sampled.
  // End nodes own half a cell; sampling at its midpoint keeps pole weights
  // positive (a vanishes at the pole itself).
  double dual_length(int i) const { return is_end(i) ? 0.5 * h : h; }
  double dual_sample(int i) const {
    if (!is_end(i)) return node(i);
    return i == 0 ? 0.25 * h : theta_max - 0.25 * h;
  }

  std::vector<int> node_set(bool drop_poles) const {
    std::vector<int> out;
    for (int i = 0; i < node_count(); ++i) {
      if (is_end(i)) {
        const EndKind k = end_kind(i);
        if (k == EndKind::kWallRelative) continue;
        if (drop_poles && k == EndKind::kPole) continue;
      }
      out.push_back(i);
    }
    return out;
  }
};

std::vector<int> local_index(const std::vector<int>& set, int nodes) {
  std::vector<int> map(nodes, -1);
  for (int k = 0; k < static_cast<int>(set.size()); ++k) map[set[k]] = k;
  return map;
}

// Forward difference from a node set to all half nodes (values outside the set
// are zero), written at row offset / column offset inside a bigger matrix.
void add_difference(std::vector<Triplet>& t, const StaggeredGrid& g,
                    const std::vector<int>& map, int row0, int col0) {
  for (int j = 0; j < g.cells; ++j) {
    const int l = map[j], r = map[g.right_node(j)];
    if (r >= 0) t.emplace_back(row0 + j, col0 + r, 1.0 / g.h);
    if (l >= 0) t.emplace_back(row0 + j, col0 + l, -1.0 / g.h);
  }
}

// Multiplication by f' at half nodes after averaging the two adjacent nodes.
void add_slope_average(std::vector<Triplet>& t, const StaggeredGrid& g,
                       const std::vector<int>& map, const std::vector<double>& slope_half,
                       int row0, int col0) {
  for (int j = 0; j < g.cells; ++j) {
    const int l = map[j], r = map[g.right_node(j)];
    if (r >= 0) t.emplace_back(row0 + j, col0 + r, 0.5 * slope_half[j]);
    if (l >= 0) t.emplace_back(row0 + j, col0 + l, 0.5 * slope_half[j]);
  }
}

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

StaggeredGrid make_grid(double theta_max, EndKind left, EndKind right, int cells) {
  StaggeredGrid g;
  g.theta_max = theta_max;
  g.cells = cells;
  g.h = theta_max / cells;
  g.periodic = left == EndKind::kPeriodic;
  g.left = left;
  g.right = right;
  return g;
}

void check_pole_slope(const InvariantMorseFunction& f, double at) {
  if (std::abs(f.slope(at)) > 1e-10) {
    std::ostringstream os;
    os << "invariant function must satisfy f'(pole) = 0 (f'(" << at << ") = " << f.slope(at)
       << ")";
    throw ValidationError(os.str());
  }
}

}  // namespace

BackendMatrices build_backend(const RevolutionProfile& profile,
                              const InvariantMorseFunction& f) {
  profile.validate();
  if (!f.value || !f.slope || !f.curvature)
    throw ValidationError("invariant function is incomplete");
  if (profile.left == EndKind::kPole) check_pole_slope(f, 0.0);
  if (profile.right == EndKind::kPole) check_pole_slope(f, profile.theta_max);

  const StaggeredGrid g =
      make_grid(profile.theta_max, profile.left, profile.right, profile.grid);
  const auto& a = profile.radius;
  const auto& da = profile.radius_slope;
  const double m = profile.weight;

  const std::vector<int> u_set = g.node_set(false);
  const std::vector<int> h_set = g.node_set(true);
  const auto u_map = local_index(u_set, g.node_count());
  const auto h_map = local_index(h_set, g.node_count());
  const int nu = static_cast<int>(u_set.size());
  const int nh = static_cast<int>(h_set.size());
  const int nc = g.cells;  // g and w unknowns

  // (a'/a) f' with its pole limit f''.
  auto mean_curv = [&](double th) {
    const double r = a(th);
    if (std::abs(r) < 1e-14) return f.curvature(th);
    return da(th) / r * f.slope(th);
  };

  BackendMatrices b;
  b.n = 2;
  b.weight = profile.weight;
  b.cell = g.h;
  if (profile.left == EndKind::kPole) b.poles.push_back(0.0);
  if (profile.right == EndKind::kPole) b.poles.push_back(profile.theta_max);

  std::vector<double> u_pos, h_pos, half_pos, slope_half;
  for (int i : u_set) u_pos.push_back(g.node(i));
  for (int i : h_set) h_pos.push_back(g.node(i));
  for (int j = 0; j < nc; ++j) {
    half_pos.push_back(g.half(j));
    slope_half.push_back(f.slope(g.half(j)));
  }
  double bound = 0.0;
  for (double s : slope_half) bound = std::max(bound, std::abs(s));
  for (int i = 0; i < g.node_count(); ++i) bound = std::max(bound, std::abs(f.slope(g.node(i))));
  b.slope_bound = bound;

  b.forms.resize(3);
  // Ω^0: u
  {
    FormSpace& s = b.forms[0];
    s.dim = nu;
    s.mass.resize(nu);
    for (int k = 0; k < nu; ++k) {
      const int i = u_set[k];
      s.mass[k] = g.dual_length(i) * a(g.dual_sample(i));
    }
    s.components.push_back({"u", u_pos, 0});
  }
  // Ω^1: g (dθ, half nodes) then h (dψ, nodes)
  {
    FormSpace& s = b.forms[1];
    s.dim = nc + nh;
    s.mass.resize(s.dim);
    for (int j = 0; j < nc; ++j) s.mass[j] = g.h * a(g.half(j));
    for (int k = 0; k < nh; ++k) {
      const int i = h_set[k];
      s.mass[nc + k] = g.dual_length(i) / a(g.dual_sample(i));
    }
    s.components.push_back({"g", half_pos, 0});
    s.components.push_back({"h", h_pos, nc});
  }
  // Ω^2: w (dθ∧dψ, half nodes)
  {
    FormSpace& s = b.forms[2];
    s.dim = nc;
    s.mass.resize(nc);
    for (int j = 0; j < nc; ++j) s.mass[j] = g.h / a(g.half(j));
    s.components.push_back({"w", half_pos, 0});
  }

  std::vector<Triplet> t;
  b.d_.resize(2);
  add_difference(t, g, u_map, 0, 0);
  b.d_[0] = from_triplets(nc + nh, nu, t);
  t.clear();
  add_difference(t, g, h_map, 0, nc);
  b.d_[1] = from_triplets(nc, nc + nh, t);

  b.iv_.resize(3);
  t.clear();
  for (int k = 0; k < nh; ++k) t.emplace_back(u_map[h_set[k]], nc + k, m);
  b.iv_[1] = from_triplets(nu, nc + nh, t);
  t.clear();
  for (int j = 0; j < nc; ++j) t.emplace_back(j, j, -m);
  b.iv_[2] = from_triplets(nc + nh, nc, t);

  b.df_wedge_.resize(2);
  t.clear();
  add_slope_average(t, g, u_map, slope_half, 0, 0);
  b.df_wedge_[0] = from_triplets(nc + nh, nu, t);
  t.clear();
  add_slope_average(t, g, h_map, slope_half, 0, nc);
  b.df_wedge_[1] = from_triplets(nc, nc + nh, t);

  // Pointwise Clifford Hessian H = f''Z1 + (a'/a)f'Z2 in the frame {∂θ, a^{-1}∂ψ}.
  // Z-signs: u (-,-), g (+,-), h (-,+), w (+,+).
  b.cliff_hess_pointwise_.assign(3, Vector());
  b.df2_pointwise_.assign(3, Vector());
  auto fill = [&](int deg, int off, const std::vector<double>& pos, int z1, int z2) {
    for (std::size_t k = 0; k < pos.size(); ++k) {
      const double th = pos[k];
      b.cliff_hess_pointwise_[deg][off + k] = z1 * f.curvature(th) + z2 * mean_curv(th);
      b.df2_pointwise_[deg][off + k] = f.slope(th) * f.slope(th);
    }
  };
  for (int j = 0; j < 3; ++j) {
    b.cliff_hess_pointwise_[j].resize(b.forms[j].dim);
    b.df2_pointwise_[j].resize(b.forms[j].dim);
  }
  fill(0, 0, u_pos, -1, -1);
  fill(1, 0, half_pos, +1, -1);
  fill(1, nc, h_pos, -1, +1);
  fill(2, 0, half_pos, +1, +1);

  std::ostringstream os;
  os << "revolution(Θ=" << profile.theta_max << ", ends=" << to_string(profile.left) << "/"
     << to_string(profile.right) << ", m=" << profile.weight << ", N=" << profile.grid << ")";
  b.description = os.str();
  b.finalize_clifford();
  return b;
}

BackendMatrices build_circle_backend(int weight) {
  if (weight < 1) throw ValidationError("circle: weight m must be a positive integer");
  BackendMatrices b;
  b.n = 1;
  b.weight = weight;
  b.forms.resize(2);
  b.forms[0] = {1, Vector::Ones(1), {{"1", {0.0}, 0}}};
  b.forms[1] = {1, Vector::Ones(1), {{"dpsi", {0.0}, 0}}};
  b.d_ = {zeros(1, 1)};
  b.iv_.resize(2);
  b.iv_[1] = from_triplets(1, 1, {Triplet(0, 0, static_cast<double>(weight))});
  b.df_wedge_ = {zeros(1, 1)};
  b.cliff_hess_pointwise_ = {Vector::Zero(1), Vector::Zero(1)};
  b.df2_pointwise_ = {Vector::Zero(1), Vector::Zero(1)};
  b.description = "circle(m=" + std::to_string(weight) + ")";
  b.finalize_clifford();
  return b;
}

BackendMatrices build_line_backend(double theta_max, EndKind left, EndKind right, int grid,
                                   const InvariantMorseFunction& f) {
  if (!(theta_max > 0.0)) throw ValidationError("line: theta_max must be positive");
  if (grid < 16) throw ValidationError("line: grid N must be >= 16");
  if (left == EndKind::kPole || right == EndKind::kPole)
    throw ValidationError("line: pole ends need a rotation");
  if ((left == EndKind::kPeriodic) != (right == EndKind::kPeriodic))
    throw ValidationError("line: periodic ends must come in pairs");

  const StaggeredGrid g = make_grid(theta_max, left, right, grid);
  const std::vector<int> u_set = g.node_set(false);
  const auto u_map = local_index(u_set, g.node_count());
  const int nu = static_cast<int>(u_set.size());
  const int nc = g.cells;

  BackendMatrices b;
  b.n = 1;
  b.weight = 0;
  b.cell = g.h;
  std::vector<double> u_pos, half_pos, slope_half;
  for (int i : u_set) u_pos.push_back(g.node(i));
  for (int j = 0; j < nc; ++j) {
    half_pos.push_back(g.half(j));
    slope_half.push_back(f.slope(g.half(j)));
  }
  for (double s : slope_half) b.slope_bound = std::max(b.slope_bound, std::abs(s));

  b.forms.resize(2);
  b.forms[0].dim = nu;
  b.forms[0].mass.resize(nu);
  for (int k = 0; k < nu; ++k) b.forms[0].mass[k] = g.dual_length(u_set[k]);
  b.forms[0].components.push_back({"u", u_pos, 0});
  b.forms[1].dim = nc;
  b.forms[1].mass = Vector::Constant(nc, g.h);
  b.forms[1].components.push_back({"g", half_pos, 0});

  std::vector<Triplet> t;
  add_difference(t, g, u_map, 0, 0);
  b.d_ = {from_triplets(nc, nu, t)};
  b.iv_.resize(2);
  b.iv_[1] = zeros(nu, nc);
  t.clear();
  add_slope_average(t, g, u_map, slope_half, 0, 0);
  b.df_wedge_ = {from_triplets(nc, nu, t)};

  b.cliff_hess_pointwise_ = {Vector(nu), Vector(nc)};
  b.df2_pointwise_ = {Vector(nu), Vector(nc)};
  for (int k = 0; k < nu; ++k) {
    b.cliff_hess_pointwise_[0][k] = -f.curvature(u_pos[k]);
    b.df2_pointwise_[0][k] = std::pow(f.slope(u_pos[k]), 2);
  }
  for (int j = 0; j < nc; ++j) {
    b.cliff_hess_pointwise_[1][j] = f.curvature(half_pos[j]);
    b.df2_pointwise_[1][j] = std::pow(slope_half[j], 2);
  }
  std::ostringstream os;
  os << "line(Θ=" << theta_max << ", ends=" << to_string(left) << "/" << to_string(right)
     << ", N=" << grid << ")";
  b.description = os.str();
  b.finalize_clifford();
  return b;
}

BackendReport validate_backend(const BackendMatrices& b) {
  BackendReport r;
  for (int j = 0; j <= b.n; ++j) {
    r.scale = std::max({r.scale, max_abs(b.d(j)), max_abs(b.iv(j)), max_abs(b.df_wedge(j))});
  }
  r.min_mass = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= b.n; ++j) {
    if (b.mass(j).size() != b.dim(j))
      throw InvalidBackendError("mass vector of degree " + std::to_string(j) + " has wrong size");
    if (b.dim(j) > 0) r.min_mass = std::min(r.min_mass, b.mass(j).minCoeff());

    r.d_squared = std::max(r.d_squared, max_abs(SparseMatrix(b.d(j + 1) * b.d(j))));
    r.iv_squared = std::max(r.iv_squared, max_abs(SparseMatrix(b.iv(j - 1) * b.iv(j))));
    r.cartan = std::max(
        r.cartan, max_abs(SparseMatrix(b.d(j - 1) * b.iv(j)) + SparseMatrix(b.iv(j + 1) * b.d(j))));
    r.wedge_anticommute = std::max(
        {r.wedge_anticommute,
         max_abs(SparseMatrix(b.d(j + 1) * b.df_wedge(j)) +
                 SparseMatrix(b.df_wedge(j + 1) * b.d(j))),
         max_abs(SparseMatrix(b.df_wedge(j + 1) * b.df_wedge(j)))});
    r.wedge_contract = std::max(
        r.wedge_contract, max_abs(SparseMatrix(b.iv(j + 1) * b.df_wedge(j)) +
                                  SparseMatrix(b.df_wedge(j - 1) * b.iv(j))));
  }
  if (!(r.min_mass > 0.0)) throw InvalidBackendError("mass positivity violated");
  const double tol = 1e-12 * std::max(1.0, r.scale * r.scale);
  auto check = [&](double value, const char* name) {
    if (value > tol) {
      std::ostringstream os;
      os << "identity " << name << " violated: residual " << value << " > " << tol;
      throw InvalidBackendError(os.str());
    }
  };
  check(r.d_squared, "d∘d = 0");
  check(r.iv_squared, "i_v∘i_v = 0");
  check(r.cartan, "Cartan d i_v + i_v d = 0");
  check(r.wedge_anticommute, "d df∧ + df∧ d = 0");
  check(r.wedge_contract, "i_v df∧ + df∧ i_v = 0");
  return r;
}

}  // namespace equimorse
