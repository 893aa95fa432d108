#include "equimorse/cartan.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace equimorse {

EqDegreeSpace::EqDegreeSpace(const BackendMatrices& backend, int k) : k_(k) {
  if (k < 0) return;
  for (int i = 0; 2 * i <= k; ++i) {
    const int j = k - 2 * i;
    if (j > backend.n) continue;
    blocks_.push_back({i, j, backend.dim(j), dim_});
    dim_ += backend.dim(j);
  }
  mass_.resize(dim_);
  for (const auto& b : blocks_) mass_.segment(b.offset, b.dim) = backend.mass(b.form_degree);
}

int EqDegreeSpace::find(int t_power, int form_degree) const {
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    if (blocks_[b].t_power == t_power && blocks_[b].form_degree == form_degree)
      return static_cast<int>(b);
  return -1;
}

EqDegreeSpace degree_space(const BackendMatrices& backend, int k) {
  return EqDegreeSpace(backend, k);
}

EqForm::EqForm(EqDegreeSpace s, Vector c) : space(std::move(s)), coeffs(std::move(c)) {
  if (coeffs.size() != space.dim())
    throw AssemblyError("EqForm: coefficient length does not match the space dimension");
}

std::span<const double> EqForm::block(int t_power, int form_degree) const {
  const int b = space.find(t_power, form_degree);
  if (b < 0) return {};
  const auto& blk = space.blocks()[b];
  return {coeffs.data() + blk.offset, static_cast<std::size_t>(blk.dim)};
}

std::span<double> EqForm::block(int t_power, int form_degree) {
  const int b = space.find(t_power, form_degree);
  if (b < 0) return {};
  const auto& blk = space.blocks()[b];
  return {coeffs.data() + blk.offset, static_cast<std::size_t>(blk.dim)};
}

Matrix EqOperator::block(int cod_t, int cod_j, int dom_t, int dom_j) const {
  const int cb = codomain.find(cod_t, cod_j);
  const int db = domain.find(dom_t, dom_j);
  if (cb < 0 || db < 0) return Matrix();
  const auto& c = codomain.blocks()[cb];
  const auto& d = domain.blocks()[db];
  return Matrix(matrix).block(c.offset, d.offset, c.dim, d.dim);
}

EqForm EqOperator::apply(const EqForm& x) const {
  if (x.coeffs.size() != domain.dim()) throw AssemblyError("EqOperator::apply: wrong domain");
  return EqForm(codomain, matrix * x.coeffs);
}

namespace {

// Given a rule mapping (domain block, codomain block) to a backend matrix (or
// nothing), scatter all pieces into one sparse matrix.
using BlockRule =
    std::function<bool(const EqBlock& dom, const EqBlock& cod, SparseMatrix& piece)>;

SparseMatrix assemble(const EqDegreeSpace& dom, const EqDegreeSpace& cod, const BlockRule& rule) {
  std::vector<Triplet> t;
  for (const auto& db : dom.blocks()) {
    for (const auto& cb : cod.blocks()) {
      SparseMatrix piece;
      if (!rule(db, cb, piece)) continue;
      if (piece.rows() != cb.dim || piece.cols() != db.dim) {
        std::ostringstream os;
        os << "block (t^" << db.t_power << ",Ω^" << db.form_degree << ") -> (t^" << cb.t_power
           << ",Ω^" << cb.form_degree << ") has shape " << piece.rows() << "x" << piece.cols()
           << ", expected " << cb.dim << "x" << db.dim;
        throw AssemblyError(os.str());
      }
      for (int r = 0; r < piece.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(piece, r); it; ++it)
          t.emplace_back(cb.offset + it.row(), db.offset + it.col(), it.value());
    }
  }
  SparseMatrix m(cod.dim(), dom.dim());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

EqOperator adjoint(const EqOperator& a) {
  return {a.codomain, a.domain, mass_adjoint(a.matrix, a.domain.mass(), a.codomain.mass())};
}

EqOperator compose(const EqOperator& outer, const EqOperator& inner) {
  return {inner.domain, outer.codomain, SparseMatrix(outer.matrix * inner.matrix)};
}

EqOperator deformed_d(const BackendMatrices& backend, double s, int k) {
  EqDegreeSpace dom(backend, k), cod(backend, k + 1);
  const bool deform = s != 0.0;
  auto rule = [&](const EqBlock& db, const EqBlock& cb, SparseMatrix& piece) {
    if (cb.t_power == db.t_power && cb.form_degree == db.form_degree + 1) {
      piece = backend.d(db.form_degree);
      if (deform) piece += s * backend.df_wedge(db.form_degree);
      return true;
    }
    if (cb.t_power == db.t_power + 1 && cb.form_degree == db.form_degree - 1) {
      piece = backend.iv(db.form_degree);
      return true;
    }
    return false;
  };
  return {dom, cod, assemble(dom, cod, rule)};
}

}  // namespace

EqOperator build_deq(const BackendMatrices& backend, int k) {
  return deformed_d(backend, 0.0, k);
}

EqOperator build_deq_star(const BackendMatrices& backend, int k) {
  return adjoint(build_deq(backend, k - 1));
}

EqOperator build_delta_eq(const BackendMatrices& backend, int k) {
  return build_deformed_laplacian(backend, 0.0, k);
}

DeformedOperators build_deformed(const BackendMatrices& backend, double s, int k) {
  if (s < 0.0) throw ConfigError("deformation parameter s must be >= 0");
  EqOperator up = deformed_d(backend, s, k);
  EqOperator down = deformed_d(backend, s, k - 1);
  EqOperator up_star = adjoint(up);
  EqOperator down_star = adjoint(down);
  EqOperator lap = compose(up_star, up);
  lap.matrix += SparseMatrix(down.matrix * down_star.matrix);
  lap.matrix.makeCompressed();
  return {std::move(up), std::move(down_star), std::move(lap)};
}

EqOperator build_deformed_laplacian(const BackendMatrices& backend, double s, int k) {
  return build_deformed(backend, s, k).laplacian;
}

EqOperator fiberwise(const BackendMatrices& backend, int k, bool clifford_hessian) {
  EqDegreeSpace sp(backend, k);
  auto rule = [&](const EqBlock& db, const EqBlock& cb, SparseMatrix& piece) {
    if (db.t_power != cb.t_power || db.form_degree != cb.form_degree) return false;
    piece = clifford_hessian ? backend.cliff_hess(db.form_degree)
                             : backend.mult_df2(db.form_degree);
    return true;
  };
  return {sp, sp, assemble(sp, sp, rule)};
}

namespace {

Matrix random_block(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) x(r, c) = normal(rng);
  return x;
}

double mass_norm(const Matrix& x, const Vector& mass) {
  return std::sqrt((mass.asDiagonal() * x.cwiseAbs2()).sum());
}

}  // namespace

ExpansionResidual expansion_residual(const BackendMatrices& backend, double s, int k,
                                     int samples) {
  const EqOperator composed = build_deformed_laplacian(backend, s, k);
  SparseMatrix expanded = build_delta_eq(backend, k).matrix;
  if (s != 0.0) {
    expanded += (s * s) * fiberwise(backend, k, false).matrix;
    expanded += s * fiberwise(backend, k, true).matrix;
  }
  const EqDegreeSpace& sp = composed.domain;
  if (sp.dim() == 0) return {};
  Matrix x = random_block(sp.dim(), std::max(samples, 1), 0x5eed0001ULL + k);
  for (int c = 0; c < x.cols(); ++c) {
    const double nrm = mass_norm(x.col(c), sp.mass());
    x.col(c) /= nrm;
  }
  const SparseMatrix diff = composed.matrix - expanded;
  const Matrix lhs = composed.matrix * x;
  const Matrix err = diff * x;

  // Split the error into same-t-power and cross-t-power blocks.
  SparseMatrix cross = diff;
  std::vector<int> t_of(sp.dim());
  for (const auto& b : sp.blocks())
    for (int r = 0; r < b.dim; ++r) t_of[b.offset + r] = b.t_power;
  for (int r = 0; r < cross.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(cross, r); it; ++it)
      if (t_of[it.row()] == t_of[it.col()]) it.valueRef() = 0.0;
  const Matrix cross_err = cross * x;
  const Matrix diag_err = err - cross_err;

  const double denom = mass_norm(lhs, sp.mass());
  ExpansionResidual r;
  const double num = mass_norm(err, sp.mass());
  const double cnum = mass_norm(cross_err, sp.mass());
  const double dnum = mass_norm(diag_err, sp.mass());
  const double scale = denom == 0.0 ? 1.0 : denom;
  r.relative = num / scale;
  r.cross_relative = cnum / scale;
  r.diagonal_relative = dnum / scale;
  return r;
}

EqOperator t_shift(const BackendMatrices& backend, int k) {
  EqDegreeSpace dom(backend, k), cod(backend, k + 2);
  if (dom.blocks().size() != cod.blocks().size() || cod.find(0, k + 2) >= 0)
    throw AssemblyError("t-shift from degree " + std::to_string(k) +
                        " is not a bijection of blocks (needs k >= n-1)");
  auto rule = [&](const EqBlock& db, const EqBlock& cb, SparseMatrix& piece) {
    if (cb.t_power != db.t_power + 1 || cb.form_degree != db.form_degree) return false;
    piece = SparseMatrix(db.dim, db.dim);
    piece.setIdentity();
    return true;
  };
  return {dom, cod, assemble(dom, cod, rule)};
}

EquivariantDeRham build_equivariant_de_rham(const BackendMatrices& backend) {
  const int n = backend.n;
  EquivariantDeRham out;
  out.n = n;

  const EqOperator d_n = build_deq(backend, n);                  // n -> n+1
  const EqOperator d_n1 = build_deq(backend, n + 1);             // n+1 -> n+2
  const EqOperator ds_n = build_deq_star(backend, n);            // n -> n-1
  const EqOperator ds_n1 = build_deq_star(backend, n + 1);       // n+1 -> n
  const EqOperator shift_lo = t_shift(backend, n - 1);           // n-1 -> n+1
  const EqOperator shift_hi = t_shift(backend, n);               // n -> n+2

  // even -> odd: d_eq + t d_eq*;  odd -> even: t^{-1} d_eq + d_eq*.
  const SparseMatrix even_to_odd = d_n.matrix + SparseMatrix(shift_lo.matrix * ds_n.matrix);
  const SparseMatrix shift_hi_inv = SparseMatrix(shift_hi.matrix.transpose());
  const SparseMatrix odd_to_even = SparseMatrix(shift_hi_inv * d_n1.matrix) + ds_n1.matrix;

  const int ne = d_n.domain.dim(), no = d_n.codomain.dim();
  out.even_dim = ne;
  out.odd_dim = no;
  std::vector<Triplet> t;
  for (int r = 0; r < even_to_odd.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(even_to_odd, r); it; ++it)
      t.emplace_back(ne + it.row(), it.col(), it.value());
  for (int r = 0; r < odd_to_even.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(odd_to_even, r); it; ++it)
      t.emplace_back(it.row(), ne + it.col(), it.value());
  out.matrix = SparseMatrix(ne + no, ne + no);
  out.matrix.setFromTriplets(t.begin(), t.end());
  out.matrix.makeCompressed();
  out.mass.resize(ne + no);
  out.mass << d_n.domain.mass(), d_n.codomain.mass();

  // Symmetry in the mass inner product: M D is symmetric.
  const SparseMatrix md = out.mass.asDiagonal() * out.matrix;
  const SparseMatrix asym = md - SparseMatrix(md.transpose());
  out.symmetry_residual = max_abs(asym) / std::max(max_abs(md), 1e-300);

  const SparseMatrix sq = out.matrix * out.matrix;
  const SparseMatrix lap_even = build_delta_eq(backend, n).matrix;
  const SparseMatrix lap_odd = build_delta_eq(backend, n + 1).matrix;
  const Matrix dense_sq(sq);
  auto rel = [](const Matrix& a, const Matrix& b) {
    const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
    return (a - b).cwiseAbs().maxCoeff() / scale;
  };
  const double r_even = rel(dense_sq.topLeftCorner(ne, ne), Matrix(lap_even));
  const double r_odd = rel(dense_sq.bottomRightCorner(no, no), Matrix(lap_odd));
  const double r_off = std::max(dense_sq.topRightCorner(ne, no).cwiseAbs().maxCoeff(),
                                dense_sq.bottomLeftCorner(no, ne).cwiseAbs().maxCoeff()) /
                       std::max(Matrix(lap_even).cwiseAbs().maxCoeff(), 1e-300);
  out.square_residual = std::max({r_even, r_odd, r_off});
  return out;
}

double adjoint_defect(const EqOperator& a, const EqOperator& a_star, int samples) {
  const int nd = a.domain.dim(), nc = a.codomain.dim();
  if (nd == 0 || nc == 0) return 0.0;
  const Matrix x = random_block(nd, samples, 0xadd0001ULL);
  const Matrix y = random_block(nc, samples, 0xadd0002ULL);
  const Matrix ax = a.matrix * x;
  const Matrix asy = a_star.matrix * y;
  const double scale = std::max(max_abs(a.matrix), 1e-300);
  double worst = 0.0;
  for (int c = 0; c < samples; ++c) {
    const double lhs = (ax.col(c).array() * y.col(c).array() * a.codomain.mass().array()).sum();
    const double rhs = (x.col(c).array() * asy.col(c).array() * a.domain.mass().array()).sum();
    const double nx = mass_norm(x.col(c), a.domain.mass());
    const double ny = mass_norm(y.col(c), a.codomain.mass());
    worst = std::max(worst, std::abs(lhs - rhs) / (scale * nx * ny));
  }
  return worst;
}

}  // namespace equimorse
