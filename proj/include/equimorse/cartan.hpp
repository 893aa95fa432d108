#pragma once

// Cartan model of S^1-equivariant forms, Ω_eq^k = ⊕_{2i+j=k} t^i ⊗ Ω_G^j, and
// the operators built on it. Every operator is a sparse matrix in block form;
// adjoints are exact mass-weighted transposes.

#include "equimorse/backend.hpp"

#include <span>
#include <vector>

namespace equimorse {

struct EqBlock {
  int t_power = 0;
  int form_degree = 0;
  int dim = 0;
  int offset = 0;
};

class EqDegreeSpace {
 public:
  EqDegreeSpace() = default;
  EqDegreeSpace(const BackendMatrices& backend, int k);

  int degree() const { return k_; }
  int dim() const { return dim_; }
  const std::vector<EqBlock>& blocks() const { return blocks_; }
  const Vector& mass() const { return mass_; }

  /// Index into blocks() of (t_power, form_degree), or -1.
  int find(int t_power, int form_degree) const;

 private:
  int k_ = 0;
  int dim_ = 0;
  std::vector<EqBlock> blocks_;
  Vector mass_;
};

EqDegreeSpace degree_space(const BackendMatrices& backend, int k);

struct EqForm {
  EqDegreeSpace space;
  Vector coeffs;

  EqForm(EqDegreeSpace s, Vector c);
  std::span<const double> block(int t_power, int form_degree) const;
  std::span<double> block(int t_power, int form_degree);
};

struct EqOperator {
  EqDegreeSpace domain;
  EqDegreeSpace codomain;
  SparseMatrix matrix;

  /// Sub-block (codomain block, domain block) as a dense matrix.
  Matrix block(int cod_t, int cod_j, int dom_t, int dom_j) const;
  EqForm apply(const EqForm& x) const;
};

/// d_eq : Ω_eq^k -> Ω_eq^{k+1}, t^i⊗ω ↦ t^i⊗dω + t^{i+1}⊗i_vω.
EqOperator build_deq(const BackendMatrices& backend, int k);

/// Exact mass adjoint of build_deq(backend, k-1), a map Ω_eq^k -> Ω_eq^{k-1}.
EqOperator build_deq_star(const BackendMatrices& backend, int k);

/// Δ_eq = d_eq* d_eq + d_eq d_eq* on Ω_eq^k.
EqOperator build_delta_eq(const BackendMatrices& backend, int k);

struct DeformedOperators {
  EqOperator d;       // k -> k+1
  EqOperator d_star;  // k -> k-1
  EqOperator laplacian;
};

/// Witten-deformed operators d_eq + s df∧, its adjoint and their Laplacian.
/// At s = 0 the matrices are exactly the undeformed ones.
DeformedOperators build_deformed(const BackendMatrices& backend, double s, int k);

/// Same Laplacian without materializing the first-order pieces.
EqOperator build_deformed_laplacian(const BackendMatrices& backend, double s, int k);

struct ExpansionResidual {
  double relative = 0.0;        // ||Δ_s - (Δ + s²|df|² + sH_f)|| / ||Δ_s||
  double cross_relative = 0.0;  // part coming from blocks with different t-power
  double diagonal_relative = 0.0;  // part coming from blocks with equal t-power
};

/// Compares the composed Laplacian with Δ_eq + s²|df|² + s H_f on `samples`
/// random unit vectors (fixed seed).
ExpansionResidual expansion_residual(const BackendMatrices& backend, double s, int k,
                                     int samples = 20);

/// Block-diagonal (in t-power and form degree) operator assembled from one
/// per-form-degree family of backend matrices.
EqOperator fiberwise(const BackendMatrices& backend, int k, bool clifford_hessian);

/// t^i ⊗ · : Ω_eq^k -> Ω_eq^{k+2}, defined when it is a bijection of blocks
/// (k >= n-1). Throws AssemblyError otherwise.
EqOperator t_shift(const BackendMatrices& backend, int k);

struct EquivariantDeRham {
  int n = 0;
  int even_dim = 0;  // dim Ω_eq^n, listed first
  int odd_dim = 0;   // dim Ω_eq^{n+1}
  SparseMatrix matrix;
  Vector mass;
  double square_residual = 0.0;  // max blockwise ||D² - Δ|| / ||Δ||
  double symmetry_residual = 0.0;
};

/// D̄_eq = d̄_eq + d̄_eq* on Ω_eq^n ⊕ Ω_eq^{n+1}.
EquivariantDeRham build_equivariant_de_rham(const BackendMatrices& backend);

/// max |<Ax, y>_M - <x, A* y>_M| / (||A|| ||x|| ||y||) over random x, y.
double adjoint_defect(const EqOperator& a, const EqOperator& a_star, int samples = 8);

}  // namespace equimorse
