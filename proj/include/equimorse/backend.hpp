#pragma once

// Discretized calculus of S^1-invariant differential forms.
//
// An invariant form on a surface of revolution g = dθ² + a(θ)²dψ² with the
// circle acting by ψ -> ψ + mφ is determined by four functions of θ,
//
//     ω = u(θ) + g(θ)dθ + h(θ)dψ + w(θ)dθ∧dψ.
//
// u and h live on the integer nodes of a uniform θ-grid, g and w on the
// half-integer nodes. With that placement the exterior derivative is one
// forward-difference matrix D used in exactly two places (u -> g and h -> w),
// so d∘d = 0 and the Cartan relations hold as matrix identities.

#include "equimorse/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace equimorse {

enum class EndKind {
  kPole,          // a -> 0, |a'| -> 1; dψ-components vanish there
  kPeriodic,      // θ is an angle; both ends must be periodic
  kWallAbsolute,  // truncation of a flat model, free (Neumann) data
  kWallRelative,  // truncation of a flat model, u = h = 0 at the wall
};

std::string to_string(EndKind kind);

struct RevolutionProfile {
  double theta_max = 0.0;  // Θ, the θ-domain is [0, Θ]
  EndKind left = EndKind::kPole;
  EndKind right = EndKind::kPole;
  std::function<double(double)> radius;        // a(θ)
  std::function<double(double)> radius_slope;  // a'(θ)
  int weight = 1;                              // v = m ∂ψ
  int grid = 256;                              // N, number of θ cells

  /// Throws ValidationError on a malformed profile.
  void validate() const;
};

struct InvariantMorseFunction {
  std::function<double(double)> value;      // f
  std::function<double(double)> slope;      // f'
  std::function<double(double)> curvature;  // f''

  static InvariantMorseFunction constant(double c);
};

/// One named block of unknowns inside a form-degree space.
struct Component {
  std::string label;              // "u", "g", "h", "w", "1", "dpsi"
  std::vector<double> positions;  // θ of every unknown
  int offset = 0;
};

struct FormSpace {
  int dim = 0;
  Vector mass;  // diagonal quadrature weights, all > 0
  std::vector<Component> components;
};

/// The invariant-form calculus of one manifold model. Degree-indexed
/// accessors return correctly shaped empty matrices outside 0..n.
class BackendMatrices {
 public:
  int n = 0;
  int weight = 0;
  std::string description;
  std::vector<double> poles;
  double cell = 0.0;           // grid spacing (0 for the circle)
  double slope_bound = 0.0;    // max |f'| over the grid

  std::vector<FormSpace> forms;          // j = 0..n
  std::vector<SparseMatrix> d_;          // j -> j+1
  std::vector<SparseMatrix> iv_;         // j -> j-1
  std::vector<SparseMatrix> df_wedge_;   // j -> j+1
  std::vector<SparseMatrix> mult_df2_;   // j -> j, discrete {df∧, df⌟}
  std::vector<SparseMatrix> cliff_hess_; // j -> j, discrete Clifford Hessian
  std::vector<Vector> cliff_hess_pointwise_;  // f''Z1 + (a'/a)f'Z2 sampled
  std::vector<Vector> df2_pointwise_;         // f'^2 sampled

  int dim(int j) const;
  const Vector& mass(int j) const;
  SparseMatrix d(int j) const;
  SparseMatrix iv(int j) const;
  SparseMatrix vstar(int j) const;  // v*∧ : j -> j+1, mass adjoint of iv(j+1)
  SparseMatrix df_wedge(int j) const;
  SparseMatrix df_contract(int j) const;  // df⌟ : j -> j-1
  SparseMatrix mult_df2(int j) const;
  SparseMatrix cliff_hess(int j) const;

  /// Largest s for which e^{-sf}-conjugation of the discrete complex is
  /// invertible (s * cell * max|f'| / 2 < 1). Infinite when f is constant.
  double deformation_limit() const;

  /// Fills mult_df2_ and cliff_hess_ from the derivative and wedge matrices.
  void finalize_clifford();
};

/// Surface-of-revolution backend (n = 2), also used for flat disk and
/// cylinder local models via wall ends.
BackendMatrices build_backend(const RevolutionProfile& profile,
                              const InvariantMorseFunction& f);

/// M = S^1 acting on itself with speed m; Ω_G = span{1, dψ}.
BackendMatrices build_circle_backend(int weight);

/// An interval [0, Θ] with the trivial action (n = 1, i_v = 0).
BackendMatrices build_line_backend(double theta_max, EndKind left,
                                   EndKind right, int grid,
                                   const InvariantMorseFunction& f);

struct BackendReport {
  double d_squared = 0.0;
  double iv_squared = 0.0;
  double cartan = 0.0;
  double wedge_anticommute = 0.0;  // d df∧ + df∧ d and df∧ df∧
  double wedge_contract = 0.0;     // i_v df∧ + df∧ i_v
  double min_mass = 0.0;
  double scale = 0.0;
};

/// Checks every structural identity; throws InvalidBackendError naming the
/// first violated identity when a residual exceeds 1e-12 * scale.
BackendReport validate_backend(const BackendMatrices& backend);

}  // namespace equimorse
