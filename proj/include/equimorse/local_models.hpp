#pragma once

// Flat local models at critical points and critical orbits. Every closed-form
// spectrum here has a grid oracle that reproduces it numerically.

#include "equimorse/backend.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace equimorse {

// --- harmonic oscillator -d²/dx² + a²x² ------------------------------------

/// {a(1+2p) : p = 0..count-1}.
std::vector<double> ho_spectrum(double a, int count);

/// x ↦ (a/π)^{1/4} exp(-a x²/2), unit L²-norm.
std::function<double(double)> ho_ground(double a);

/// Lowest `count` eigenvalues of the 3-point discretization on [-R, R] with
/// R = sqrt(40/a) and `intervals` cells, Dirichlet ends.
std::vector<double> ho_grid_spectrum(double a, int count, int intervals = 600);

/// max over interior grid points of |(-W'' + a²x²W) - aW| / max |aW|.
double ho_operator_residual(double a, int intervals = 600);

/// Composite Simpson rule on [lo, hi] with an even number of panels.
double simpson(const std::function<double(double)>& g, double lo, double hi, int panels);

/// Smooth bump exp(1 - 1/(1-x²)) on (-1, 1), zero outside; bump(0) = 1.
double bump(double x);

/// <β W_a, W_a> with β = bump.
double ho_localization(double a);

// --- 2x2 block on span{t, η} -------------------------------------------------

struct BlockEigenPair {
  double value = 0.0;
  Eigen::Vector2d vector;
};

/// [[-2εs, 2m], [2m, 2εs]].
Eigen::Matrix2d block_matrix(double s, double m, int eps);

/// Eigenpairs of block_matrix in ascending order, eigenvalues ±2 sqrt(s²+m²),
/// eigenvectors normalized and computed without cancellation.
std::array<BlockEigenPair, 2> block_matrix_eigen(double s, double m, int eps);

// --- branch spectra ------------------------------------------------------------

struct BranchSpectrum {
  std::string label;
  std::vector<double> eigenvalues;  // ascending
};

/// Branch A: 2s(1+2p) - 2εs. Branch B: 2s'(1+2p) ± 2s' with s'² = s² + m².
std::array<BranchSpectrum, 2> ab_branch_spectra(double s, double m, int eps, int count);

/// The same two branches from a cell-centred radial grid (zero angular
/// momentum) on (0, R], R = sqrt(40/s'), Dirichlet at R.
std::array<BranchSpectrum, 2> ab_branch_grid(double s, double m, int eps, int count,
                                              int cells = 400);

// --- models and contributions --------------------------------------------------

struct LocalPointModel {
  int n = 2;
  std::vector<int> weights;  // m_1..m_q
  std::vector<int> eps;      // ε_1..ε_q
  std::vector<int> lambdas;  // λ_{2q+1}..λ_n
  double s = 64.0;

  int q() const { return static_cast<int>(weights.size()); }
  int morse_index() const;
  void validate() const;
};

struct LocalOrbitModel {
  int weight = 1;
  LocalPointModel transverse;  // ambient n - 1
  double radius = 0.0;         // orbit radius; 0 selects the normal-form radius s

  double orbit_radius() const { return radius > 0.0 ? radius : transverse.s; }

  int morse_index() const { return transverse.morse_index(); }
  void validate() const;
};

/// 1 iff k >= index and k - index is even.
int point_contribution(const LocalPointModel& model, int k);

/// 1 iff the transversal index equals k.
int orbit_contribution(const LocalOrbitModel& model, int k);

/// Σ point contributions + Σ orbit contributions.
int asymptotic_counts(const std::vector<LocalPointModel>& points,
                      const std::vector<LocalOrbitModel>& orbits, int k);

struct NearZeroCount {
  int count = 0;        // eigenvalues < s/10
  double largest = 0.0; // largest of those (0 if none)
  double gap = 0.0;     // smallest eigenvalue >= s/10
  bool separated = false;  // gap >= s/2
};

/// Backend realizing the flat model on a truncated domain. Point models use a
/// disk (q=1, n=2) or an interval (q=0, n=1); orbit models use a cylinder.
/// Walls are absolute where f increases outward, relative otherwise.
BackendMatrices point_model_backend(const LocalPointModel& model, int grid = 200);
BackendMatrices orbit_model_backend(const LocalOrbitModel& model, int grid = 200);

NearZeroCount near_zero_count(const BackendMatrices& backend, int k, double s);

// --- Clifford Hessian on the exterior fiber -----------------------------------

/// Diagonal matrix on Λ(R^n) (basis monomials by bitmask) with entries
/// Σ λ_i (+1 if dx_i divides the monomial, -1 otherwise).
Matrix clifford_hessian_fiber(const std::vector<double>& lambdas);

/// Σ λ_i [dx_i∧, dx_i⌟] built from the wedge and contraction matrices.
Matrix clifford_hessian_fiber_direct(const std::vector<double>& lambdas);

}  // namespace equimorse
