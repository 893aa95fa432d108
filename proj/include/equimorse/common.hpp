#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace equimorse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// Error hierarchy. Every failure that a caller can act on has its own type so
// the CLI can map it onto the exit-code contract (config errors -> 2).

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid user input or a violated precondition of a run.
struct ConfigError : Error {
  using Error::Error;
};

/// Geometry or function data that does not describe a smooth invariant model.
struct ValidationError : ConfigError {
  using ConfigError::ConfigError;
};

/// A critical level whose Hessian is (numerically) singular.
struct DegeneracyError : ConfigError {
  using ConfigError::ConfigError;
};

/// Block dimensions that do not fit together while assembling an operator.
struct AssemblyError : Error {
  using Error::Error;
};

/// A backend that violates one of the structural identities.
struct InvalidBackendError : Error {
  using Error::Error;
};

/// Kernel and non-kernel eigenvalues are not separated by the required factor.
struct AmbiguityError : ConfigError {
  using ConfigError::ConfigError;
};

/// Iterative eigensolver did not reach the requested residual.
struct SolverError : Error {
  using Error::Error;
};

/// A trace evaluation that would silently drop spectral mass.
struct TailBoundError : Error {
  using Error::Error;
};

/// Largest absolute entry of a sparse matrix (0 for an empty one).
double max_abs(const SparseMatrix& m);

/// Mass-weighted adjoint M_dom^{-1} A^T M_cod of A : dom -> cod.
SparseMatrix mass_adjoint(const SparseMatrix& a, const Vector& mass_domain,
                          const Vector& mass_codomain);

}  // namespace equimorse
