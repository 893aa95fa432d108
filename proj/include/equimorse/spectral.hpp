#pragma once

// Eigenproblems of the assembled Laplacians. Kernel dimensions and traces
// are read off the computed spectra.

#include "equimorse/backend.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace equimorse {

struct SpectrumReport {
  int degree = 0;
  double s = 0.0;
  int dim = 0;                      // dimension of the operator
  std::vector<double> eigenvalues;  // ascending
  int kernel_dim = 0;
  double gap = 0.0;                 // smallest eigenvalue above the kernel threshold (0 if none)
  std::vector<double> residual_norms;
  double op_norm = 0.0;
  bool complete = false;            // eigenvalues is the full spectrum
};

struct SolveOptions {
  int dense_limit = 2000;      // dense below this dimension
  bool force_iterative = false;
  double tau_abs_factor = 1e-9;
  double tau_rel = 1e-3;
  double separation = 100.0;   // required gap / largest kernel eigenvalue
  bool check_separation = true;
  int max_iterations = 300;
  std::uint64_t seed = 0x5eed5eedULL;
};

/// Smallest `count` eigenvalues of the operator `op`, self-adjoint in the
/// diagonal inner product `mass` (count < 0 requests the full spectrum).
/// Throws SolverError when the iteration stalls, AmbiguityError when the kernel
/// is not separated from the rest by the required factor.
SpectrumReport eigensolve(const SparseMatrix& op, const Vector& mass, int count,
                          const SolveOptions& options = {});

/// Spectrum of Δ_eq,s^k on a backend.
SpectrumReport laplacian_spectrum(const BackendMatrices& backend, int k, double s, int count = -1,
                                  const SolveOptions& options = {});

/// Kernel dimension by the threshold rule on an ascending spectrum; fills
/// kernel_dim and gap and applies the separation check.
void detect_kernel(SpectrumReport& report, const SolveOptions& options);

/// β_eq^0..β_eq^kmax at one deformation parameter.
std::vector<int> betti_numbers(const BackendMatrices& backend, int kmax, double s,
                               const SolveOptions& options = {});

/// Default probe set for the s-independence check.
const std::vector<double>& default_betti_probes();

/// β_eq computed at every probe; throws ConfigError if they disagree.
std::vector<int> betti_numbers_probed(const BackendMatrices& backend, int kmax,
                                      const std::vector<double>& probes,
                                      const SolveOptions& options = {});

enum class PhiKind { kExpDecay, kGaussian };

struct TraceSpec {
  PhiKind kind = PhiKind::kExpDecay;
  double scale = 1.0;  // σ: φ(x) = exp(-x/σ) or exp(-(x/σ)²)

  double phi(double x) const;
  void validate() const;
};

std::string to_string(PhiKind kind);
PhiKind parse_phi(const std::string& name);

/// Σ φ(λ_j). Partial spectra must satisfy φ(λ_last)(dim - count) <= 1e-6,
/// otherwise TailBoundError.
double trace_phi(const SpectrumReport& report, const TraceSpec& trace);
double trace_phi(const std::vector<double>& eigenvalues, const TraceSpec& trace);

struct SweepPoint {
  SpectrumReport report;
  double mu = 0.0;
};

struct SweepResult {
  int degree = 0;
  std::vector<SweepPoint> points;
  bool kernel_constant = true;
  double gap_monotone_from = -1.0;  // smallest s beyond which gap is nondecreasing (-1: never)
};

/// (k, s) jobs run in parallel; results are ordered like s_list.
SweepResult sweep_s(const BackendMatrices& backend, int k, const std::vector<double>& s_list,
                    const TraceSpec& trace, int count = -1, const SolveOptions& options = {});

}  // namespace equimorse
