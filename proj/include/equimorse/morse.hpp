#pragma once

// Morse data of an invariant function on a surface of revolution and the
// end-to-end checks of the equivariant Morse inequalities.

#include "equimorse/backend.hpp"
#include "equimorse/spectral.hpp"

#include <string>
#include <vector>

namespace equimorse {

enum class LevelKind { kFixedPoint, kOrbit };

std::string to_string(LevelKind kind);

struct CriticalLevel {
  LevelKind kind = LevelKind::kOrbit;
  double theta = 0.0;
  int index = 0;  // transversal Morse index
  int weight = 1;
  std::vector<double> hessian;  // normal Hessian eigenvalues
};

/// Dense sign-change scan of f' (4096 samples) refined by bisection to 1e-12;
/// pole ends become fixed points. Throws DegeneracyError when |f''| < 1e-8.
std::vector<CriticalLevel> find_critical_levels(const RevolutionProfile& profile,
                                                const InvariantMorseFunction& f);

struct MorseCounts {
  std::vector<int> c;  // fixed points by index
  std::vector<int> d;  // critical orbits by index
  std::vector<int> tilde_c;
};

/// Tallies levels by index and forms c̃_k = d_k + c_k + c_{k-2} + ... for k = 0..kmax.
MorseCounts morse_counts(const std::vector<CriticalLevel>& levels, int kmax);

/// Alternating partial sums Σ_{j<=k} (-1)^{k-j} x_j.
std::vector<double> alternating_sums(const std::vector<double>& x);

struct Theorem1Report {
  std::vector<int> slack;
  bool pass = true;        // every slack_k >= 0
  bool stabilized = true;  // slack_{k+2} = slack_k for n <= k <= kmax-2
};

Theorem1Report verify_theorem1(const MorseCounts& counts, const std::vector<int>& betti, int n);

struct Theorem2Report {
  double s = 0.0;
  std::vector<double> mu;
  std::vector<double> slack;
  bool pass = true;  // slack_k >= -1e-8
};

/// μ^k = tr φ(Δ_eq,s^k) for k <= kmax from full spectra, slack against betti.
Theorem2Report verify_theorem2(const BackendMatrices& backend, double s, int kmax,
                               const TraceSpec& trace, const std::vector<int>& betti,
                               const SolveOptions& options = {});

struct EulerReport {
  int chi = 0;               // Σ over fixed points of (-1)^index
  int lhs = 0;               // β^n - β^{n+1}
  int rhs = 0;               // (-1)^n χ
  bool pass = false;
  int proof_lhs = 0;         // (c_{n-1} + c_{n-3} + ...) - (c_n + c_{n-2} + ...)
  int proof_rhs = 0;         // (-1)^{n-1} χ
  bool proof_pass = false;
  bool periodic_n = false;   // β^n = β^{n+2}
  bool periodic_n_minus_1 = false;  // β^{n-1} = β^{n+1} (reported, not gated)
};

EulerReport euler_checks(int n, const MorseCounts& counts, const std::vector<int>& betti);

}  // namespace equimorse
