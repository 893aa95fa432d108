#include "equimorse/morse.hpp"

#include "equimorse/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace equimorse {

std::string to_string(LevelKind kind) {
  return kind == LevelKind::kFixedPoint ? "fixed_point" : "orbit";
}

namespace {

constexpr int kScanSamples = 4096;
constexpr double kRootTol = 1e-12;
constexpr double kDegenerate = 1e-8;

double bisect(const std::function<double(double)>& g, double lo, double hi) {
  double glo = g(lo);
  while (hi - lo > kRootTol) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0) == (glo < 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void require_nondegenerate(double curvature, double theta) {
  if (std::abs(curvature) < kDegenerate) {
    std::ostringstream os;
    os << "degenerate critical level at θ=" << theta << " (|f''| = " << std::abs(curvature)
       << " < " << kDegenerate << ")";
    throw DegeneracyError(os.str());
  }
}

}  // namespace

std::vector<CriticalLevel> find_critical_levels(const RevolutionProfile& profile,
                                                const InvariantMorseFunction& f) {
  std::vector<CriticalLevel> out;
  const double big = profile.theta_max;
  const bool periodic = profile.left == EndKind::kPeriodic;

  auto add_pole = [&](double th) {
    const double c = f.curvature(th);
    require_nondegenerate(c, th);
    // Both normal directions see the same second derivative at a fixed point.
    out.push_back({LevelKind::kFixedPoint, th, c < 0 ? 2 : 0, profile.weight, {c, c}});
  };
  if (profile.left == EndKind::kPole) add_pole(0.0);

  // Sign changes of f' on the open interval (closed circle when periodic).
  const double step = big / kScanSamples;
  const int first = periodic ? 0 : 1;
  double prev_t = first * step, prev = f.slope(prev_t);
  auto handle_root = [&](double th) {
    const double c = f.curvature(th);
    require_nondegenerate(c, th);
    out.push_back({LevelKind::kOrbit, th, c < 0 ? 1 : 0, profile.weight, {c}});
  };
  if (prev == 0.0 && periodic) handle_root(prev_t);
  const int last = periodic ? kScanSamples : kScanSamples - 1;
  for (int i = first + 1; i <= last; ++i) {
    const double t = i * step;
    const double v = f.slope(periodic && i == kScanSamples ? 0.0 : t);
    if (v == 0.0) {
      if (!(periodic && i == kScanSamples)) handle_root(t);
    } else if (prev != 0.0 && (v < 0) != (prev < 0)) {
      double root = bisect(f.slope, prev_t, t);
      if (periodic && root >= big) root -= big;
      handle_root(root);
    }
    prev_t = t;
    prev = v;
  }
  if (profile.right == EndKind::kPole) add_pole(big);
  std::sort(out.begin(), out.end(),
            [](const CriticalLevel& a, const CriticalLevel& b) { return a.theta < b.theta; });
  return out;
}

MorseCounts morse_counts(const std::vector<CriticalLevel>& levels, int kmax) {
  if (kmax < 0) throw ConfigError("kmax must be >= 0");
  MorseCounts m;
  m.c.assign(kmax + 1, 0);
  m.d.assign(kmax + 1, 0);
  m.tilde_c.assign(kmax + 1, 0);
  for (const auto& l : levels) {
    if (l.index > kmax) continue;
    (l.kind == LevelKind::kFixedPoint ? m.c : m.d)[l.index] += 1;
  }
  for (int k = 0; k <= kmax; ++k) {
    m.tilde_c[k] = m.d[k];
    for (int j = k; j >= 0; j -= 2) m.tilde_c[k] += m.c[j];
  }
  return m;
}

std::vector<double> alternating_sums(const std::vector<double>& x) {
  std::vector<double> out(x.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    acc = x[k] - acc;
    out[k] = acc;
  }
  return out;
}

Theorem1Report verify_theorem1(const MorseCounts& counts, const std::vector<int>& betti, int n) {
  const std::size_t len = std::min(counts.tilde_c.size(), betti.size());
  std::vector<double> diff(len);
  for (std::size_t k = 0; k < len; ++k) diff[k] = counts.tilde_c[k] - betti[k];
  Theorem1Report r;
  for (double v : alternating_sums(diff)) r.slack.push_back(static_cast<int>(std::lround(v)));
  for (int v : r.slack)
    if (v < 0) r.pass = false;
  for (std::size_t k = n; k + 2 < r.slack.size(); ++k)
    if (r.slack[k + 2] != r.slack[k]) r.stabilized = false;
  return r;
}

Theorem2Report verify_theorem2(const BackendMatrices& backend, double s, int kmax,
                               const TraceSpec& trace, const std::vector<int>& betti,
                               const SolveOptions& options) {
  if (static_cast<int>(betti.size()) < kmax + 1)
    throw ConfigError("theorem 2 needs betti numbers up to kmax");
  Theorem2Report r;
  r.s = s;
  r.mu.assign(kmax + 1, 0.0);
  run_jobs(kmax + 1, [&](int k) {
    Eigen::setNbThreads(1);
    SolveOptions opt = options;
    // Only the trace is needed here; small tunnelling eigenvalues are legitimate.
    opt.check_separation = false;
    r.mu[k] = trace_phi(laplacian_spectrum(backend, k, s, -1, opt), trace);
  });
  std::vector<double> diff(kmax + 1);
  for (int k = 0; k <= kmax; ++k) diff[k] = r.mu[k] - betti[k];
  r.slack = alternating_sums(diff);
  for (double v : r.slack)
    if (v < -1e-8) r.pass = false;
  return r;
}

EulerReport euler_checks(int n, const MorseCounts& counts, const std::vector<int>& betti) {
  if (static_cast<int>(betti.size()) < n + 3)
    throw ConfigError("euler checks need betti numbers up to n+2");
  EulerReport r;
  for (std::size_t k = 0; k < counts.c.size(); ++k) r.chi += (k % 2 ? -1 : 1) * counts.c[k];
  const int sign_n = n % 2 ? -1 : 1;
  r.lhs = betti[n] - betti[n + 1];
  r.rhs = sign_n * r.chi;
  r.pass = r.lhs == r.rhs;
  auto c_at = [&](int k) { return k >= 0 && k < static_cast<int>(counts.c.size()) ? counts.c[k] : 0; };
  for (int k = n - 1; k >= 0; k -= 2) r.proof_lhs += c_at(k);
  for (int k = n; k >= 0; k -= 2) r.proof_lhs -= c_at(k);
  r.proof_rhs = -sign_n * r.chi;
  r.proof_pass = r.proof_lhs == r.proof_rhs;
  r.periodic_n = betti[n] == betti[n + 2];
  r.periodic_n_minus_1 = n >= 1 && betti[n - 1] == betti[n + 1];
  return r;
}

}  // namespace equimorse
