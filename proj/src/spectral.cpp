#include "equimorse/spectral.hpp"

#include "equimorse/cartan.hpp"
#include "equimorse/parallel.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace equimorse {

namespace {

// S = M^{1/2} A M^{-1/2}, symmetrized to wash out round-off asymmetry.
SparseMatrix scaled_symmetric(const SparseMatrix& op, const Vector& mass) {
  if (op.rows() != op.cols() || op.rows() != mass.size())
    throw ConfigError("eigensolve: operator and mass sizes disagree");
  if (mass.size() > 0 && !(mass.minCoeff() > 0.0))
    throw ConfigError("eigensolve: mass must be positive");
  const Vector root = mass.cwiseSqrt();
  SparseMatrix s = op;
  for (int r = 0; r < s.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(s, r); it; ++it)
      it.valueRef() *= root[it.row()] / root[it.col()];
  SparseMatrix sym = 0.5 * (s + SparseMatrix(s.transpose()));
  sym.makeCompressed();
  return sym;
}

double inf_norm(const SparseMatrix& s) {
  double best = 0.0;
  for (int r = 0; r < s.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(s, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

void dense_solve(const SparseMatrix& s, int count, SpectrumReport& out) {
  const Matrix a(s);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
  const Vector& ev = es.eigenvalues();
  const int keep = count < 0 ? static_cast<int>(ev.size()) : count;
  out.eigenvalues.assign(ev.data(), ev.data() + keep);
  out.op_norm = ev.size() ? std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1])) : 0.0;
  out.complete = keep == ev.size();
  const Matrix resid = a * es.eigenvectors().leftCols(keep) -
                       es.eigenvectors().leftCols(keep) * ev.head(keep).asDiagonal();
  out.residual_norms.resize(keep);
  for (int j = 0; j < keep; ++j) out.residual_norms[j] = resid.col(j).norm();
}

// Shift-invert subspace iteration with Rayleigh-Ritz on the block.
void iterative_solve(const SparseMatrix& s, int count, const SolveOptions& opt,
                     SpectrumReport& out) {
  const int n = static_cast<int>(s.rows());
  const double norm = inf_norm(s);
  out.op_norm = norm;
  if (count < 0) count = n;
  const int block = std::min(n, count + std::max(10, count));
  const double shift = 1e-8 * std::max(norm, 1.0);

  SparseMatrix shifted = s;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(Eigen::SparseMatrix<double>(shifted));
  if (ldlt.info() != Eigen::Success) throw SolverError("shift-invert factorization failed");

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, block);
  for (int c = 0; c < block; ++c)
    for (int r = 0; r < n; ++r) x(r, c) = normal(rng);

  Vector theta;
  Matrix sx;
  const double target = 1e-10 * std::max(norm, 1e-300);
  std::vector<double> resid(count, std::numeric_limits<double>::infinity());
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    x = ldlt.solve(x);
    Eigen::HouseholderQR<Matrix> qr(x);
    x = qr.householderQ() * Matrix::Identity(n, block);
    spmm(s, x, sx);
    Matrix h = x.transpose() * sx;
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> small(h);
    theta = small.eigenvalues();
    x = x * small.eigenvectors();
    sx = sx * small.eigenvectors();
    bool done = true;
    for (int j = 0; j < count; ++j) {
      resid[j] = (sx.col(j) - theta[j] * x.col(j)).norm();
      if (resid[j] > target) done = false;
    }
    if (done) {
      out.eigenvalues.assign(theta.data(), theta.data() + count);
      out.residual_norms = resid;
      out.complete = count == n;
      return;
    }
  }
  std::ostringstream os;
  os << "shift-invert iteration did not converge after " << opt.max_iterations
     << " iterations; worst residual " << *std::max_element(resid.begin(), resid.end())
     << " (target " << target << ")";
  throw SolverError(os.str());
}

}  // namespace

void detect_kernel(SpectrumReport& report, const SolveOptions& opt) {
  const auto& ev = report.eigenvalues;
  report.kernel_dim = 0;
  report.gap = 0.0;
  if (ev.empty()) return;
  const double tau_abs = opt.tau_abs_factor * report.op_norm;
  auto first_above = std::find_if(ev.begin(), ev.end(), [&](double v) { return v > tau_abs; });
  if (first_above == ev.end()) {
    if (!report.complete)
      throw AmbiguityError("every computed eigenvalue is below the kernel threshold; "
                           "increase the eigenvalue count");
    report.kernel_dim = static_cast<int>(ev.size());
    return;
  }
  const double threshold = tau_abs + opt.tau_rel * *first_above;
  report.kernel_dim = static_cast<int>(
      std::count_if(ev.begin(), ev.end(), [&](double v) { return v < threshold; }));
  report.gap = ev[report.kernel_dim];
  if (opt.check_separation && report.kernel_dim > 0) {
    // Round-off floor: an exact zero is never "too close" to the gap.
    const double floor = 1e-14 * report.op_norm;
    const double kmax = std::max(ev[report.kernel_dim - 1], floor);
    if (report.gap < opt.separation * kmax) {
      std::ostringstream os;
      os << "ambiguous kernel in degree " << report.degree << " at s=" << report.s
         << ": largest kernel eigenvalue " << kmax << ", gap " << report.gap
         << " (need factor " << opt.separation << "); increase N or the eigenvalue count";
      throw AmbiguityError(os.str());
    }
  }
}

SpectrumReport eigensolve(const SparseMatrix& op, const Vector& mass, int count,
                          const SolveOptions& opt) {
  const int n = static_cast<int>(op.rows());
  if (count > n) throw ConfigError("eigensolve: count exceeds the dimension");
  SpectrumReport out;
  out.dim = n;
  if (n == 0) {
    out.complete = true;
    return out;
  }
  const SparseMatrix s = scaled_symmetric(op, mass);
  if (n < opt.dense_limit && !opt.force_iterative)
    dense_solve(s, count, out);
  else
    iterative_solve(s, count, opt, out);
  detect_kernel(out, opt);
  return out;
}

SpectrumReport laplacian_spectrum(const BackendMatrices& backend, int k, double s, int count,
                                  const SolveOptions& opt) {
  if (s < 0.0) throw ConfigError("s must be nonnegative");
  if (s >= backend.deformation_limit()) {
    std::ostringstream os;
    os << "s=" << s << " exceeds the deformation limit " << backend.deformation_limit()
       << " of this grid (need s*h*max|f'|/2 < 1); increase N";
    throw ConfigError(os.str());
  }
  const EqOperator lap = build_deformed_laplacian(backend, s, k);
  SpectrumReport r;
  r.degree = k;
  r.s = s;
  try {
    r = eigensolve(lap.matrix, lap.domain.mass(),
                   count < 0 ? -1 : std::min(count, lap.domain.dim()), opt);
  } catch (AmbiguityError& e) {
    throw AmbiguityError(std::string(e.what()) + " [degree " + std::to_string(k) + ", s=" +
                         std::to_string(s) + "]");
  }
  r.degree = k;
  r.s = s;
  return r;
}

std::vector<int> betti_numbers(const BackendMatrices& backend, int kmax, double s,
                               const SolveOptions& opt) {
  if (kmax < 0) throw ConfigError("kmax must be >= 0");
  std::vector<int> beta(kmax + 1, 0);
  run_jobs(kmax + 1, [&](int k) {
    Eigen::setNbThreads(1);
    beta[k] = laplacian_spectrum(backend, k, s, -1, opt).kernel_dim;
  });
  return beta;
}

const std::vector<double>& default_betti_probes() {
  static const std::vector<double> probes = {0.0, 4.0, 16.0};
  return probes;
}

std::vector<int> betti_numbers_probed(const BackendMatrices& backend, int kmax,
                                      const std::vector<double>& probes,
                                      const SolveOptions& opt) {
  if (probes.empty()) throw ConfigError("betti probe set is empty");
  const int jobs = static_cast<int>(probes.size()) * (kmax + 1);
  std::vector<int> table(jobs, 0);
  run_jobs(jobs, [&](int id) {
    Eigen::setNbThreads(1);
    const int p = id / (kmax + 1), k = id % (kmax + 1);
    table[id] = laplacian_spectrum(backend, k, probes[p], -1, opt).kernel_dim;
  });
  std::vector<int> beta(table.begin(), table.begin() + kmax + 1);
  for (std::size_t p = 1; p < probes.size(); ++p) {
    for (int k = 0; k <= kmax; ++k) {
      const int v = table[p * (kmax + 1) + k];
      if (v != beta[k]) {
        std::ostringstream os;
        os << "kernel dimension in degree " << k << " depends on s (" << beta[k] << " at s="
           << probes[0] << ", " << v << " at s=" << probes[p]
           << "); the grid is too coarse for this s";
        throw ConfigError(os.str());
      }
    }
  }
  return beta;
}

double TraceSpec::phi(double x) const {
  const double y = std::max(x, 0.0) / scale;
  return kind == PhiKind::kExpDecay ? std::exp(-y) : std::exp(-y * y);
}

void TraceSpec::validate() const {
  if (!(scale > 0.0)) throw ConfigError("phi scale must be positive");
}

std::string to_string(PhiKind kind) {
  return kind == PhiKind::kExpDecay ? "exp_decay" : "gaussian";
}

PhiKind parse_phi(const std::string& name) {
  if (name == "exp_decay" || name == "exp") return PhiKind::kExpDecay;
  if (name == "gaussian") return PhiKind::kGaussian;
  throw ConfigError("unknown phi '" + name + "' (expected exp_decay or gaussian)");
}

double trace_phi(const std::vector<double>& eigenvalues, const TraceSpec& trace) {
  trace.validate();
  double sum = 0.0;
  for (double v : eigenvalues) sum += trace.phi(v);
  return sum;
}

double trace_phi(const SpectrumReport& report, const TraceSpec& trace) {
  if (!report.complete && !report.eigenvalues.empty()) {
    const int missing = report.dim - static_cast<int>(report.eigenvalues.size());
    const double tail = trace.phi(report.eigenvalues.back()) * missing;
    if (tail > 1e-6) {
      std::ostringstream os;
      os << "trace tail bound " << tail << " > 1e-6 in degree " << report.degree
         << "; request more eigenvalues";
      throw TailBoundError(os.str());
    }
  } else if (!report.complete && report.dim > 0) {
    throw TailBoundError("trace of an unresolved spectrum");
  }
  return trace_phi(report.eigenvalues, trace);
}

SweepResult sweep_s(const BackendMatrices& backend, int k, const std::vector<double>& s_list,
                    const TraceSpec& trace, int count, const SolveOptions& opt) {
  trace.validate();
  for (std::size_t i = 0; i < s_list.size(); ++i) {
    if (s_list[i] < 0.0) throw ConfigError("s values must be nonnegative");
    if (i > 0 && s_list[i] < s_list[i - 1]) throw ConfigError("s_list must be ascending");
  }
  SweepResult out;
  out.degree = k;
  out.points.resize(s_list.size());
  run_jobs(static_cast<int>(s_list.size()), [&](int i) {
    Eigen::setNbThreads(1);
    SweepPoint& p = out.points[i];
    p.report = laplacian_spectrum(backend, k, s_list[i], count, opt);
    p.mu = trace_phi(p.report, trace);
  });
  for (const auto& p : out.points)
    if (p.report.kernel_dim != out.points.front().report.kernel_dim) out.kernel_constant = false;
  if (!out.points.empty()) {
    int from = static_cast<int>(out.points.size()) - 1;
    while (from > 0 && out.points[from - 1].report.gap <= out.points[from].report.gap) --from;
    out.gap_monotone_from = s_list[from];
  }
  return out;
}

}  // namespace equimorse
