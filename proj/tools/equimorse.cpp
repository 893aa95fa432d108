// equimorse: command-line front end.
//
// Exit codes:
//   0  every check passed
//   1  a verification check failed
//   2  usage or configuration error

#include "equimorse/cartan.hpp"
#include "equimorse/parallel.hpp"
#include "equimorse/report.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <sstream>

using namespace equimorse;

namespace {

struct Flags {
  std::string config;
  std::string case_name;
  int grid = 0;
  int weight = 0;
  std::vector<double> s;
  int kmax = -1;
  int degree = -1;
  int count = 0;
  std::string phi;
  double phi_scale = 0.0;
  std::string out;
  std::string csv;
};

void add_common(CLI::App* cmd, Flags& f, bool with_case = true) {
  cmd->add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  if (with_case) {
    cmd->add_option("--case", f.case_name, "catalog case name");
    cmd->add_option("--n-grid", f.grid, "number of θ cells N")->check(CLI::PositiveNumber);
    cmd->add_option("--weight", f.weight, "action weight m")->check(CLI::PositiveNumber);
  }
  cmd->add_option("--s", f.s, "deformation parameter(s), comma separated")->delimiter(',');
  cmd->add_option("--kmax", f.kmax, "largest degree")->check(CLI::NonNegativeNumber);
  cmd->add_option("--phi", f.phi, "trace function: exp_decay | gaussian");
  cmd->add_option("--out", f.out, "output path (stdout if omitted)");
}

bool given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

RunConfig resolve(const Flags& f, const CLI::App* cmd) {
  RunConfig rc;
  if (!f.config.empty()) rc.apply(IniFile::load(f.config));
  if (given(cmd, "--case")) rc.case_name = f.case_name;
  if (given(cmd, "--n-grid")) rc.params["grid"] = f.grid;
  if (given(cmd, "--weight")) rc.params["weight"] = f.weight;
  if (given(cmd, "--s")) rc.s_list = f.s;
  if (given(cmd, "--kmax")) rc.kmax = f.kmax;
  if (given(cmd, "--degree")) rc.degree = f.degree;
  if (given(cmd, "--count")) rc.count = f.count;
  if (given(cmd, "--phi")) rc.trace.kind = parse_phi(f.phi);
  if (given(cmd, "--phi-scale")) rc.trace.scale = f.phi_scale;
  if (given(cmd, "--out")) rc.out = f.out;
  rc.trace.validate();
  if (rc.degree < 0) throw ConfigError("degree must be >= 0");
  return rc;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty())
    std::cout << content;
  else
    write_atomic(path, content);
}

std::string seq(const std::vector<int>& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

int cmd_catalog() {
  for (const auto& name : catalog_names()) {
    const CatalogCase c = make_case(name);
    std::cout << name << "\n  " << c.summary << "\n  params:";
    for (const auto& [k, v] : c.params) std::cout << " " << k << "=" << format_double(v);
    std::cout << "\n  expected betti " << seq(c.expected_betti)
              << "  (oracle: " << (name == "torus_height" || name == "circle_trivial"
                                       ? "free action, H_G(M) = H(M/S^1)"
                                       : "equivariant formality, P_M(u)/(1-u^2)")
              << ")\n";
    if (!c.expected_tilde_c.empty())
      std::cout << "  expected tilde_c " << seq(c.expected_tilde_c)
                << "  (oracle: tally of critical levels)\n";
  }
  return 0;
}

int cmd_verify(const RunConfig& rc) {
  const VerificationReport r = run_verification(rc);
  emit(rc.out, r.json.dump(2) + "\n");
  std::cerr << rc.case_name << ": " << (r.pass ? "PASS" : "FAIL") << "\n";
  return r.pass ? 0 : 1;
}

int cmd_spectrum(const RunConfig& rc, const std::string& csv) {
  const CatalogCase c = make_case(rc.case_name, rc.params);
  const BackendMatrices b = c.backend();
  const double s = rc.s_list.empty() ? 0.0 : rc.s_list.front();
  const int count = std::min(rc.count, build_delta_eq(b, rc.degree).domain.dim());
  const SpectrumReport r = laplacian_spectrum(b, rc.degree, s, count);
  Json j = to_json(r);
  j["config"] = rc.to_json();
  emit(rc.out, j.dump(2) + "\n");
  if (!csv.empty()) write_atomic(csv, spectrum_csv({r}));
  return 0;
}

int cmd_sweep(const RunConfig& rc) {
  const CatalogCase c = make_case(rc.case_name, rc.params);
  const BackendMatrices b = c.backend();
  std::vector<SweepResult> sweeps;
  if (!rc.s_list.empty()) {
    // μ needs the whole spectrum; the CSV lists the lowest `count` eigenvalues.
    SweepResult sw = sweep_s(b, rc.degree, rc.s_list, rc.trace, -1);
    for (auto& p : sw.points)
      if (static_cast<int>(p.report.eigenvalues.size()) > rc.count)
        p.report.eigenvalues.resize(rc.count);
    sweeps.push_back(std::move(sw));
  }
  emit(rc.out, sweep_csv(sweeps));
  return 0;
}

int cmd_local(RunConfig rc, const CLI::App* cmd, const Flags& f) {
  if (given(cmd, "--s")) {
    if (f.s.size() != 1) throw ConfigError("local takes a single --s");
    rc.local.s = f.s.front();
  }
  const VerificationReport r = run_local(rc.local);
  emit(rc.out, r.json.dump(2) + "\n");
  std::cerr << "local: " << (r.pass ? "PASS" : "FAIL") << "\n";
  return r.pass ? 0 : 1;
}

int cmd_report(const RunConfig& base) {
  std::vector<std::string> cases;
  for (const auto& n : catalog_names())
    if (!make_case(n).is_circle) cases.push_back(n);
  std::vector<VerificationReport> reports(cases.size());
  run_jobs(static_cast<int>(cases.size()), [&](int i) {
    RunConfig rc = base;
    rc.case_name = cases[i];
    rc.params.clear();
    reports[i] = run_verification(rc);
  });
  Json j;
  bool pass = true;
  Json summary = Json::array();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    pass = pass && reports[i].pass;
    summary.push_back(reports[i].json);
    std::cerr << std::left << std::setw(16) << cases[i] << (reports[i].pass ? "PASS" : "FAIL")
              << "\n";
  }
  j["cases"] = summary;
  j["status"] = pass ? "PASS" : "FAIL";
  emit(base.out, j.dump(2) + "\n");
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant Witten deformation and Morse inequalities on S^1-manifolds"};
  app.require_subcommand(1);
  Flags f;

  auto* catalog = app.add_subcommand("catalog", "list catalog cases and expected sequences");
  auto* verify = app.add_subcommand("verify", "check the Morse and trace inequalities and the Euler identities");
  add_common(verify, f);
  auto* spectrum = app.add_subcommand("spectrum", "lowest eigenvalues of one Laplacian");
  add_common(spectrum, f);
  auto* sweep = app.add_subcommand("sweep", "eigenvalues and traces over a list of s");
  add_common(sweep, f);
  auto* local = app.add_subcommand("local", "local-model oracles against grids");
  local->add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  local->add_option("--out", f.out, "output path (stdout if omitted)");
  local->add_option("--s", f.s, "s for the block matrix and branch spectra")->delimiter(',');
  auto* report = app.add_subcommand("report", "verify every surface case of the catalog");
  add_common(report, f, false);

  for (auto* cmd : {spectrum, sweep}) {
    cmd->add_option("--degree", f.degree, "total degree k")->check(CLI::NonNegativeNumber);
    cmd->add_option("--count", f.count, "eigenvalues to list")->check(CLI::PositiveNumber);
  }
  for (auto* cmd : {verify, sweep, report})
    cmd->add_option("--phi-scale", f.phi_scale, "scale σ of φ")->check(CLI::PositiveNumber);
  spectrum->add_option("--csv", f.csv, "also write eigenvalue CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    worker_count();  // validates EQUIMORSE_THREADS up front
    if (catalog->parsed()) return cmd_catalog();
    if (local->parsed()) return cmd_local(resolve(f, local), local, f);
    if (verify->parsed()) return cmd_verify(resolve(f, verify));
    if (spectrum->parsed()) return cmd_spectrum(resolve(f, spectrum), f.csv);
    if (sweep->parsed()) return cmd_sweep(resolve(f, sweep));
    if (report->parsed()) return cmd_report(resolve(f, report));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
