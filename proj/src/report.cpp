#include "equimorse/report.hpp"

#include "equimorse/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace equimorse {

// ---------------------------------------------------------------------------
// INI parsing

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

IniFile IniFile::parse(const std::string& text, const std::string& source) {
  IniFile ini;
  std::istringstream is(text);
  std::string line, section = "case";
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where() + "empty section name");
      ini.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where() + "empty key");
    auto& sec = ini.sections_[section];
    if (sec.count(key)) throw ConfigError(where() + "duplicate key '" + key + "'");
    sec[key] = trim(line.substr(eq + 1));
  }
  return ini;
}

IniFile IniFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw ConfigError(what + ": '" + text + "' is not a number");
  return v;
}

int parse_integer(const std::string& text, const std::string& what) {
  const double v = parse_number(text, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(what + " must be an integer");
  return static_cast<int>(v);
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number(item, what));
  return out;
}

std::vector<int> parse_integer_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(parse_integer(item, what));
  return out;
}

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::apply(const IniFile& ini) {
  for (const auto& [section, keys] : ini.sections()) {
    for (const auto& [key, value] : keys) {
      const std::string what = section + "." + key;
      if (section == "case") {
        if (key == "name")
          case_name = value;
        else if (key == "grid" || key == "weight" || key == "radius" || key == "tube" ||
                 key == "center" || key == "c")
          params[key] = parse_number(value, what);
        else
          throw ConfigError("unknown key " + what);
      } else if (section == "spectral") {
        if (key == "s_probes")
          s_probes = parse_number_list(value, what);
        else if (key == "s_list")
          s_list = parse_number_list(value, what);
        else if (key == "kmax")
          kmax = parse_integer(value, what);
        else if (key == "degree")
          degree = parse_integer(value, what);
        else if (key == "count")
          count = parse_integer(value, what);
        else if (key == "phi")
          trace.kind = parse_phi(value);
        else if (key == "phi_scale")
          trace.scale = parse_number(value, what);
        else if (key == "localization_s")
          localization_s = parse_number(value, what);
        else if (key == "localization_tol")
          localization_tol = parse_number(value, what);
        else
          throw ConfigError("unknown key " + what);
      } else if (section == "output") {
        if (key == "out")
          out = value;
        else
          throw ConfigError("unknown key " + what);
      } else if (section == "local") {
        if (key == "kind")
          local.kind = value;
        else if (key == "n")
          local.n = parse_integer(value, what);
        else if (key == "weights")
          local.weights = parse_integer_list(value, what);
        else if (key == "eps")
          local.eps = parse_integer_list(value, what);
        else if (key == "lambdas")
          local.lambdas = parse_integer_list(value, what);
        else if (key == "orbit_weight")
          local.orbit_weight = parse_integer(value, what);
        else if (key == "s")
          local.s = parse_number(value, what);
        else if (key == "count_s")
          local.count_s = parse_number(value, what);
        else if (key == "a")
          local.a = parse_number(value, what);
        else if (key == "kmax")
          local.kmax = parse_integer(value, what);
        else if (key == "grid")
          local.grid = parse_integer(value, what);
        else
          throw ConfigError("unknown key " + what);
      } else {
        throw ConfigError("unknown section [" + section + "]");
      }
    }
  }
}

Json RunConfig::to_json() const {
  Json j;
  j["case"] = case_name;
  Json p = Json::object();
  for (const auto& [k, v] : params) p[k] = v;
  j["params"] = p;
  j["s_probes"] = s_probes;
  j["s_list"] = s_list;
  j["kmax"] = kmax ? Json(*kmax) : Json(nullptr);
  j["degree"] = degree;
  j["count"] = count;
  j["phi"] = {{"kind", to_string(trace.kind)}, {"scale", trace.scale}};
  j["localization"] = {{"s", localization_s}, {"tol", localization_tol}};
  return j;
}

// ---------------------------------------------------------------------------
// Reports

Json to_json(const SpectrumReport& r) {
  Json j;
  j["degree"] = r.degree;
  j["s"] = r.s;
  j["eigenvalues"] = r.eigenvalues;
  j["kernel_dim"] = r.kernel_dim;
  j["gap"] = r.gap;
  j["residual_norms"] = r.residual_norms;
  return j;
}

Json to_json(const std::vector<CriticalLevel>& levels) {
  Json arr = Json::array();
  for (const auto& l : levels)
    arr.push_back({{"kind", to_string(l.kind)},
                   {"theta", l.theta},
                   {"index", l.index},
                   {"weight", l.weight},
                   {"hessian", l.hessian}});
  return arr;
}

VerificationReport run_verification(const RunConfig& config) {
  const CatalogCase cc = make_case(config.case_name, config.params);
  if (cc.is_circle)
    throw ConfigError("case " + cc.name +
                      " has no Morse function; verify needs a surface case");
  config.trace.validate();
  const BackendMatrices backend = cc.backend();
  validate_backend(backend);
  const int n = backend.n;
  const int kmax = config.kmax.value_or(n + 3);
  if (kmax < n + 2) throw ConfigError("verify needs kmax >= n+2");

  const auto levels = find_critical_levels(cc.profile, cc.function);
  const MorseCounts counts = morse_counts(levels, kmax);
  const std::vector<int> betti = betti_numbers_probed(backend, kmax, config.s_probes);
  const Theorem1Report thm1 = verify_theorem1(counts, betti, n);
  const EulerReport euler = euler_checks(n, counts, betti);

  std::vector<Theorem2Report> thm2;
  for (double s : config.s_list)
    thm2.push_back(verify_theorem2(backend, s, kmax, config.trace, betti));

  bool pass = thm1.pass && thm1.stabilized && euler.pass && euler.proof_pass && euler.periodic_n;
  Json thm2_json = Json::array();
  for (const auto& t : thm2) {
    pass = pass && t.pass;
    thm2_json.push_back({{"s", t.s}, {"mu", t.mu}, {"slack", t.slack}, {"pass", t.pass}});
  }

  Json loc = nullptr;
  for (const auto& t : thm2) {
    if (t.s != config.localization_s) continue;
    double dev = 0.0;
    for (int k = 0; k <= kmax; ++k) dev = std::max(dev, std::abs(t.slack[k] - thm1.slack[k]));
    const bool ok = dev <= config.localization_tol;
    pass = pass && ok;
    loc = {{"s", t.s}, {"max_deviation", dev}, {"tol", config.localization_tol}, {"pass", ok}};
  }

  std::vector<int> expected = cc.expected_betti;
  expected.resize(std::min<std::size_t>(expected.size(), betti.size()));
  const bool betti_ok =
      std::equal(expected.begin(), expected.end(), betti.begin());
  pass = pass && betti_ok;

  Json j;
  j["case"] = cc.name;
  j["N"] = cc.profile.grid;
  j["s_probes"] = config.s_probes;
  j["betti"] = betti;
  j["c"] = counts.c;
  j["d"] = counts.d;
  j["tilde_c"] = counts.tilde_c;
  j["slack_thm1"] = thm1.slack;
  j["slack_thm2"] = thm2_json;
  j["euler"] = {{"lhs", euler.lhs}, {"rhs", euler.rhs}, {"pass", euler.pass}};
  j["status"] = pass ? "PASS" : "FAIL";
  j["details"] = {
      {"critical_levels", to_json(levels)},
      {"expected_betti", cc.expected_betti},
      {"betti_matches_expected", betti_ok},
      {"thm1_pass", thm1.pass},
      {"thm1_stabilized", thm1.stabilized},
      {"chi", euler.chi},
      {"poincare_hopf", {{"lhs", euler.proof_lhs}, {"rhs", euler.proof_rhs}, {"pass", euler.proof_pass}}},
      {"periodicity", {{"k=n", euler.periodic_n}, {"k=n-1", euler.periodic_n_minus_1}}},
      {"localization", loc},
      {"deformation_limit", backend.deformation_limit()}};
  Json cfg = config.to_json();
  cfg["params"] = Json::object();
  for (const auto& [k, v] : cc.params) cfg["params"][k] = v;
  cfg["kmax"] = kmax;
  j["config"] = cfg;
  return {j, pass};
}

VerificationReport run_local(const LocalRunConfig& c) {
  bool pass = true;
  Json j;

  // Oscillator.
  {
    const auto closed = ho_spectrum(c.a, 5);
    const auto grid = ho_grid_spectrum(c.a, 5);
    std::vector<double> rel;
    for (int p = 0; p < 5; ++p) rel.push_back(std::abs(grid[p] - closed[p]) / closed[p]);
    const double worst = *std::max_element(rel.begin(), rel.end());
    const auto w = ho_ground(c.a);
    const double big = std::sqrt(40.0 / c.a);
    const double norm = simpson([&](double x) { return w(x) * w(x); }, -big, big, 4000);
    const bool ok = worst <= 1e-3 && std::abs(norm - 1.0) <= 1e-10;
    pass = pass && ok;
    j["oscillator"] = {{"a", c.a},     {"closed", closed},        {"grid", grid},
                       {"rel_err", rel}, {"ground_norm", norm},
                       {"operator_residual", ho_operator_residual(c.a)}, {"pass", ok}};
  }

  const double m = c.weights.empty() ? c.orbit_weight : c.weights.front();
  const int eps = c.eps.empty() ? 1 : c.eps.front();

  // 2x2 block.
  {
    const auto pairs = block_matrix_eigen(c.s, m, eps);
    const Eigen::Matrix2d b = block_matrix(c.s, m, eps);
    double resid = 0.0;
    for (const auto& p : pairs) resid = std::max(resid, (b * p.vector - p.value * p.vector).norm());
    const double ortho = std::abs(pairs[0].vector.dot(pairs[1].vector));
    const bool ok = resid <= 1e-12 * b.norm() && ortho <= 1e-14;
    pass = pass && ok;
    j["block"] = {{"s", c.s},
                  {"m", m},
                  {"eps", eps},
                  {"eigenvalues", {pairs[0].value, pairs[1].value}},
                  {"residual", resid},
                  {"orthogonality", ortho},
                  {"pass", ok}};
  }

  // Branch spectra.
  {
    const auto closed = ab_branch_spectra(c.s, m, eps, 3);
    const auto grid = ab_branch_grid(c.s, m, eps, 3);
    Json arr = Json::array();
    bool ok = true;
    for (int b = 0; b < 2; ++b) {
      std::vector<double> err;
      for (int p = 0; p < 3; ++p) {
        const double want = closed[b].eigenvalues[p], got = grid[b].eigenvalues[p];
        const double e = want != 0.0 ? std::abs(got - want) / std::abs(want)
                                     : std::abs(got) / c.s;
        err.push_back(e);
        ok = ok && e <= 1e-2;
      }
      arr.push_back({{"branch", closed[b].label},
                     {"closed", closed[b].eigenvalues},
                     {"grid", grid[b].eigenvalues},
                     {"rel_err", err}});
    }
    pass = pass && ok;
    j["branches"] = {{"s", c.s}, {"m", m}, {"eps", eps}, {"spectra", arr}, {"pass", ok}};
  }

  // Contributions against near-zero counts.
  {
    LocalPointModel pm{c.n, c.weights, c.eps, c.lambdas, c.count_s};
    const bool orbit = c.kind == "orbit";
    if (!orbit && c.kind != "point") throw ConfigError("local.kind must be point or orbit");
    LocalOrbitModel om{c.orbit_weight, pm};
    const BackendMatrices backend =
        orbit ? orbit_model_backend(om, c.grid) : point_model_backend(pm, c.grid);
    std::vector<int> closed, counted;
    bool ok = true;
    Json gaps = Json::array();
    for (int k = 0; k <= c.kmax; ++k) {
      closed.push_back(orbit ? orbit_contribution(om, k) : point_contribution(pm, k));
      const NearZeroCount nz = near_zero_count(backend, k, c.count_s);
      counted.push_back(nz.count);
      gaps.push_back(nz.gap);
      ok = ok && nz.count == closed.back() && nz.separated;
    }
    pass = pass && ok;
    j["contributions"] = {{"kind", c.kind},
                          {"index", pm.morse_index()},
                          {"s", c.count_s},
                          {"closed", closed},
                          {"grid_near_zero", counted},
                          {"gap", gaps},
                          {"pass", ok}};
  }
  j["status"] = pass ? "PASS" : "FAIL";
  j["config"] = {{"kind", c.kind},        {"n", c.n},
                 {"weights", c.weights},  {"eps", c.eps},
                 {"lambdas", c.lambdas},  {"orbit_weight", c.orbit_weight},
                 {"s", c.s},              {"count_s", c.count_s},
                 {"a", c.a},              {"kmax", c.kmax},
                 {"grid", c.grid}};
  return {j, pass};
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string sweep_csv(const std::vector<SweepResult>& sweeps) {
  std::ostringstream os;
  os << "record,k,s,index,value,kernel_dim,gap\n";
  for (const auto& sw : sweeps) {
    for (const auto& p : sw.points) {
      const std::string tail =
          std::to_string(p.report.kernel_dim) + "," + format_double(p.report.gap) + "\n";
      for (std::size_t i = 0; i < p.report.eigenvalues.size(); ++i)
        os << "eigenvalue," << sw.degree << "," << format_double(p.report.s) << "," << i << ","
           << format_double(p.report.eigenvalues[i]) << "," << tail;
      os << "mu," << sw.degree << "," << format_double(p.report.s) << ",," << format_double(p.mu)
         << "," << tail;
    }
  }
  return os.str();
}

std::string spectrum_csv(const std::vector<SpectrumReport>& reports) {
  std::ostringstream os;
  os << "k,s,index,value\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
      os << r.degree << "," << format_double(r.s) << "," << i << ","
         << format_double(r.eigenvalues[i]) << "\n";
  return os.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("cannot move output into place at " + path);
  }
}

}  // namespace equimorse
