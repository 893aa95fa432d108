#pragma once

// Verification driver and the file formats of the CLI.

#include "equimorse/catalog.hpp"
#include "equimorse/local_models.hpp"
#include "equimorse/morse.hpp"
#include "equimorse/spectral.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace equimorse {

using Json = nlohmann::ordered_json;

/// Flat `key = value` text with `[section]` headers; `#` and `;` start comments.
class IniFile {
 public:
  static IniFile parse(const std::string& text, const std::string& source = "<string>");
  static IniFile load(const std::string& path);

  /// Section -> key -> raw value, in file order of first appearance.
  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

double parse_number(const std::string& text, const std::string& what);
int parse_integer(const std::string& text, const std::string& what);
std::vector<double> parse_number_list(const std::string& text, const std::string& what);
std::vector<int> parse_integer_list(const std::string& text, const std::string& what);

struct LocalRunConfig {
  std::string kind = "point";  // point | orbit
  int n = 2;
  std::vector<int> weights = {2};
  std::vector<int> eps = {-1};
  std::vector<int> lambdas;
  int orbit_weight = 1;
  double s = 10.0;         // branch spectra and block matrix
  double count_s = 64.0;   // near-zero counting
  double a = 1.0;          // oscillator frequency
  int kmax = 4;
  int grid = 200;
};

struct RunConfig {
  std::string case_name = "sphere_height";
  CatalogParams params;  // grid, weight, radius, tube, center, c
  std::vector<double> s_probes = {0.0, 4.0, 16.0};
  std::vector<double> s_list = {0.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  std::optional<int> kmax;  // default n + 3
  int degree = 0;
  int count = 10;
  double localization_s = 64.0;
  double localization_tol = 0.1;
  TraceSpec trace;
  std::string out;
  LocalRunConfig local;

  /// Applies one INI file on top of the current values. Unknown sections or
  /// keys raise ConfigError.
  void apply(const IniFile& ini);
  Json to_json() const;
};

struct VerificationReport {
  Json json;
  bool pass = false;
};

/// Checks one catalog case end to end and collects the results as JSON.
VerificationReport run_verification(const RunConfig& config);

Json to_json(const SpectrumReport& report);
Json to_json(const std::vector<CriticalLevel>& levels);

/// Local-model oracle report. `pass` is false on any disagreement.
VerificationReport run_local(const LocalRunConfig& config);

/// Sweep CSV: record,k,s,index,value,kernel_dim,gap (eigenvalue and mu rows).
std::string sweep_csv(const std::vector<SweepResult>& sweeps);

/// Eigenvalue CSV: k,s,index,value.
std::string spectrum_csv(const std::vector<SpectrumReport>& reports);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace equimorse
