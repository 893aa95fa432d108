#pragma once

#include "equimorse/backend.hpp"

#include <map>
#include <string>
#include <vector>

namespace equimorse {

using CatalogParams = std::map<std::string, double>;

struct CatalogCase {
  std::string name;
  bool is_circle = false;  // algebraic-only case, no Morse function
  RevolutionProfile profile;
  InvariantMorseFunction function;
  CatalogParams params;  // effective parameters after defaults
  std::vector<int> expected_betti;
  std::vector<int> expected_tilde_c;
  std::string summary;

  BackendMatrices backend() const;
};

/// Names accepted by make_case.
const std::vector<std::string>& catalog_names();

/// Builds a validated catalog case. Recognized params: grid (N), weight (m),
/// radius (sphere R), tube / center (torus r, R), c (sphere_bumpy).
/// Throws ConfigError for unknown names or parameters, DegeneracyError when a
/// critical level is degenerate.
CatalogCase make_case(const std::string& name, const CatalogParams& params = {});

}  // namespace equimorse
