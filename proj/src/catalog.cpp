#include "equimorse/catalog.hpp"

#include "equimorse/morse.hpp"

#include <cmath>
#include <numbers>

namespace equimorse {

namespace {

constexpr double kPi = std::numbers::pi;

double take(CatalogParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  const double v = it->second;
  p.erase(it);
  return v;
}

int take_int(CatalogParams& p, const std::string& key, int fallback) {
  const double v = take(p, key, fallback);
  if (v != std::floor(v)) throw ConfigError(key + " must be an integer");
  return static_cast<int>(v);
}

void reject_leftovers(const std::string& name, const CatalogParams& p) {
  if (!p.empty())
    throw ConfigError("case " + name + ": unknown parameter '" + p.begin()->first + "'");
}

RevolutionProfile sphere_profile(double radius, int weight, int grid) {
  if (!(radius > 0)) throw ConfigError("sphere radius must be positive");
  RevolutionProfile prof;
  prof.theta_max = kPi * radius;
  prof.left = prof.right = EndKind::kPole;
  prof.radius = [radius](double th) { return radius * std::sin(th / radius); };
  prof.radius_slope = [radius](double th) { return std::cos(th / radius); };
  prof.weight = weight;
  prof.grid = grid;
  return prof;
}

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"sphere_height", "sphere_bumpy",
                                                 "torus_height", "circle_trivial"};
  return names;
}

BackendMatrices CatalogCase::backend() const {
  if (is_circle) return build_circle_backend(profile.weight);
  return build_backend(profile, function);
}

CatalogCase make_case(const std::string& name, const CatalogParams& params) {
  CatalogParams p = params;
  CatalogCase c;
  c.name = name;
  const int grid = take_int(p, "grid", 256);
  const int weight = take_int(p, "weight", 1);
  c.params["grid"] = grid;
  c.params["weight"] = weight;

  if (name == "sphere_height" || name == "sphere_bumpy") {
    // The bumpy sphere defaults to radius 3 so that its critical orbits are
    // long: the t-shifted orbit states sit at |v|² = m²a² and do not move with s.
    const double radius = take(p, "radius", name == "sphere_bumpy" ? 3.0 : 1.0);
    c.params["radius"] = radius;
    c.profile = sphere_profile(radius, weight, grid);
    if (name == "sphere_height") {
      c.function = {[radius](double th) { return std::cos(th / radius); },
                    [radius](double th) { return -std::sin(th / radius) / radius; },
                    [radius](double th) { return -std::cos(th / radius) / (radius * radius); }};
      c.expected_betti = {1, 0, 2, 0, 2, 0};
      c.expected_tilde_c = {1, 0, 2, 0, 2, 0};
      c.summary = "round sphere, f = cos θ: maximum at the north pole, minimum at the south";
    } else {
      // f = cos θ + c cos 3θ: for c > 1/3 two critical latitudes appear at
      // cos θ = ±(1/2)sqrt(1 - 1/(3c)), a circle of minima and a circle of maxima.
      const double amp = take(p, "c", 0.6);
      c.params["c"] = amp;
      const double r = radius;
      c.function = {
          [r, amp](double th) { return std::cos(th / r) + amp * std::cos(3 * th / r); },
          [r, amp](double th) {
            return (-std::sin(th / r) - 3 * amp * std::sin(3 * th / r)) / r;
          },
          [r, amp](double th) {
            return (-std::cos(th / r) - 9 * amp * std::cos(3 * th / r)) / (r * r);
          }};
      c.expected_betti = {1, 0, 2, 0, 2, 0};
      if (amp > 1.0 / 3.0)
        c.expected_tilde_c = {2, 1, 2, 0, 2, 0};
      else
        c.expected_tilde_c = {1, 0, 2, 0, 2, 0};
      c.summary = "round sphere, f = cos θ + c cos 3θ: two extra critical latitudes";
    }
  } else if (name == "torus_height") {
    const double tube = take(p, "tube", 1.0);
    const double center = take(p, "center", 3.0);
    if (!(tube > 0) || !(center > tube))
      throw ConfigError("torus needs 0 < tube < center");
    c.params["tube"] = tube;
    c.params["center"] = center;
    RevolutionProfile prof;
    prof.theta_max = 2 * kPi * tube;
    prof.left = prof.right = EndKind::kPeriodic;
    prof.radius = [tube, center](double th) { return center + tube * std::cos(th / tube); };
    prof.radius_slope = [tube](double th) { return -std::sin(th / tube); };
    prof.weight = weight;
    prof.grid = grid;
    c.profile = prof;
    c.function = {[tube](double th) { return std::sin(th / tube); },
                  [tube](double th) { return std::cos(th / tube) / tube; },
                  [tube](double th) { return -std::sin(th / tube) / (tube * tube); }};
    c.expected_betti = {1, 1, 0, 0, 0};
    c.expected_tilde_c = {1, 1, 0, 0, 0};
    c.summary = "torus of revolution, free rotation, f = height along the tube";
  } else if (name == "circle_trivial") {
    c.is_circle = true;
    if (weight < 1) throw ConfigError("weight m must be a positive integer");
    c.profile.weight = weight;
    c.params.erase("grid");
    c.function = InvariantMorseFunction::constant(0.0);
    c.expected_betti = {1, 0, 0, 0, 0};
    c.summary = "S^1 acting on itself; algebraic checks only (no Morse function)";
    reject_leftovers(name, p);
    return c;
  } else {
    throw ConfigError("unknown case '" + name + "'");
  }
  reject_leftovers(name, p);
  c.profile.validate();
  // Rejects degenerate critical levels.
  (void)find_critical_levels(c.profile, c.function);
  return c;
}

}  // namespace equimorse
