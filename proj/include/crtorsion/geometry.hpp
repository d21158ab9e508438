#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crtorsion/constants.hpp"
#include "crtorsion/errors.hpp"
#include "crtorsion/local_density.hpp"

namespace crtorsion {

/// Constant-Levi CR manifold data: dimension n, Levi eigenvalues, total
/// volume of X and the rank of the twisting bundle.
struct GeometryModel {
  int n = 1;
  LeviSpectrum levi;
  double volume = 1.0;
  int rank_e = 1;

  void validate() const {
    if (n < 1) throw DomainError("GeometryModel: n must be >= 1");
    if (levi.n() != n) throw DomainError("GeometryModel: eigenvalue count differs from n");
    if (!(volume > 0.0)) throw DomainError("GeometryModel: volume must be positive");
    if (rank_e < 1) throw DomainError("GeometryModel: rank_e must be >= 1");
  }
};

inline GeometryModel geometry_from_json(const nlohmann::json& j) {
  GeometryModel g;
  try {
    g.n = j.at("n").get<int>();
    g.levi = LeviSpectrum(j.at("eigenvalues").get<std::vector<double>>());
    g.volume = j.at("volume").get<double>();
    g.rank_e = j.at("rank_e").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("geometry JSON: ") + e.what(), 0);
  }
  g.validate();
  return g;
}

inline nlohmann::json geometry_to_json(const GeometryModel& g) {
  return {{"n", g.n}, {"eigenvalues", g.levi.eigenvalues()}, {"volume", g.volume}, {"rank_e", g.rank_e}};
}

inline GeometryModel load_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open geometry file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("geometry JSON " + path + ": " + e.what(), 0);
  }
  return geometry_from_json(j);
}

/// Circle bundle over CP^1 matching cp1_spectrum: Levi eigenvalue 1 and
/// vol(X) = 2pi * (Fubini-Study area 2pi).
inline GeometryModel cp1_geometry() {
  GeometryModel g;
  g.n = 1;
  g.levi = LeviSpectrum({1.0});
  g.volume = 4.0 * kPi * kPi;
  g.rank_e = 1;
  return g;
}

}  // namespace crtorsion
