#include "gfk/geomag.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gfk {

GroundTruthField default_earth_field() {
  GroundTruthField gt;
  // ~7.94e22 A·m² tilted 11 degrees from the rotation axis toward +x.
  const double m = 7.94e22;
  const double tilt = 11.0 * M_PI / 180.0;
  gt.sources.push_back({{0.0, 0.0, 0.0}, {m * std::sin(tilt), 0.0, -m * std::cos(tilt)}});
  return gt;
}

HarmonicCore load_core_coefficients(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open coefficient file: " + path);
  HarmonicCore core;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    int l, m;
    double value;
    if (!(ss >> l)) continue;  // blank/comment line
    if (!(ss >> m >> value))
      throw DataFormatError("malformed coefficient line " + std::to_string(lineno) +
                            " in " + path);
    if (l < 0 || std::abs(m) > l)
      throw DataFormatError("coefficient order out of range on line " +
                            std::to_string(lineno) + " in " + path);
    core.coefficients.push_back({l, m, value});
  }
  if (core.coefficients.empty())
    throw DataFormatError("no coefficients found in " + path);
  return core;
}

}  // namespace gfk
