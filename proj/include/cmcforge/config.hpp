// JSON run configuration for the batch front-end.
#pragma once

#include <map>
#include <string>

#include "cmcforge/sinh_gordon.hpp"

namespace cmcforge {

struct RunConfig {
  enum class SolutionKind { Vacuum, OneDimensional };

  SolutionKind solution = SolutionKind::Vacuum;
  double u0 = 0.5, du0 = 0.0;
  int periods = 1;

  int nx = 64, ny = 64;
  double lx = 2.0 * M_PI, ly = 2.0 * M_PI;  // lx ignored for one_dimensional
  bool periodic_x = true, periodic_y = true;

  double theta0 = 0.0, theta1 = 0.5;  // Sym points as angle fractions of 2 pi
  std::vector<Complex> lambda_samples;

  std::string pipeline = "verify-all";
  std::map<std::string, double> tolerance_overrides;
  std::string output_dir = "out";
  int delta_sign = 1;  // orientation of the period defect, translate - identity
  double hdot = 0.1;

  Complex lambda0() const { return std::exp(Complex(0, 2.0 * M_PI * theta0)); }
  Complex lambda1() const { return std::exp(Complex(0, 2.0 * M_PI * theta1)); }

  // Errors: ConfigInvalid (parse failure, bad ranges, unknown pipeline).
  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);

  SolutionPtr build_solution() const;
};

}  // namespace cmcforge
