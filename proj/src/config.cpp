#include "cmcforge/config.hpp"

#include <fstream>

#include <json.hpp>

namespace cmcforge {

namespace {

using nlohmann::json;

RunConfig parse(const json& j) {
  RunConfig c;
  try {
    if (j.contains("solution")) {
      const json& s = j.at("solution");
      std::string type = s.at("type").get<std::string>();
      if (type == "vacuum") {
        c.solution = RunConfig::SolutionKind::Vacuum;
      } else if (type == "one_dimensional") {
        c.solution = RunConfig::SolutionKind::OneDimensional;
        c.u0 = s.value("u0", 0.5);
        c.du0 = s.value("du0", 0.0);
        c.periods = s.value("periods", 1);
      } else {
        fail(Errc::ConfigInvalid, "config: unknown solution type " + type);
      }
    }
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      c.nx = g.value("nx", 64);
      c.ny = g.value("ny", 64);
      c.lx = g.value("lx", 2.0 * M_PI);
      c.ly = g.value("ly", 2.0 * M_PI);
      c.periodic_x = g.value("periodic_x", true);
      c.periodic_y = g.value("periodic_y", true);
    }
    if (j.contains("sym_points")) {
      c.theta0 = j.at("sym_points").value("theta0", 0.0);
      c.theta1 = j.at("sym_points").value("theta1", 0.5);
    }
    if (j.contains("lambda_samples")) {
      for (const auto& v : j.at("lambda_samples"))
        c.lambda_samples.push_back(Complex(v.at(0).get<double>(), v.at(1).get<double>()));
    }
    c.pipeline = j.value("pipeline", std::string("verify-all"));
    if (j.contains("tolerances"))
      for (auto it = j.at("tolerances").begin(); it != j.at("tolerances").end(); ++it)
        c.tolerance_overrides[it.key()] = it.value().get<double>();
    c.output_dir = j.value("output_dir", std::string("out"));
    c.delta_sign = j.value("delta_sign", 1);
    c.hdot = j.value("hdot", 0.1);
  } catch (const json::exception& e) {
    fail(Errc::ConfigInvalid, std::string("config: ") + e.what());
  }

  if (c.theta0 < 0.0 || c.theta0 >= 1.0 || c.theta1 < 0.0 || c.theta1 >= 1.0)
    fail(Errc::ConfigInvalid, "config: sym point angles must lie in [0, 1)");
  if (std::abs(c.theta0 - c.theta1) < 1e-12)
    fail(Errc::ConfigInvalid, "config: sym points coincide");
  for (const auto& [k, v] : c.tolerance_overrides)
    if (!(v > 0.0)) fail(Errc::ConfigInvalid, "config: tolerance " + k + " must be positive");
  if (c.pipeline != "surface" && c.pipeline != "jacobi" && c.pipeline != "hierarchy" &&
      c.pipeline != "spectral" && c.pipeline != "verify-all")
    fail(Errc::ConfigInvalid, "config: unknown pipeline " + c.pipeline);
  if (c.lambda_samples.empty())
    c.lambda_samples = {Complex(0.8, 0.3), Complex(0.45, -0.2)};
  return c;
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) fail(Errc::ConfigInvalid, "config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ConfigInvalid, std::string("config: ") + e.what());
  }
  return parse(j);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ConfigInvalid, std::string("config: ") + e.what());
  }
  return parse(j);
}

SolutionPtr RunConfig::build_solution() const {
  if (solution == SolutionKind::Vacuum) {
    Grid g = Grid::make_extent(nx, ny, lx, ly, Complex(0, 0), periodic_x, periodic_y);
    return vacuum(g);
  }
  double t = pendulum_period(u0, du0);
  double extent = t * periods;
  Grid g = Grid::make_extent(nx, ny, extent, ly, Complex(0, 0), periodic_x, periodic_y);
  return one_dimensional(g, u0, du0);
}

}  // namespace cmcforge
