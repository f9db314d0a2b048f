#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cmcforge/checks.hpp"
#include "cmcforge/mesh.hpp"

using namespace cmcforge;
namespace fs = std::filesystem;

namespace {

RunConfig small_vacuum_config() {
  return RunConfig::from_json_text(R"({
    "solution": {"type": "vacuum"},
    "grid": {"nx": 64, "ny": 64, "lx": 6.283185307179586, "ly": 6.283185307179586},
    "sym_points": {"theta0": 0.0, "theta1": 0.5},
    "pipeline": "surface",
    "output_dir": "unused"
  })");
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(RunConfig::from_json_text("{nonsense"), Error);
  try {
    RunConfig::from_json_text("{nonsense");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConfigInvalid);
  }
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"sym_points": {"theta0": 1.5, "theta1": 0.0}})"),
                  Error);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"sym_points": {"theta0": 0.2, "theta1": 0.2}})"),
                  Error);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"pipeline": "bogus"})"), Error);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"tolerances": {"conformality": -1.0}})"), Error);

  RunConfig ok = small_vacuum_config();
  CHECK(ok.lambda0() == Complex(1, 0));
  CHECK(std::abs(ok.lambda1() - Complex(-1, 0)) < 1e-15);
}

TEST_CASE("registry has at least 20 anchored checks") {
  const auto& reg = check_registry();
  CHECK(reg.size() >= 20);
  for (const auto& def : reg) {
    CHECK_FALSE(def.name.empty());
    CHECK_FALSE(def.anchor.empty());
    CHECK(def.tolerance > 0.0);
  }
  // machine-readable listing parses as JSON
  auto parsed = nlohmann::json::parse(checks_as_json());
  CHECK(parsed.is_array());
  CHECK(parsed.size() == reg.size());
}

TEST_CASE("surface pipeline writes a valid OBJ mesh, CSVs and a report") {
  RunConfig cfg = small_vacuum_config();
  std::string outdir = (fs::temp_directory_path() / "cmcforge_test_surface").string();
  fs::remove_all(outdir);
  RunOutputs out = run_pipeline(cfg, "surface", outdir);
  CHECK(out.all_pass);

  // report parses and has one entry per executed check
  std::ifstream rf(out.report_path);
  REQUIRE(rf.good());
  auto report = nlohmann::json::parse(rf);
  CHECK(report.at("pass").get<bool>());
  CHECK(report.at("checks").size() == out.results.size());

  // OBJ: right vertex count, all faces reference valid vertices, no NaN
  std::ifstream obj(fs::path(outdir) / "surface.obj");
  REQUIRE(obj.good());
  int nv = 0, nf = 0;
  std::string tok;
  std::vector<std::array<double, 3>> verts;
  while (obj >> tok) {
    if (tok == "v") {
      double x, y, z;
      obj >> x >> y >> z;
      CHECK(std::isfinite(x));
      CHECK(std::isfinite(y));
      CHECK(std::isfinite(z));
      verts.push_back({x, y, z});
      ++nv;
    } else if (tok == "f") {
      int a, b, c, d;
      obj >> a >> b >> c >> d;
      for (int idx : {a, b, c, d}) {
        CHECK(idx >= 1);
        CHECK(idx <= static_cast<int>(verts.size()) + (cfg.nx * cfg.ny));
      }
      ++nf;
    }
  }
  CHECK(nv == cfg.nx * cfg.ny);
  CHECK(nf == cfg.nx * cfg.ny);  // closed torus mesh

  CHECK(fs::exists(fs::path(outdir) / "conformality.csv"));
  std::ifstream csv(fs::path(outdir) / "conformality.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x,y,value");
}

TEST_CASE("reports are deterministic modulo timing") {
  RunConfig cfg = small_vacuum_config();
  std::string o1 = (fs::temp_directory_path() / "cmcforge_det_a").string();
  std::string o2 = (fs::temp_directory_path() / "cmcforge_det_b").string();
  RunOutputs a = run_pipeline(cfg, "surface", o1);
  RunOutputs b = run_pipeline(cfg, "surface", o2);
  REQUIRE(a.results.size() == b.results.size());
  for (size_t k = 0; k < a.results.size(); ++k) {
    CHECK(a.results[k].name == b.results[k].name);
    CHECK(a.results[k].value == b.results[k].value);  // bitwise identical
    CHECK(a.results[k].pass == b.results[k].pass);
  }
}

TEST_CASE("discrete mean curvature oracle on the two vacuum immersions") {
  // flat torus: H = 0 within 2 percent
  {
    Grid g = Grid::make(64, 64, 2 * M_PI / 64, 2 * M_PI / 64, Complex(0, 0), true, true);
    SolutionPtr s = vacuum(g);
    ConnectionForm cf = build_alpha(s);
    Immersion im = sym_bobenko(integrate_frame(cf, Complex(1, 0), 4),
                               integrate_frame(cf, Complex(-1, 0), 4), s);
    DiscreteCurvature dc = discrete_mean_curvature(im.f);
    CHECK(std::abs(dc.h_mean) <= 0.02);
  }
  // (1, i) Sym pair: H = -1 within 2 percent
  {
    Grid g = Grid::make(64, 64, 2 * M_PI / 64, 2 * M_PI / 64, Complex(0, 0), false, false);
    SolutionPtr s = vacuum(g);
    ConnectionForm cf = build_alpha(s);
    Immersion im = sym_bobenko(integrate_frame(cf, Complex(1, 0), 4),
                               integrate_frame(cf, Complex(0, 1), 4), s);
    DiscreteCurvature dc = discrete_mean_curvature(im.f);
    CHECK(std::abs(dc.h_mean - (-1.0)) <= 0.02);
  }
}

TEST_CASE("cli binary: exit codes") {
#ifdef CMCFORGE_BIN
  std::string bin = CMCFORGE_BIN;
  std::string cfgdir = CMCFORGE_CONFIG_DIR;
  std::string tmp = (fs::temp_directory_path() / "cmcforge_cli").string();
  fs::create_directories(tmp);

  // malformed JSON: exit 2, no outputs
  std::string bad = tmp + "/bad.json";
  std::ofstream(bad) << "{broken";
  int rc = std::system((bin + " run " + bad + " --out " + tmp + "/badout >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == 2);
  CHECK_FALSE(fs::exists(tmp + "/badout/report.json"));

  // an unreachable tolerance override fails with exit 1
  std::string failing = tmp + "/failing.json";
  std::ofstream(failing) << R"({
    "solution": {"type": "vacuum"},
    "grid": {"nx": 32, "ny": 32},
    "sym_points": {"theta0": 0.0, "theta1": 0.5},
    "pipeline": "surface",
    "tolerances": {"conformality": 1e-30},
    "output_dir": ")" << tmp << R"(/failout"
  })";
  rc = std::system((bin + " run " + failing + " >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == 1);

  // list-checks succeeds
  rc = std::system((bin + " list-checks --json >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == 0);
#endif
}
