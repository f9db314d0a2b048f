// cmc-forge: batch verification front-end.
//   cmc-forge run <config.json> [--pipeline NAME] [--out DIR]
//   cmc-forge list-checks [--json]
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "cmcforge/checks.hpp"

int main(int argc, char** argv) {
  CLI::App app{"finite-type constant-mean-curvature surface toolkit"};
  app.require_subcommand(1);

  std::string config_path, pipeline_override, out_override;
  CLI::App* run = app.add_subcommand("run", "execute a pipeline from a JSON configuration");
  run->add_option("config", config_path, "path to the run configuration")->required();
  run->add_option("--pipeline", pipeline_override,
                  "surface | jacobi | hierarchy | spectral | verify-all");
  run->add_option("--out", out_override, "output directory");

  bool as_json = false;
  CLI::App* list = app.add_subcommand("list-checks", "print the named check registry");
  list->add_flag("--json", as_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (list->parsed()) {
      std::cout << (as_json ? cmcforge::checks_as_json() : cmcforge::checks_as_text_table())
                << std::endl;
      return 0;
    }
    cmcforge::RunConfig cfg = cmcforge::RunConfig::from_file(config_path);
    std::string pipeline = pipeline_override.empty() ? cfg.pipeline : pipeline_override;
    std::string outdir = out_override.empty() ? cfg.output_dir : out_override;
    cmcforge::RunOutputs out = cmcforge::run_pipeline(cfg, pipeline, outdir);
    for (const auto& res : out.results) {
      std::printf("%-34s %-6s value=%-12.4e tol=%-10.3g  [%s]\n", res.name.c_str(),
                  res.pass ? "PASS" : "FAIL", res.value, res.tolerance, res.anchor.c_str());
    }
    std::printf("report: %s\n", out.report_path.c_str());
    if (!out.all_pass) {
      for (const auto& res : out.results)
        if (!res.pass)
          std::fprintf(stderr, "check failed: %s (value %.6e)\n", res.name.c_str(), res.value);
      return 1;
    }
    return 0;
  } catch (const cmcforge::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == cmcforge::Errc::ConfigInvalid ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
