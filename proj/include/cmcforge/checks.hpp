// Named check registry and pipeline runner shared by the CLI and the
// acceptance suite. Every check is a residual with a pinned tolerance and a
// short anchor naming the identity it verifies.
#pragma once

#include "cmcforge/config.hpp"

namespace cmcforge {

struct CheckDef {
  std::string name;
  std::string anchor;     // identity label, e.g. "omega-tau-sigma (iv)"
  std::string pipeline;   // surface | jacobi | hierarchy | spectral
  double tolerance;       // pinned; config may override by name
  bool lower_bound;       // pass when value >= tolerance (negative controls)
  bool vacuum_only;       // runs only on the vacuum configuration
  bool onedim_only;
};

const std::vector<CheckDef>& check_registry();

struct CheckResult {
  std::string name, anchor;
  double value = 0.0, tolerance = 0.0;
  bool pass = false;
  double seconds = 0.0;
};

struct RunOutputs {
  std::vector<CheckResult> results;
  bool all_pass = true;
  std::string report_path;
};

// Execute the named pipeline ("verify-all" runs everything applicable),
// write report.json plus the surface pipeline's OBJ/CSV artifacts into
// output_dir. Errors: ConfigInvalid.
RunOutputs run_pipeline(const RunConfig& cfg, const std::string& pipeline,
                        const std::string& output_dir);

std::string checks_as_text_table();
std::string checks_as_json();

}  // namespace cmcforge
