#pragma once

#include "panelclim/runconfig.hpp"
#include "panelclim/store.hpp"

#include <string>
#include <vector>

namespace panelclim {

inline constexpr std::string_view kEngineVersion = "panelclim 1.0.0";

// Stage names in execution order.
const std::vector<std::string>& pipeline_stages();

struct StageReport {
    std::string name;
    bool skipped = false;
    double seconds = 0.0;
};

struct RunSummary {
    std::vector<StageReport> stages;
    std::filesystem::path out_dir;
};

// Runs one named stage unconditionally (its inputs must exist) and records
// it in the manifest.
StageReport run_stage(const RunConfig& config, const std::string& stage);

// Runs every stage in order, skipping stages whose recorded inputs and
// outputs are unchanged; `force` recomputes everything regardless. A fatal
// error leaves a FAILED marker file in the output directory.
RunSummary run_all(const RunConfig& config, bool force = false);

// Assembles plot-ready views from existing stage outputs into plotdata/:
// marginal effects with confidence bars, impact trajectories joined with
// their bootstrap bands, and the horizon-year snapshot per province. The
// band columns stay empty until the bootstrap stage has run. Returns the
// files written.
std::vector<std::filesystem::path> write_plotdata(const RunConfig& config);

}  // namespace panelclim
