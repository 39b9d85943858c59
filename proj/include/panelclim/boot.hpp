#pragma once

#include "panelclim/estimate.hpp"
#include "panelclim/panel.hpp"
#include "panelclim/project.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace panelclim {

struct BootstrapOptions {
    int replicates = 1000;
    std::uint64_t seed = 1729;
    int threads = 1;
    double max_failure_rate = 0.10;  // fraction of replicates allowed to fail
    int horizon_year = 2050;
    // A full-sample ratio optimum to warm-start replicate fits; empty falls
    // back to the standard multi-start search.
    std::vector<double> warm_theta;
};

struct BootstrapReplicate {
    int index = 0;
    std::vector<int> draw;  // sampled province slot -> original province index
    bool ok = false;
    std::string error;
    bool converged = false;
    std::vector<double> theta;
    std::vector<double> climate_beta;  // eight linear climate coefficients
    // Cumulative percent impact per (original province, year), aligned with
    // BootstrapResult::provinces and years.
    std::vector<std::vector<double>> impact;
};

struct BootstrapResult {
    std::uint64_t seed = 0;
    int requested = 0;
    int failures = 0;
    Scenario scenario = Scenario::rcp45;
    std::string model;
    std::vector<std::string> provinces;
    std::vector<int> years;
    std::vector<BootstrapReplicate> detail;
    // Pointwise bands over successful replicates: [province][year index].
    std::vector<std::vector<double>> lower;   // 2.5th percentile
    std::vector<std::vector<double>> median;  // 50th
    std::vector<std::vector<double>> upper;   // 97.5th
    std::vector<std::string> warnings;
};

// Resamples provinces with replacement, refits the model on each replicate
// treating repeated provinces as distinct clusters, reprojects every
// original province, and summarizes the impact distribution pointwise.
// Replicate outcomes depend only on (seed, replicate index), never on
// thread count or scheduling.
BootstrapResult block_bootstrap(const Panel& panel, const ModelSpec& spec,
                                const ScenarioPaths& paths,
                                const std::vector<AnomalyRow>& historical, YearRange baseline,
                                const BootstrapOptions& options);

CsvTable bootstrap_bands_csv(const BootstrapResult& result);
CsvTable bootstrap_coefficients_csv(const BootstrapResult& result);

}  // namespace panelclim
