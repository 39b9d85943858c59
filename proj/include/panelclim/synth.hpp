#pragma once

#include "panelclim/panel.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace panelclim {

// Controls for drawing a regression panel with known coefficients; used by
// tests and the data-free demonstration pipeline.
struct SynthConfig {
    std::uint64_t seed = 1;
    int n_provinces = 10;  // first n codes of kProvinces
    YearRange years{1998, 2017};
    std::string sector = "TOTAL";
    ModelSpec spec = ModelSpec::preset("m1");

    double intercept = 0.02;
    double lag_coef = 0.2;
    double error_sd = 0.01;
    double province_effect_sd = 0.01;
    double year_effect_sd = 0.01;  // only used with fixed year effects

    // Coefficients by design column name (climate terms, idx:*, trend:*).
    // Unnamed terms default to zero.
    std::map<std::string, double> beta;
    // Variance ratios by random block label (year, event, slope:*).
    std::map<std::string, double> theta;

    double temp_anom_sd = 1.2;     // degrees C
    double precip_frac_sd = 0.12;  // fraction scale
    int n_events = 0;

    nlohmann::json to_json() const;
    static SynthConfig from_json(const nlohmann::json& j);
};

struct SynthTruth {
    std::map<std::string, double> beta;   // every design column, reference coding
    std::map<std::string, double> theta;  // by block label
    double error_sd = 0.0;
};

struct SynthPanel {
    Panel panel;
    SynthTruth truth;
};

// Draws regressors and builds the response by the recursive growth equation,
// so a fit of config.spec on the result estimates exactly truth.beta.
SynthPanel generate_panel(const SynthConfig& config);

// Controls for writing a full raw-input store (station months, economic
// accounts, macro series, events, scenario changes) plus a ready run
// configuration.
struct SynthStoreConfig {
    std::uint64_t seed = 1;
    YearRange years{1998, 2017};
    int n_stations = 3;         // dense stations per province
    int n_sparse_stations = 1;  // stations designed to fail the coverage screen
    double missing_rate = 0.02;
    int n_events = 4;
    bool subregion_population = true;
    std::vector<std::string> sectors = {"TOTAL"};
};

// Writes stations.csv, econ.csv, indices.csv, events.csv, rcp.csv, an
// identity schema.json, and run.json into dir.
void generate_store(const SynthStoreConfig& config, const std::filesystem::path& dir);

}  // namespace panelclim
