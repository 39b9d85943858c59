#pragma once

#include "panelclim/common.hpp"
#include "panelclim/features.hpp"
#include "panelclim/ingest.hpp"
#include "panelclim/project.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace panelclim {

struct BootstrapConfig {
    int replicates = 1000;
    std::uint64_t seed = 1729;
    int threads = 1;
    bool write_coefficients = false;
};

// One JSON file drives a full run: input locations, panel construction
// choices, the model roster, and projection/bootstrap settings. Relative
// paths resolve against the config file's directory.
struct RunConfig {
    std::filesystem::path base_dir;

    std::filesystem::path stations;
    std::filesystem::path econ;
    std::filesystem::path indices;
    std::filesystem::path events;
    std::filesystem::path rcp;
    std::optional<std::filesystem::path> schema;
    std::filesystem::path out_dir = "out";

    YearRange baseline = kDefaultBaseline;
    YearRange panel_years = kDefaultBaseline;
    Weighting weighting = Weighting::unweighted;
    WinterRule winter_rule = WinterRule::december_of_previous_year;
    CoverageThreshold coverage;

    std::string sector = std::string(kTotalSector);
    std::vector<std::string> models;  // defaults to the full preset roster
    std::string inference_model = "m5";

    Scenario scenario = Scenario::rcp45;
    AnchorRule anchor_rule = AnchorRule::window_end;
    int horizon = 2050;
    BootstrapConfig bootstrap;

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

    std::filesystem::path resolve(const std::filesystem::path& p) const;
    std::filesystem::path resolved_out_dir() const { return resolve(out_dir); }
    SchemaMap load_schema() const;
};

}  // namespace panelclim
