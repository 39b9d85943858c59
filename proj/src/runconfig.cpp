#include "panelclim/runconfig.hpp"

#include "panelclim/panel.hpp"
#include "panelclim/util.hpp"

#include <algorithm>
#include <set>

namespace panelclim {

namespace {

CoverageThreshold parse_coverage(const std::string& text)
{
    const auto parts = split(text, '/');
    int num = 0;
    int den = 0;
    if (parts.size() != 2 || !parse_int(parts[0], num) || !parse_int(parts[1], den) || num < 0 ||
        den <= 0 || num > den) {
        throw ConfigError("coverage threshold must look like '9/10', got '" + text + "'");
    }
    return {num, den};
}

YearRange range_field(const nlohmann::json& j, const std::string& key, YearRange fallback)
{
    if (!j.contains(key)) return fallback;
    return parse_year_range(j.at(key).get<std::string>());
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& ex) {
        throw ConfigError("cannot parse run configuration " + path.string() + ": " + ex.what());
    }
    return from_json(j, std::filesystem::absolute(path).parent_path());
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir)
{
    static const std::set<std::string> known = {
        "stations", "econ",          "indices",         "events",   "rcp",
        "schema",   "out_dir",       "baseline",        "panel_years", "weighting",
        "winter_rule", "coverage",   "sector",          "models",   "inference_model",
        "scenario", "anchor_rule",   "horizon",         "bootstrap"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw ConfigError("unknown run configuration key '" + key + "'");
        }
    }

    RunConfig c;
    c.base_dir = base_dir;
    const auto need_path = [&](const char* key) -> std::filesystem::path {
        if (!j.contains(key)) throw ConfigError(std::string("run configuration misses '") + key + "'");
        return j.at(key).get<std::string>();
    };
    c.stations = need_path("stations");
    c.econ = need_path("econ");
    c.indices = need_path("indices");
    c.events = need_path("events");
    c.rcp = need_path("rcp");
    if (j.contains("schema")) c.schema = std::filesystem::path(j.at("schema").get<std::string>());
    if (j.contains("out_dir")) c.out_dir = std::filesystem::path(j.at("out_dir").get<std::string>());

    c.baseline = range_field(j, "baseline", kDefaultBaseline);
    c.panel_years = range_field(j, "panel_years", c.baseline);
    if (j.contains("weighting")) c.weighting = parse_weighting(j.at("weighting").get<std::string>());
    if (j.contains("winter_rule")) {
        c.winter_rule = parse_winter_rule(j.at("winter_rule").get<std::string>());
    }
    if (j.contains("coverage")) c.coverage = parse_coverage(j.at("coverage").get<std::string>());

    if (j.contains("sector")) c.sector = j.at("sector").get<std::string>();
    if (c.sector != kTotalSector && !is_known_sector(c.sector)) {
        throw ConfigError("unknown sector '" + c.sector + "'");
    }

    if (j.contains("models")) {
        c.models = j.at("models").get<std::vector<std::string>>();
    } else {
        c.models = ModelSpec::preset_names();
    }
    if (c.models.empty()) throw ConfigError("model roster must not be empty");
    for (const auto& name : c.models) ModelSpec::preset(name);  // validates

    if (j.contains("inference_model")) {
        c.inference_model = j.at("inference_model").get<std::string>();
    }
    ModelSpec::preset(c.inference_model);
    if (std::find(c.models.begin(), c.models.end(), c.inference_model) == c.models.end()) {
        throw ConfigError("inference model '" + c.inference_model +
                          "' is not in the model roster");
    }

    if (j.contains("scenario")) c.scenario = parse_scenario(j.at("scenario").get<std::string>());
    if (j.contains("anchor_rule")) {
        c.anchor_rule = parse_anchor_rule(j.at("anchor_rule").get<std::string>());
    }
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<int>();
    if (c.horizon <= c.panel_years.last) {
        throw ConfigError("projection horizon must lie beyond the panel years");
    }

    if (j.contains("bootstrap")) {
        const auto& b = j.at("bootstrap");
        static const std::set<std::string> known_boot = {"replicates", "seed", "threads",
                                                         "write_coefficients"};
        for (const auto& [key, value] : b.items()) {
            if (!known_boot.count(key)) {
                throw ConfigError("unknown bootstrap configuration key '" + key + "'");
            }
        }
        c.bootstrap.replicates = b.value("replicates", 1000);
        c.bootstrap.seed = b.value("seed", std::uint64_t{1729});
        c.bootstrap.threads = b.value("threads", 1);
        c.bootstrap.write_coefficients = b.value("write_coefficients", false);
        if (c.bootstrap.replicates < 1) throw ConfigError("bootstrap replicates must be >= 1");
        if (c.bootstrap.threads < 1) throw ConfigError("bootstrap threads must be >= 1");
    }

    if (c.baseline.first > c.baseline.last) throw ConfigError("baseline range is empty");
    if (c.panel_years.first > c.panel_years.last) throw ConfigError("panel year range is empty");
    return c;
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const
{
    return p.is_absolute() ? p : base_dir / p;
}

SchemaMap RunConfig::load_schema() const
{
    if (!schema.has_value()) return SchemaMap{};
    return SchemaMap::from_json_file(resolve(*schema));
}

}  // namespace panelclim
