#pragma once

#include "panelclim/common.hpp"
#include "panelclim/csv.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace panelclim {

// One station-month weather observation, the raw input grain.
struct StationRecord {
    std::string station_id;
    std::string province;
    double latitude = 0.0;
    double longitude = 0.0;
    int year = 0;
    int month = 0;
    std::optional<double> mean_temp;     // degrees C
    std::optional<double> total_precip;  // mm
};

struct StationMeta {
    std::string station_id;
    std::string province;
    double latitude = 0.0;
    double longitude = 0.0;
    std::optional<std::string> subregion_id;
    std::optional<double> subregion_population;
};

struct StationLoadResult {
    std::vector<StationRecord> records;
    std::vector<StationMeta> meta;
    std::size_t input_rows = 0;
    std::size_t dropped_rows = 0;    // row errors, bad coordinates, duplicate station-months
    std::size_t duplicate_meta = 0;  // extra appearances of a station id (first wins)
    std::vector<std::string> row_errors;
};

// Parses and cleans station-month rows. Duplicate station ids collapse to the
// first occurrence; duplicate (station, year, month) rows keep the first;
// rows with missing or out-of-range coordinates are dropped and counted.
// Throws DataError when more than half of the rows are invalid.
StationLoadResult load_stations(const CsvTable& table, const SchemaMap& schema);
StationLoadResult load_stations_file(const std::filesystem::path& path, const SchemaMap& schema);

// Station coverage screen, exact rational threshold (default 9/10).
struct CoverageThreshold {
    std::int64_t num = 9;
    std::int64_t den = 10;
};

struct ProvinceCoverage {
    std::string province;
    std::int64_t max_temp_months = 0;
    std::int64_t max_precip_months = 0;
    std::size_t candidates = 0;
    std::size_t retained = 0;
};

struct CoverageResult {
    std::vector<StationMeta> retained;
    std::vector<ProvinceCoverage> by_province;
};

// Keeps stations whose complete-month counts reach the threshold fraction of
// the provincial maximum for temperature and for precipitation separately.
// A province that would end with zero stations is a fatal diagnostic.
CoverageResult coverage_filter(const std::vector<StationRecord>& records,
                               const std::vector<StationMeta>& meta, YearRange period,
                               CoverageThreshold threshold = {});

struct EconRow {
    std::string province;
    int year = 0;
    std::string sector;  // sector code or TOTAL
    double gdp_chained = 0.0;
    double population = 0.0;
};

struct IndexRow {
    std::string name;  // world_gdp, energy_index, nonenergy_index, target_rate, unemployment
    std::optional<std::string> province;  // required for unemployment only
    int year = 0;
    double value = 0.0;
};

struct EventRecord {
    int event_id = 0;  // 1..38
    std::string label;
    int year = 0;
    int month = 0;
    std::vector<std::string> provinces_affected;
};

struct RcpDeltaRow {
    Scenario scenario = Scenario::rcp45;
    std::string province;
    Season season = Season::Spring;
    Horizon horizon = Horizon::near_term;
    double temp_delta = 0.0;    // degrees C
    double precip_delta = 0.0;  // percent
};

inline constexpr std::array<std::string_view, 5> kIndexNames = {
    "world_gdp", "energy_index", "nonenergy_index", "target_rate", "unemployment"};

std::vector<EconRow> load_econ(const CsvTable& table, const SchemaMap& schema);
std::vector<IndexRow> load_indices(const CsvTable& table, const SchemaMap& schema);
std::vector<EventRecord> load_events(const CsvTable& table, const SchemaMap& schema);
std::vector<RcpDeltaRow> load_rcp(const CsvTable& table, const SchemaMap& schema);

std::vector<EconRow> load_econ_file(const std::filesystem::path& path, const SchemaMap& schema);
std::vector<IndexRow> load_indices_file(const std::filesystem::path& path, const SchemaMap& schema);
std::vector<EventRecord> load_events_file(const std::filesystem::path& path,
                                          const SchemaMap& schema);
std::vector<RcpDeltaRow> load_rcp_file(const std::filesystem::path& path, const SchemaMap& schema);

}  // namespace panelclim
