#pragma once

#include "panelclim/common.hpp"
#include "panelclim/ingest.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace panelclim {

enum class Weighting { unweighted, population };

std::string_view weighting_name(Weighting w);
Weighting parse_weighting(std::string_view name);

// Province-season-year climate cell, averaged over retained stations.
struct SeasonalCell {
    std::string province;
    Season season = Season::Spring;
    int year = 0;
    double mean_temp = 0.0;    // degrees C
    double mean_precip = 0.0;  // mm
};

struct SeasonalizeResult {
    std::vector<SeasonalCell> cells;
    std::vector<std::string> warnings;  // incomplete cells, one entry each
};

// Seasonal means over retained stations: per month the (weighted) station
// average, then the average of the three monthly values. Cells missing any
// of their three months are skipped with a warning; a province-season with
// no complete cell at all is fatal.
SeasonalizeResult seasonalize(const std::vector<StationRecord>& records,
                              const std::vector<StationMeta>& retained_meta, Weighting weighting,
                              WinterRule winter_rule = WinterRule::december_of_previous_year);

struct SeasonalBaseline {
    double temp_mean = 0.0;
    double precip_mean = 0.0;
};

using BaselineKey = std::pair<std::string, Season>;

// Baseline-period means per (province, season); fatal when a baseline year is missing.
std::map<BaselineKey, SeasonalBaseline> baseline_means(const std::vector<SeasonalCell>& cells,
                                                       YearRange baseline);

struct AnomalyValue {
    std::string province;
    Season season = Season::Spring;
    int year = 0;
    double value = 0.0;
};

// Deviation from the baseline mean, degrees C.
std::vector<AnomalyValue> temp_anomaly(const std::vector<SeasonalCell>& cells, YearRange baseline);

// Percentage deviation from the baseline mean; fatal on a zero baseline mean.
std::vector<AnomalyValue> precip_anomaly(const std::vector<SeasonalCell>& cells,
                                         YearRange baseline);

struct AnomalyRow {
    std::string province;
    Season season = Season::Spring;
    int year = 0;
    double temp_anomaly = 0.0;    // degrees C
    double precip_anomaly = 0.0;  // percent
    Weighting weighting = Weighting::unweighted;
};

std::vector<AnomalyRow> compute_anomalies(const std::vector<SeasonalCell>& cells,
                                          YearRange baseline, Weighting weighting);

struct GrowthRow {
    std::string province;
    std::string sector;
    int year = 0;
    double pcgr = 0.0;  // log difference of GDP per capita
};

// Log growth of per-capita GDP; the first year of each series becomes the lag origin.
std::vector<GrowthRow> pcgr(const std::vector<EconRow>& econ);

struct IndexGrowthRow {
    std::string name;
    std::optional<std::string> province;
    int year = 0;
    double value = 0.0;
};

// Log differences for world_gdp and the commodity indices; target_rate and
// unemployment pass through as levels.
std::vector<IndexGrowthRow> index_growth(const std::vector<IndexRow>& series);

bool index_is_log_differenced(const std::string& name);

// 0/1 indicator per event over a province-year grid, province-major row order.
struct EventMatrix {
    std::vector<int> event_ids;
    std::vector<std::string> labels;
    std::vector<std::string> provinces;
    std::vector<int> years;
    Eigen::MatrixXd indicators;  // (provinces x years) rows, one column per event

    std::size_t row_index(const std::string& province, int year) const;
};

EventMatrix event_matrix(const std::vector<EventRecord>& events,
                         const std::vector<std::string>& provinces, YearRange years);

}  // namespace panelclim
