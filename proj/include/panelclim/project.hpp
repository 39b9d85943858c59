#pragma once

#include "panelclim/csv.hpp"
#include "panelclim/estimate.hpp"
#include "panelclim/features.hpp"
#include "panelclim/ingest.hpp"

#include <map>
#include <string>
#include <vector>

namespace panelclim {

// Where the scenario change windows are pinned on the time axis: at the
// window end years, or at the window midpoints.
enum class AnchorRule { window_end, window_midpoint };

std::string_view anchor_rule_name(AnchorRule r);
AnchorRule parse_anchor_rule(std::string_view name);

// Piecewise-linear level path through (year, level) anchors, clamped outside
// the anchored range.
struct AnchoredPath {
    std::vector<std::pair<double, double>> anchors;  // strictly ascending years

    double value(double year) const;
    // Evaluation restricted to the segment left/right of the given year;
    // exposes the join behaviour at interior anchors.
    double value_left(double year) const;
    double value_right(double year) const;
};

// Level path for one climate variable: starts at the baseline level, reaches
// the near-horizon change at the first anchor and the mid-horizon change at
// the second. Temperature changes are additive degrees; precipitation
// changes are percentages applied multiplicatively.
AnchoredPath climate_level_path(double base_level, double delta_near, double delta_mid,
                                bool multiplicative_percent, AnchorRule rule);

struct ScenarioPathRow {
    std::string province;
    Season season = Season::Spring;
    int year = 0;
    double temp_anomaly = 0.0;    // degrees C relative to the baseline mean
    double precip_anomaly = 0.0;  // percent relative to the baseline mean
};

struct ScenarioPaths {
    Scenario scenario = Scenario::rcp45;
    AnchorRule rule = AnchorRule::window_end;
    YearRange span{0, 0};
    std::vector<ScenarioPathRow> rows;
};

// Interpolates scenario anomalies for every (province, season) present in
// the baselines over the requested span of years.
ScenarioPaths extrapolate_climate(const std::vector<RcpDeltaRow>& deltas,
                                  const std::map<BaselineKey, SeasonalBaseline>& baselines,
                                  Scenario scenario, YearRange span,
                                  AnchorRule rule = AnchorRule::window_end);

struct TrajectoryPoint {
    int year = 0;
    double annual_shift = 0.0;  // climate-attributable growth shift this year
    double pct_impact = 0.0;    // cumulative output change, percent
};

struct Trajectory {
    Scenario scenario = Scenario::rcp45;
    std::string province;
    std::string sector;
    std::string model;
    std::vector<TrajectoryPoint> points;

    double impact_at(int year) const;  // throws when the year is absent
};

// Mean of every climate term over the baseline years for one province:
// linear anomalies, their squares, and within-season products, with
// precipitation on the fraction scale used by the design.
std::map<std::string, double> historical_term_means(const std::vector<AnomalyRow>& anomalies,
                                                    const std::string& province,
                                                    YearRange baseline);

// Cumulative growth-shift projection: each projected year contributes the
// fitted climate response at the scenario anomalies minus the response at
// the historical means, and the running sum exponentiates into a percentage
// level change.
Trajectory project_impact(const FitResult& fit, const ScenarioPaths& paths,
                          const std::vector<AnomalyRow>& historical, YearRange baseline,
                          const std::string& province, int horizon_year);

CsvTable trajectories_csv(const std::vector<Trajectory>& trajectories);
CsvTable scenario_paths_csv(const ScenarioPaths& paths);

}  // namespace panelclim
