#pragma once

#include "panelclim/common.hpp"
#include "panelclim/features.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <string>
#include <vector>

namespace panelclim {

enum class YearEffect { fixed, none, random };
enum class EventTreatment { none, random };

std::string_view year_effect_name(YearEffect e);
YearEffect parse_year_effect(std::string_view name);

// Declarative description of one regression specification. Province fixed
// effects, the intercept, and the lagged response are always present.
struct ModelSpec {
    std::string name = "custom";
    YearEffect year_effect = YearEffect::fixed;
    bool quadratics = false;
    bool interactions_txp = false;
    bool province_trends = false;
    bool province_random_slopes = false;
    bool include_indices = false;
    EventTreatment events = EventTreatment::none;

    // Collinearity guard: annually-constant indices cannot coexist with fixed
    // year effects.
    void validate() const;

    bool has_random_terms() const
    {
        return year_effect == YearEffect::random || events == EventTreatment::random ||
               province_random_slopes;
    }

    // m1..m6 and m1s..m6s
    static ModelSpec preset(const std::string& name);
    static const std::vector<std::string>& preset_names();

    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);
};

// One province-year observation, fully populated.
struct PanelRow {
    std::string province;
    std::string cluster;  // equals province outside bootstrap replicates
    int year = 0;
    double pcgr = 0.0;
    double pcgr_lag = 0.0;
    std::array<double, 4> temp_anomaly{};  // indexed by Season order, degrees C
    std::array<double, 4> precip_frac{};   // anomaly as fraction (percent / 100)
    std::vector<double> index_values;      // aligned with Panel::index_names
    std::vector<double> event_indicators;  // aligned with Panel::event_ids
};

struct Panel {
    std::string sector;
    std::vector<PanelRow> rows;
    std::vector<std::string> index_names;
    std::vector<int> event_ids;
    std::vector<std::string> event_labels;
    std::size_t dropped_rows = 0;
    std::vector<std::string> warnings;

    std::vector<std::string> provinces() const;  // distinct, sorted
};

// Joins anomalies, growth, indices, and events into the regression panel.
// Rows are sorted by (province, year); rows missing any regressor are
// dropped and counted.
Panel assemble(const std::vector<AnomalyRow>& anomalies, const std::vector<GrowthRow>& growth,
               const std::vector<IndexGrowthRow>& index_growth,
               const std::vector<EventRecord>& events, const std::string& sector,
               YearRange panel_years = kDefaultBaseline);

struct RandomBlock {
    std::string label;
    Eigen::MatrixXd Z;  // N x q
    std::vector<std::string> col_names;
};

struct CompiledDesign {
    std::string spec_name;
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> x_names;
    std::vector<RandomBlock> blocks;
    std::vector<std::string> cluster_levels;  // distinct, sorted
    std::vector<int> cluster_of_row;          // index into cluster_levels
    int trend_origin_year = 0;                // centering metadata for province trends

    int n() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(X.cols()); }
    int column(const std::string& name) const;  // -1 when absent
};

// The eight climate regressor names in design/report order.
const std::array<std::string, 8>& climate_term_names();
std::string climate_display_name(const std::string& term);

// Compiles a panel and spec into response, fixed design, random blocks, and
// cluster labels. Throws on rank deficiency, naming the collinear columns.
CompiledDesign compile(const Panel& panel, const ModelSpec& spec);

}  // namespace panelclim
