#include "panelclim/project.hpp"

#include "panelclim/panel.hpp"
#include "panelclim/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace panelclim {

namespace {

constexpr double kBaseAnchorYear = 2014.0;
constexpr double kNearEndYear = 2040.0;
constexpr double kMidEndYear = 2060.0;
constexpr double kNearMidpointYear = 2030.5;
constexpr double kMidMidpointYear = 2050.5;

}  // namespace

std::string_view anchor_rule_name(AnchorRule r)
{
    switch (r) {
    case AnchorRule::window_end: return "window_end";
    case AnchorRule::window_midpoint: return "window_midpoint";
    }
    throw std::logic_error("unreachable anchor rule");
}

AnchorRule parse_anchor_rule(std::string_view name)
{
    if (name == "window_end") return AnchorRule::window_end;
    if (name == "window_midpoint") return AnchorRule::window_midpoint;
    throw ConfigError("unknown anchor rule '" + std::string(name) +
                      "' (expected window_end or window_midpoint)");
}

double AnchoredPath::value(double year) const
{
    if (anchors.empty()) throw ConfigError("path has no anchors");
    if (year <= anchors.front().first) return anchors.front().second;
    if (year >= anchors.back().first) return anchors.back().second;
    return value_right(year);
}

double AnchoredPath::value_left(double year) const
{
    if (anchors.empty()) throw ConfigError("path has no anchors");
    if (year <= anchors.front().first) return anchors.front().second;
    std::size_t i = 0;
    while (i + 1 < anchors.size() && anchors[i + 1].first < year) ++i;
    if (i + 1 >= anchors.size()) return anchors.back().second;
    const auto& [a0, l0] = anchors[i];
    const auto& [a1, l1] = anchors[i + 1];
    return l0 + (year - a0) * (l1 - l0) / (a1 - a0);
}

double AnchoredPath::value_right(double year) const
{
    if (anchors.empty()) throw ConfigError("path has no anchors");
    if (year >= anchors.back().first) return anchors.back().second;
    std::size_t i = 0;
    while (i + 1 < anchors.size() && anchors[i + 1].first <= year) ++i;
    const auto& [a0, l0] = anchors[i];
    const auto& [a1, l1] = anchors[i + 1];
    return l0 + (year - a0) * (l1 - l0) / (a1 - a0);
}

AnchoredPath climate_level_path(double base_level, double delta_near, double delta_mid,
                                bool multiplicative_percent, AnchorRule rule)
{
    if (multiplicative_percent && !(base_level > 0.0)) {
        throw DataError("percentage scenario change needs a positive base level");
    }
    const double near_year = rule == AnchorRule::window_end ? kNearEndYear : kNearMidpointYear;
    const double mid_year = rule == AnchorRule::window_end ? kMidEndYear : kMidMidpointYear;
    const double near_level = multiplicative_percent
                                  ? base_level * (1.0 + delta_near / 100.0)
                                  : base_level + delta_near;
    const double mid_level = multiplicative_percent ? base_level * (1.0 + delta_mid / 100.0)
                                                    : base_level + delta_mid;
    AnchoredPath path;
    path.anchors = {{kBaseAnchorYear, base_level}, {near_year, near_level}, {mid_year, mid_level}};
    return path;
}

ScenarioPaths extrapolate_climate(const std::vector<RcpDeltaRow>& deltas,
                                  const std::map<BaselineKey, SeasonalBaseline>& baselines,
                                  Scenario scenario, YearRange span, AnchorRule rule)
{
    if (span.first > span.last) throw ConfigError("projection span is empty");
    if (baselines.empty()) throw DataError("no baseline climate means available");

    std::map<std::pair<BaselineKey, Horizon>, const RcpDeltaRow*> by_key;
    for (const auto& d : deltas) {
        if (d.scenario != scenario) continue;
        by_key[{{d.province, d.season}, d.horizon}] = &d;
    }

    ScenarioPaths out;
    out.scenario = scenario;
    out.rule = rule;
    out.span = span;

    std::vector<std::string> missing;
    for (const auto& [key, base] : baselines) {
        const auto near_it = by_key.find({key, Horizon::near_term});
        const auto mid_it = by_key.find({key, Horizon::mid_term});
        if (near_it == by_key.end() || mid_it == by_key.end()) {
            missing.push_back(key.first + "/" + std::string(season_name(key.second)));
            continue;
        }
        const AnchoredPath temp = climate_level_path(
            base.temp_mean, near_it->second->temp_delta, mid_it->second->temp_delta, false, rule);
        const AnchoredPath prec = climate_level_path(base.precip_mean,
                                                     near_it->second->precip_delta,
                                                     mid_it->second->precip_delta, true, rule);
        for (int year = span.first; year <= span.last; ++year) {
            ScenarioPathRow row;
            row.province = key.first;
            row.season = key.second;
            row.year = year;
            row.temp_anomaly = temp.value(year) - base.temp_mean;
            row.precip_anomaly =
                (prec.value(year) - base.precip_mean) / base.precip_mean * 100.0;
            out.rows.push_back(std::move(row));
        }
    }
    if (!missing.empty()) {
        throw DataError("scenario " + std::string(scenario_name(scenario)) +
                        " lacks change rows for: " + join(missing, ", "));
    }
    return out;
}

double Trajectory::impact_at(int year) const
{
    for (const auto& pt : points) {
        if (pt.year == year) return pt.pct_impact;
    }
    throw ConfigError("trajectory has no point for year " + std::to_string(year));
}

std::map<std::string, double> historical_term_means(const std::vector<AnomalyRow>& anomalies,
                                                    const std::string& province,
                                                    YearRange baseline)
{
    std::array<std::vector<std::pair<double, double>>, 4> by_season;  // (temp, precip fraction)
    for (const auto& a : anomalies) {
        if (a.province != province || !baseline.contains(a.year)) continue;
        by_season[static_cast<std::size_t>(a.season)].emplace_back(a.temp_anomaly,
                                                                   a.precip_anomaly / 100.0);
    }
    std::map<std::string, double> means;
    for (Season s : kSeasons) {
        const auto& values = by_season[static_cast<std::size_t>(s)];
        if (values.empty()) {
            throw DataError("no historical anomalies for " + province + " " +
                            std::string(season_name(s)) + " in the baseline period");
        }
        double mt = 0.0, mp = 0.0, mt2 = 0.0, mp2 = 0.0, mtp = 0.0;
        for (const auto& [t, p] : values) {
            mt += t;
            mp += p;
            mt2 += t * t;
            mp2 += p * p;
            mtp += t * p;
        }
        const double n = static_cast<double>(values.size());
        const std::string tok(season_token(s));
        means["temp_" + tok] = mt / n;
        means["precip_" + tok] = mp / n;
        means["temp_" + tok + "_sq"] = mt2 / n;
        means["precip_" + tok + "_sq"] = mp2 / n;
        means["txp_" + tok] = mtp / n;
    }
    return means;
}

Trajectory project_impact(const FitResult& fit, const ScenarioPaths& paths,
                          const std::vector<AnomalyRow>& historical, YearRange baseline,
                          const std::string& province, int horizon_year)
{
    if (horizon_year > paths.span.last || horizon_year < paths.span.first) {
        throw ConfigError("projection horizon " + std::to_string(horizon_year) +
                          " lies outside the scenario span");
    }
    for (const auto& term : climate_term_names()) {
        if (!fit.has_coefficient(term)) {
            throw ConfigError("model '" + fit.model_name + "' lacks climate term '" + term +
                              "'; cannot project");
        }
    }

    // Predicted per-season anomalies by year, design units.
    std::map<int, std::array<std::pair<double, double>, 4>> predicted;  // (temp, precip fraction)
    std::map<int, std::array<bool, 4>> seen;
    for (const auto& row : paths.rows) {
        if (row.province != province) continue;
        auto& slot = predicted[row.year][static_cast<std::size_t>(row.season)];
        slot.first = row.temp_anomaly;
        slot.second = row.precip_anomaly / 100.0;
        seen[row.year][static_cast<std::size_t>(row.season)] = true;
    }
    if (predicted.empty()) {
        throw DataError("scenario paths carry no rows for province " + province);
    }

    const auto hist = historical_term_means(historical, province, baseline);

    Trajectory traj;
    traj.scenario = paths.scenario;
    traj.province = province;
    traj.model = fit.model_name;
    traj.points.push_back({paths.span.first - 1, 0.0, 0.0});

    double cumulative = 0.0;
    for (int year = paths.span.first; year <= horizon_year; ++year) {
        const auto p_it = predicted.find(year);
        const auto s_it = seen.find(year);
        if (p_it == predicted.end() ||
            !std::all_of(s_it->second.begin(), s_it->second.end(), [](bool b) { return b; })) {
            throw DataError("scenario paths are missing " + province + " seasons for year " +
                            std::to_string(year));
        }
        double shift = 0.0;
        for (Season s : kSeasons) {
            const auto idx = static_cast<std::size_t>(s);
            const std::string tok(season_token(s));
            const double t = p_it->second[idx].first;
            const double p = p_it->second[idx].second;
            shift += fit.coefficient("temp_" + tok) * (t - hist.at("temp_" + tok));
            shift += fit.coefficient("precip_" + tok) * (p - hist.at("precip_" + tok));
            if (fit.has_coefficient("temp_" + tok + "_sq")) {
                shift += fit.coefficient("temp_" + tok + "_sq") *
                         (t * t - hist.at("temp_" + tok + "_sq"));
            }
            if (fit.has_coefficient("precip_" + tok + "_sq")) {
                shift += fit.coefficient("precip_" + tok + "_sq") *
                         (p * p - hist.at("precip_" + tok + "_sq"));
            }
            if (fit.has_coefficient("txp_" + tok)) {
                shift += fit.coefficient("txp_" + tok) * (t * p - hist.at("txp_" + tok));
            }
        }
        cumulative += shift;
        traj.points.push_back({year, shift, (std::exp(cumulative) - 1.0) * 100.0});
    }
    return traj;
}

CsvTable scenario_paths_csv(const ScenarioPaths& paths)
{
    CsvTable csv({"scenario", "anchor_rule", "province", "season", "year", "temp_anomaly",
                  "precip_anomaly"});
    for (const auto& row : paths.rows) {
        csv.add_row({std::string(scenario_name(paths.scenario)),
                     std::string(anchor_rule_name(paths.rule)), row.province,
                     std::string(season_name(row.season)), std::to_string(row.year),
                     format_double(row.temp_anomaly), format_double(row.precip_anomaly)});
    }
    return csv;
}

CsvTable trajectories_csv(const std::vector<Trajectory>& trajectories)
{
    CsvTable csv({"scenario", "province", "sector", "model", "year", "annual_shift",
                  "pct_impact"});
    for (const auto& t : trajectories) {
        for (const auto& pt : t.points) {
            csv.add_row({std::string(scenario_name(t.scenario)), t.province, t.sector, t.model,
                         std::to_string(pt.year), format_double(pt.annual_shift),
                         format_double(pt.pct_impact)});
        }
    }
    return csv;
}

}  // namespace panelclim
