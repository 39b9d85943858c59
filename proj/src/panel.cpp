#include "panelclim/panel.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace panelclim {

std::string_view year_effect_name(YearEffect e)
{
    switch (e) {
        case YearEffect::fixed: return "fixed";
        case YearEffect::none: return "none";
        case YearEffect::random: return "random";
    }
    throw std::logic_error("unreachable year effect");
}

YearEffect parse_year_effect(std::string_view name)
{
    if (name == "fixed") return YearEffect::fixed;
    if (name == "none") return YearEffect::none;
    if (name == "random") return YearEffect::random;
    throw ConfigError("unknown year effect '" + std::string(name) +
                      "' (expected fixed, none, or random)");
}

void ModelSpec::validate() const
{
    if (include_indices && year_effect == YearEffect::fixed) {
        throw ConfigError("specification '" + name +
                          "': annually-constant indices are collinear with fixed year "
                          "effects; use year_effect none or random");
    }
}

ModelSpec ModelSpec::preset(const std::string& preset_name)
{
    ModelSpec s;
    s.name = preset_name;
    if (preset_name == "m1") {
        s.year_effect = YearEffect::fixed;
    } else if (preset_name == "m2") {
        s.year_effect = YearEffect::fixed;
        s.quadratics = true;
    } else if (preset_name == "m3") {
        s.year_effect = YearEffect::none;
        s.include_indices = true;
    } else if (preset_name == "m4") {
        s.year_effect = YearEffect::none;
        s.include_indices = true;
        s.events = EventTreatment::random;
    } else if (preset_name == "m5") {
        s.year_effect = YearEffect::random;
        s.include_indices = true;
    } else if (preset_name == "m6") {
        s.year_effect = YearEffect::random;
        s.include_indices = true;
        s.events = EventTreatment::random;
    } else if (preset_name == "m1s") {
        s.year_effect = YearEffect::fixed;
        s.events = EventTreatment::random;
    } else if (preset_name == "m2s") {
        s.year_effect = YearEffect::fixed;
        s.interactions_txp = true;
    } else if (preset_name == "m3s") {
        s.year_effect = YearEffect::fixed;
        s.province_trends = true;
    } else if (preset_name == "m4s") {
        s.year_effect = YearEffect::fixed;
        s.province_random_slopes = true;
    } else if (preset_name == "m5s") {
        s.year_effect = YearEffect::random;
        s.include_indices = true;
        s.interactions_txp = true;
    } else if (preset_name == "m6s") {
        s.year_effect = YearEffect::random;
        s.include_indices = true;
        s.province_trends = true;
    } else {
        throw ConfigError("unknown model preset '" + preset_name + "'");
    }
    s.validate();
    return s;
}

const std::vector<std::string>& ModelSpec::preset_names()
{
    static const std::vector<std::string> names = {"m1",  "m2",  "m3",  "m4",  "m5",  "m6",
                                                   "m1s", "m2s", "m3s", "m4s", "m5s", "m6s"};
    return names;
}

nlohmann::json ModelSpec::to_json() const
{
    return nlohmann::json{{"name", name},
                          {"year_effect", std::string(year_effect_name(year_effect))},
                          {"quadratics", quadratics},
                          {"interactions_txp", interactions_txp},
                          {"province_trends", province_trends},
                          {"province_random_slopes", province_random_slopes},
                          {"include_indices", include_indices},
                          {"events_random", events == EventTreatment::random}};
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j)
{
    ModelSpec s;
    s.name = j.value("name", std::string("custom"));
    s.year_effect = parse_year_effect(j.value("year_effect", std::string("fixed")));
    s.quadratics = j.value("quadratics", false);
    s.interactions_txp = j.value("interactions_txp", false);
    s.province_trends = j.value("province_trends", false);
    s.province_random_slopes = j.value("province_random_slopes", false);
    s.include_indices = j.value("include_indices", false);
    s.events = j.value("events_random", false) ? EventTreatment::random : EventTreatment::none;
    s.validate();
    return s;
}

std::vector<std::string> Panel::provinces() const
{
    std::set<std::string> seen;
    for (const auto& r : rows) seen.insert(r.province);
    return std::vector<std::string>(seen.begin(), seen.end());
}

Panel assemble(const std::vector<AnomalyRow>& anomalies, const std::vector<GrowthRow>& growth,
               const std::vector<IndexGrowthRow>& index_growth,
               const std::vector<EventRecord>& events, const std::string& sector,
               YearRange panel_years)
{
    Panel panel;
    panel.sector = sector;

    // Climate lookup: (province, year) -> per-season values.
    struct Cell {
        std::array<bool, 4> has_temp{};
        std::array<bool, 4> has_prec{};
        std::array<double, 4> temp{};
        std::array<double, 4> prec{};
    };
    std::map<std::pair<std::string, int>, Cell> climate;
    for (const auto& a : anomalies) {
        auto& cell = climate[{a.province, a.year}];
        const auto s = static_cast<std::size_t>(a.season);
        cell.has_temp[s] = true;
        cell.temp[s] = a.temp_anomaly;
        cell.has_prec[s] = true;
        cell.prec[s] = a.precip_anomaly / 100.0;
    }

    std::map<std::pair<std::string, int>, double> growth_by_key;
    for (const auto& g : growth) {
        if (g.sector != sector) continue;
        growth_by_key[{g.province, g.year}] = g.pcgr;
    }
    if (growth_by_key.empty()) {
        throw DataError("no growth rows for sector '" + sector + "'");
    }

    // National index series keyed by year; unemployment keyed by province too.
    std::set<std::string> index_names_seen;
    std::map<std::pair<std::string, int>, double> national_idx;  // (name, year)
    std::map<std::tuple<std::string, std::string, int>, double> provincial_idx;
    for (const auto& r : index_growth) {
        index_names_seen.insert(r.name);
        if (r.province.has_value()) {
            provincial_idx[{r.name, *r.province, r.year}] = r.value;
        } else {
            national_idx[{r.name, r.year}] = r.value;
        }
    }
    for (const auto& name : kIndexNames) {
        if (index_names_seen.count(std::string(name))) {
            panel.index_names.push_back(std::string(name));
        }
    }

    std::set<std::string> provinces;
    for (const auto& [key, value] : growth_by_key) provinces.insert(key.first);

    std::vector<int> years;
    for (int y = panel_years.first; y <= panel_years.last; ++y) years.push_back(y);

    EventMatrix ev = event_matrix(
        events, std::vector<std::string>(provinces.begin(), provinces.end()), panel_years);
    panel.event_ids = ev.event_ids;
    panel.event_labels = ev.labels;

    for (const auto& province : provinces) {
        for (int year : years) {
            PanelRow row;
            row.province = province;
            row.cluster = province;
            row.year = year;

            auto g_it = growth_by_key.find({province, year});
            auto lag_it = growth_by_key.find({province, year - 1});
            auto c_it = climate.find({province, year});
            bool complete = g_it != growth_by_key.end() && lag_it != growth_by_key.end() &&
                            c_it != climate.end();
            if (complete) {
                for (std::size_t s = 0; s < 4 && complete; ++s) {
                    complete = c_it->second.has_temp[s] && c_it->second.has_prec[s];
                }
            }
            if (complete) {
                row.pcgr = g_it->second;
                row.pcgr_lag = lag_it->second;
                row.temp_anomaly = c_it->second.temp;
                row.precip_frac = c_it->second.prec;
            }
            for (const auto& name : panel.index_names) {
                if (!complete) break;
                double value = 0.0;
                if (name == "unemployment") {
                    auto it = provincial_idx.find({name, province, year});
                    if (it == provincial_idx.end()) {
                        complete = false;
                        break;
                    }
                    value = it->second;
                } else {
                    auto it = national_idx.find({name, year});
                    if (it == national_idx.end()) {
                        complete = false;
                        break;
                    }
                    value = it->second;
                }
                row.index_values.push_back(value);
            }
            if (!complete) {
                ++panel.dropped_rows;
                continue;
            }
            const auto r_idx = ev.row_index(province, year);
            row.event_indicators.resize(ev.event_ids.size());
            for (std::size_t e = 0; e < ev.event_ids.size(); ++e) {
                row.event_indicators[e] = ev.indicators(static_cast<Eigen::Index>(r_idx),
                                                        static_cast<Eigen::Index>(e));
            }
            panel.rows.push_back(std::move(row));
        }
    }
    if (panel.rows.empty()) {
        throw DataError("panel assembly produced no complete rows for sector '" + sector + "'");
    }
    std::sort(panel.rows.begin(), panel.rows.end(), [](const PanelRow& a, const PanelRow& b) {
        return std::tie(a.province, a.year) < std::tie(b.province, b.year);
    });
    if (panel.dropped_rows > 0) {
        panel.warnings.push_back("dropped " + std::to_string(panel.dropped_rows) +
                                 " province-year rows with incomplete regressors");
    }
    return panel;
}

const std::array<std::string, 8>& climate_term_names()
{
    static const std::array<std::string, 8> names = {
        "temp_spring", "temp_summer", "temp_fall", "temp_winter",
        "precip_spring", "precip_summer", "precip_fall", "precip_winter"};
    return names;
}

std::string climate_display_name(const std::string& term)
{
    static const std::map<std::string, std::string> table = {
        {"temp_spring", "Spring Temp."},       {"temp_summer", "Summer Temp."},
        {"temp_fall", "Fall Temp."},           {"temp_winter", "Winter Temp."},
        {"precip_spring", "Spring Precip."},   {"precip_summer", "Summer Precip."},
        {"precip_fall", "Fall Precip."},       {"precip_winter", "Winter Precip."},
        {"temp_spring_sq", "Spring Temp.^2"},  {"temp_summer_sq", "Summer Temp.^2"},
        {"temp_fall_sq", "Fall Temp.^2"},      {"temp_winter_sq", "Winter Temp.^2"},
        {"precip_spring_sq", "Spring Precip.^2"}, {"precip_summer_sq", "Summer Precip.^2"},
        {"precip_fall_sq", "Fall Precip.^2"},  {"precip_winter_sq", "Winter Precip.^2"},
        {"txp_spring", "Spring Temp. x Precip."}, {"txp_summer", "Summer Temp. x Precip."},
        {"txp_fall", "Fall Temp. x Precip."},  {"txp_winter", "Winter Temp. x Precip."},
    };
    auto it = table.find(term);
    return it == table.end() ? term : it->second;
}

int CompiledDesign::column(const std::string& name) const
{
    auto it = std::find(x_names.begin(), x_names.end(), name);
    if (it == x_names.end()) return -1;
    return static_cast<int>(it - x_names.begin());
}

namespace {

// Climate regressor value for one row, in design units (precip as fraction).
double climate_value(const PanelRow& row, std::size_t term)
{
    return term < 4 ? row.temp_anomaly[term] : row.precip_frac[term - 4];
}

}  // namespace

CompiledDesign compile(const Panel& panel, const ModelSpec& spec)
{
    spec.validate();
    if (panel.rows.empty()) throw DataError("cannot compile an empty panel");
    if (spec.include_indices && panel.index_names.empty()) {
        throw DataError("specification '" + spec.name +
                        "' includes macro indices but the panel carries none");
    }
    if (spec.events == EventTreatment::random && panel.event_ids.empty()) {
        throw DataError("specification '" + spec.name +
                        "' includes event effects but the panel carries no events");
    }

    // Row order must not depend on caller ordering.
    std::vector<const PanelRow*> rows;
    rows.reserve(panel.rows.size());
    for (const auto& r : panel.rows) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const PanelRow* a, const PanelRow* b) {
        return std::tie(a->cluster, a->year) < std::tie(b->cluster, b->year);
    });

    const int n = static_cast<int>(rows.size());

    CompiledDesign d;
    d.spec_name = spec.name;
    std::map<std::string, int> cluster_id;
    for (const auto* r : rows) cluster_id.emplace(r->cluster, 0);
    {
        int next = 0;
        for (auto& [label, id] : cluster_id) {
            id = next++;
            d.cluster_levels.push_back(label);
        }
    }
    d.cluster_of_row.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.cluster_of_row[i] = cluster_id.at(rows[i]->cluster);
    }

    std::set<int> year_set;
    for (const auto* r : rows) year_set.insert(r->year);
    const std::vector<int> years(year_set.begin(), year_set.end());
    d.trend_origin_year = years.front();

    // Fixed-effect column layout.
    std::vector<std::string> names;
    names.push_back("(Intercept)");
    for (std::size_t c = 1; c < d.cluster_levels.size(); ++c) {
        names.push_back("province:" + d.cluster_levels[c]);
    }
    if (spec.year_effect == YearEffect::fixed) {
        for (std::size_t t = 1; t < years.size(); ++t) {
            names.push_back("year:" + std::to_string(years[t]));
        }
    }
    names.push_back("pcgr_lag");
    for (const auto& term : climate_term_names()) names.push_back(term);
    if (spec.quadratics) {
        for (const auto& term : climate_term_names()) names.push_back(term + "_sq");
    }
    if (spec.interactions_txp) {
        for (Season s : kSeasons) names.push_back("txp_" + std::string(season_token(s)));
    }
    if (spec.include_indices) {
        for (const auto& idx : panel.index_names) names.push_back("idx:" + idx);
    }
    // With fixed year effects the sum of all province trends equals a global
    // trend already spanned by the year dummies, so one trend is dropped.
    const std::size_t trend_start = spec.year_effect == YearEffect::fixed ? 1 : 0;
    if (spec.province_trends) {
        for (std::size_t c = trend_start; c < d.cluster_levels.size(); ++c) {
            names.push_back("trend:" + d.cluster_levels[c]);
        }
    }

    const int p = static_cast<int>(names.size());
    d.x_names = names;
    d.y.resize(n);
    d.X = Eigen::MatrixXd::Zero(n, p);

    std::map<int, int> year_pos;
    for (std::size_t t = 0; t < years.size(); ++t) year_pos[years[t]] = static_cast<int>(t);

    for (int i = 0; i < n; ++i) {
        const PanelRow& row = *rows[static_cast<std::size_t>(i)];
        int col = 0;
        d.y(i) = row.pcgr;
        d.X(i, col++) = 1.0;
        const int cid = d.cluster_of_row[static_cast<std::size_t>(i)];
        for (std::size_t c = 1; c < d.cluster_levels.size(); ++c, ++col) {
            if (cid == static_cast<int>(c)) d.X(i, col) = 1.0;
        }
        if (spec.year_effect == YearEffect::fixed) {
            const int t = year_pos.at(row.year);
            for (std::size_t k = 1; k < years.size(); ++k, ++col) {
                if (t == static_cast<int>(k)) d.X(i, col) = 1.0;
            }
        }
        d.X(i, col++) = row.pcgr_lag;
        for (std::size_t term = 0; term < 8; ++term) {
            d.X(i, col++) = climate_value(row, term);
        }
        if (spec.quadratics) {
            for (std::size_t term = 0; term < 8; ++term) {
                const double v = climate_value(row, term);
                d.X(i, col++) = v * v;
            }
        }
        if (spec.interactions_txp) {
            for (std::size_t s = 0; s < 4; ++s) {
                d.X(i, col++) = row.temp_anomaly[s] * row.precip_frac[s];
            }
        }
        if (spec.include_indices) {
            for (std::size_t k = 0; k < panel.index_names.size(); ++k) {
                d.X(i, col++) = row.index_values[k];
            }
        }
        if (spec.province_trends) {
            for (std::size_t c = trend_start; c < d.cluster_levels.size(); ++c, ++col) {
                if (cid == static_cast<int>(c)) d.X(i, col) = row.year - d.trend_origin_year;
            }
        }
        if (col != p) throw std::logic_error("design column bookkeeping mismatch");
    }

    // Random-effect blocks, in a fixed order: year, events, province slopes.
    if (spec.year_effect == YearEffect::random) {
        RandomBlock b;
        b.label = "year";
        b.Z = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(years.size()));
        for (int t : years) b.col_names.push_back("year:" + std::to_string(t));
        for (int i = 0; i < n; ++i) {
            b.Z(i, year_pos.at(rows[static_cast<std::size_t>(i)]->year)) = 1.0;
        }
        d.blocks.push_back(std::move(b));
    }
    if (spec.events == EventTreatment::random) {
        RandomBlock b;
        b.label = "event";
        b.Z = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(panel.event_ids.size()));
        for (std::size_t e = 0; e < panel.event_ids.size(); ++e) {
            b.col_names.push_back("event:" + std::to_string(panel.event_ids[e]));
        }
        for (int i = 0; i < n; ++i) {
            const auto& ind = rows[static_cast<std::size_t>(i)]->event_indicators;
            for (std::size_t e = 0; e < ind.size(); ++e) {
                b.Z(i, static_cast<Eigen::Index>(e)) = ind[e];
            }
        }
        d.blocks.push_back(std::move(b));
    }
    if (spec.province_random_slopes) {
        for (std::size_t term = 0; term < 8; ++term) {
            RandomBlock b;
            b.label = "slope:" + climate_term_names()[term];
            b.Z = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(d.cluster_levels.size()));
            for (const auto& level : d.cluster_levels) {
                b.col_names.push_back(b.label + ":" + level);
            }
            for (int i = 0; i < n; ++i) {
                const auto& row = *rows[static_cast<std::size_t>(i)];
                b.Z(i, d.cluster_of_row[static_cast<std::size_t>(i)]) = climate_value(row, term);
            }
            d.blocks.push_back(std::move(b));
        }
    }

    // Rank guard on the fixed design: name the columns implicated in any
    // deficiency so a misconfigured spec fails loudly rather than silently.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    if (rank < p) {
        const auto perm = qr.colsPermutation().indices();
        std::ostringstream msg;
        msg << "design matrix for specification '" << spec.name << "' is rank deficient (rank "
            << rank << " of " << p << "); suspect columns:";
        for (Eigen::Index k = rank; k < perm.size(); ++k) {
            msg << ' ' << d.x_names[static_cast<std::size_t>(perm(k))];
        }
        throw NumericError(msg.str());
    }
    return d;
}

}  // namespace panelclim
