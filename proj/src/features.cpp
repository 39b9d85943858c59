#include "panelclim/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace panelclim {

std::string_view weighting_name(Weighting w)
{
    return w == Weighting::unweighted ? "unweighted" : "population";
}

Weighting parse_weighting(std::string_view name)
{
    if (name == "unweighted") return Weighting::unweighted;
    if (name == "population") return Weighting::population;
    throw ConfigError("unknown weighting mode: " + std::string(name));
}

SeasonalizeResult seasonalize(const std::vector<StationRecord>& records,
                              const std::vector<StationMeta>& retained_meta, Weighting weighting,
                              WinterRule winter_rule)
{
    std::map<std::string, double> weight;  // station -> population weight numerator
    std::set<std::string> retained_ids;
    std::map<std::string, double> province_weight_total;
    for (const auto& m : retained_meta) {
        retained_ids.insert(m.station_id);
        if (weighting == Weighting::population) {
            if (!m.subregion_population) {
                throw DataError("population weighting requires subregion_population for station " +
                                m.station_id);
            }
            weight[m.station_id] = *m.subregion_population;
            province_weight_total[m.province] += *m.subregion_population;
        } else {
            weight[m.station_id] = 1.0;
            province_weight_total[m.province] += 1.0;
        }
    }
    for (const auto& [province, total] : province_weight_total) {
        if (total <= 0.0) {
            throw DataError("province " + province + " has zero total station weight");
        }
    }

    // month slot within the season: (value sum, weight sum) accumulated over stations
    struct MonthAgg {
        double temp_wsum = 0.0, temp_w = 0.0;
        double prec_wsum = 0.0, prec_w = 0.0;
    };
    struct CellKey {
        std::string province;
        Season season;
        int year;
        bool operator<(const CellKey& o) const
        {
            return std::tie(province, season, year) < std::tie(o.province, o.season, o.year);
        }
    };
    std::map<CellKey, std::array<MonthAgg, 3>> cells;

    auto slot_of = [](Season s, int month) -> int {
        switch (s) {
        case Season::Spring: return month - 3;
        case Season::Summer: return month - 6;
        case Season::Fall: return month - 9;
        case Season::Winter: return month == 12 ? 0 : month;  // Dec, Jan, Feb
        }
        return 0;
    };

    for (const auto& r : records) {
        if (!retained_ids.count(r.station_id)) {
            continue;
        }
        auto cell = season_of_month(r.year, r.month, winter_rule);
        auto& months = cells[{r.province, cell.season, cell.year}];
        auto& agg = months[static_cast<std::size_t>(slot_of(cell.season, r.month))];
        double w = weight[r.station_id];
        if (r.mean_temp) {
            agg.temp_wsum += w * *r.mean_temp;
            agg.temp_w += w;
        }
        if (r.total_precip) {
            agg.prec_wsum += w * *r.total_precip;
            agg.prec_w += w;
        }
    }

    SeasonalizeResult out;
    std::set<std::pair<std::string, Season>> complete_seasons;
    std::set<std::pair<std::string, Season>> seen_seasons;
    for (const auto& [key, months] : cells) {
        seen_seasons.insert({key.province, key.season});
        double temp_sum = 0.0, prec_sum = 0.0;
        bool complete = true;
        for (const auto& agg : months) {
            if (agg.temp_w <= 0.0 || agg.prec_w <= 0.0) {
                complete = false;
                break;
            }
            temp_sum += agg.temp_wsum / agg.temp_w;
            prec_sum += agg.prec_wsum / agg.prec_w;
        }
        if (!complete) {
            out.warnings.push_back("incomplete seasonal cell " + key.province + "/" +
                                   std::string(season_name(key.season)) + "/" +
                                   std::to_string(key.year));
            continue;
        }
        out.cells.push_back(
            {key.province, key.season, key.year, temp_sum / 3.0, prec_sum / 3.0});
        complete_seasons.insert({key.province, key.season});
    }

    for (const auto& ps : seen_seasons) {
        if (!complete_seasons.count(ps)) {
            throw DataError("no complete " + std::string(season_name(ps.second)) +
                            " cell for province " + ps.first);
        }
    }
    return out;
}

std::map<BaselineKey, SeasonalBaseline> baseline_means(const std::vector<SeasonalCell>& cells,
                                                       YearRange baseline)
{
    struct Acc {
        double temp = 0.0, prec = 0.0;
        std::set<int> years;
    };
    std::map<BaselineKey, Acc> acc;
    std::set<BaselineKey> keys;
    for (const auto& c : cells) {
        keys.insert({c.province, c.season});
        if (!baseline.contains(c.year)) {
            continue;
        }
        auto& a = acc[{c.province, c.season}];
        a.temp += c.mean_temp;
        a.prec += c.mean_precip;
        a.years.insert(c.year);
    }

    std::map<BaselineKey, SeasonalBaseline> out;
    for (const auto& key : keys) {
        auto it = acc.find(key);
        auto cell_name = key.first + "/" + std::string(season_name(key.second));
        if (it == acc.end() || static_cast<int>(it->second.years.size()) != baseline.size()) {
            for (int y = baseline.first; y <= baseline.last; ++y) {
                if (it == acc.end() || !it->second.years.count(y)) {
                    throw DataError("baseline year " + std::to_string(y) + " missing for " +
                                    cell_name);
                }
            }
        }
        double n = static_cast<double>(baseline.size());
        out[key] = {it->second.temp / n, it->second.prec / n};
    }
    return out;
}

std::vector<AnomalyValue> temp_anomaly(const std::vector<SeasonalCell>& cells, YearRange baseline)
{
    auto means = baseline_means(cells, baseline);
    std::vector<AnomalyValue> out;
    out.reserve(cells.size());
    for (const auto& c : cells) {
        double mean = means.at({c.province, c.season}).temp_mean;
        out.push_back({c.province, c.season, c.year, c.mean_temp - mean});
    }
    return out;
}

std::vector<AnomalyValue> precip_anomaly(const std::vector<SeasonalCell>& cells, YearRange baseline)
{
    auto means = baseline_means(cells, baseline);
    std::vector<AnomalyValue> out;
    out.reserve(cells.size());
    for (const auto& c : cells) {
        double mean = means.at({c.province, c.season}).precip_mean;
        if (!(mean > 0.0)) {
            throw DataError("zero baseline precipitation mean for " + c.province + "/" +
                            std::string(season_name(c.season)));
        }
        out.push_back({c.province, c.season, c.year, (c.mean_precip - mean) / mean * 100.0});
    }
    return out;
}

std::vector<AnomalyRow> compute_anomalies(const std::vector<SeasonalCell>& cells,
                                          YearRange baseline, Weighting weighting)
{
    auto temps = temp_anomaly(cells, baseline);
    auto precs = precip_anomaly(cells, baseline);
    std::vector<AnomalyRow> out;
    out.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out.push_back({cells[i].province, cells[i].season, cells[i].year, temps[i].value,
                       precs[i].value, weighting});
    }
    return out;
}

std::vector<GrowthRow> pcgr(const std::vector<EconRow>& econ)
{
    std::map<std::pair<std::string, std::string>, std::map<int, double>> per_capita;
    for (const auto& r : econ) {
        double y = r.gdp_chained / r.population;
        if (!(y > 0.0)) {
            throw DataError("nonpositive per-capita GDP for " + r.province + "/" + r.sector +
                            "/" + std::to_string(r.year));
        }
        per_capita[{r.province, r.sector}][r.year] = y;
    }

    std::vector<GrowthRow> out;
    for (const auto& [key, series] : per_capita) {
        for (auto it = series.begin(); it != series.end(); ++it) {
            auto prev = series.find(it->first - 1);
            if (prev == series.end()) {
                continue;  // lag origin year
            }
            out.push_back({key.first, key.second, it->first, std::log(it->second / prev->second)});
        }
    }
    return out;
}

bool index_is_log_differenced(const std::string& name)
{
    return name == "world_gdp" || name == "energy_index" || name == "nonenergy_index";
}

std::vector<IndexGrowthRow> index_growth(const std::vector<IndexRow>& series)
{
    std::map<std::pair<std::string, std::string>, std::map<int, double>> grouped;
    for (const auto& r : series) {
        grouped[{r.name, r.province.value_or("")}][r.year] = r.value;
    }

    std::vector<IndexGrowthRow> out;
    for (const auto& [key, values] : grouped) {
        const auto& [name, prov] = key;
        std::optional<std::string> province =
            prov.empty() ? std::nullopt : std::optional<std::string>(prov);
        if (!index_is_log_differenced(name)) {
            for (const auto& [year, v] : values) {
                out.push_back({name, province, year, v});  // already a rate, keep the level
            }
            continue;
        }
        for (auto it = values.begin(); it != values.end(); ++it) {
            auto prev = values.find(it->first - 1);
            if (prev == values.end()) {
                continue;
            }
            if (!(it->second > 0.0) || !(prev->second > 0.0)) {
                throw DataError("nonpositive value in log-differenced index " + name + " at year " +
                                std::to_string(it->first));
            }
            out.push_back({name, province, it->first, std::log(it->second / prev->second)});
        }
    }
    return out;
}

std::size_t EventMatrix::row_index(const std::string& province, int year) const
{
    auto p = std::find(provinces.begin(), provinces.end(), province);
    if (p == provinces.end()) {
        throw DataError("event matrix: unknown province " + province);
    }
    auto y = std::find(years.begin(), years.end(), year);
    if (y == years.end()) {
        throw DataError("event matrix: year out of range " + std::to_string(year));
    }
    return static_cast<std::size_t>(p - provinces.begin()) * years.size() +
           static_cast<std::size_t>(y - years.begin());
}

EventMatrix event_matrix(const std::vector<EventRecord>& events,
                         const std::vector<std::string>& provinces, YearRange years)
{
    EventMatrix m;
    m.provinces = provinces;
    for (int y = years.first; y <= years.last; ++y) {
        m.years.push_back(y);
    }
    m.indicators = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(provinces.size() * m.years.size()),
        static_cast<Eigen::Index>(events.size()));
    for (std::size_t e = 0; e < events.size(); ++e) {
        m.event_ids.push_back(events[e].event_id);
        m.labels.push_back(events[e].label);
        if (!years.contains(events[e].year)) {
            continue;  // event outside the grid leaves an all-zero column
        }
        for (const auto& prov : events[e].provinces_affected) {
            if (std::find(provinces.begin(), provinces.end(), prov) == provinces.end()) {
                continue;
            }
            m.indicators(static_cast<Eigen::Index>(m.row_index(prov, events[e].year)),
                         static_cast<Eigen::Index>(e)) = 1.0;
        }
    }
    return m;
}

}  // namespace panelclim
