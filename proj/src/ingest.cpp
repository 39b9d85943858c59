#include "panelclim/ingest.hpp"

#include "panelclim/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace panelclim {

namespace {

struct FieldReader {
    const CsvTable& table;
    const SchemaMap& schema;
    std::string table_name;

    std::size_t col(const std::string& field) const
    {
        return table.column(schema.column_for(table_name, field));
    }

    std::optional<std::size_t> optional_col(const std::string& field) const
    {
        auto name = schema.column_for(table_name, field);
        if (!table.has_column(name)) {
            return std::nullopt;
        }
        return table.column(name);
    }
};

[[noreturn]] void fatal_keys(const std::string& what, const std::vector<std::string>& keys)
{
    std::ostringstream msg;
    msg << what << ":";
    std::size_t shown = std::min<std::size_t>(keys.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
        msg << ' ' << keys[i];
    }
    if (keys.size() > shown) {
        msg << " (+" << keys.size() - shown << " more)";
    }
    throw DataError(msg.str());
}

void check_contiguous_years(const std::map<std::string, std::set<int>>& series,
                            const std::string& table_name)
{
    std::vector<std::string> missing;
    for (const auto& [key, years] : series) {
        if (years.empty()) {
            continue;
        }
        for (int y = *years.begin(); y <= *years.rbegin(); ++y) {
            if (!years.count(y)) {
                missing.push_back(key + "/" + std::to_string(y));
            }
        }
    }
    if (!missing.empty()) {
        fatal_keys(table_name + " has gaps in required years", missing);
    }
}

}  // namespace

StationLoadResult load_stations(const CsvTable& table, const SchemaMap& schema)
{
    FieldReader f{table, schema, "stations"};
    auto c_id = f.col("station_id");
    auto c_prov = f.col("province");
    auto c_lat = f.col("latitude");
    auto c_lon = f.col("longitude");
    auto c_year = f.col("year");
    auto c_month = f.col("month");
    auto c_temp = f.col("mean_temp");
    auto c_prec = f.col("total_precip");
    auto c_sub = f.optional_col("subregion_id");
    auto c_subpop = f.optional_col("subregion_population");

    StationLoadResult out;
    out.input_rows = table.rows();
    std::set<std::string> seen_station;
    std::set<std::tuple<std::string, int, int>> seen_month;

    for (std::size_t i = 0; i < table.rows(); ++i) {
        const auto row_label = "row " + std::to_string(i + 2);  // 1-based, after header
        const std::string& id = table.cell(i, c_id);
        const std::string& prov = table.cell(i, c_prov);
        double lat = 0.0, lon = 0.0;
        int year = 0, month = 0;

        if (id.empty()) {
            out.row_errors.push_back(row_label + ": empty station_id");
            ++out.dropped_rows;
            continue;
        }
        if (!is_known_province(prov)) {
            out.row_errors.push_back(row_label + ": unknown province code '" + prov + "'");
            ++out.dropped_rows;
            continue;
        }
        if (!parse_double(table.cell(i, c_lat), lat) || !parse_double(table.cell(i, c_lon), lon)) {
            out.row_errors.push_back(row_label + ": non-numeric coordinate");
            ++out.dropped_rows;
            continue;
        }
        if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
            out.row_errors.push_back(row_label + ": coordinate out of range");
            ++out.dropped_rows;
            continue;
        }
        if (!parse_int(table.cell(i, c_year), year) || !parse_int(table.cell(i, c_month), month) ||
            month < 1 || month > 12) {
            out.row_errors.push_back(row_label + ": bad year/month");
            ++out.dropped_rows;
            continue;
        }

        StationRecord rec;
        rec.station_id = id;
        rec.province = prov;
        rec.latitude = lat;
        rec.longitude = lon;
        rec.year = year;
        rec.month = month;

        const std::string& temp_field = table.cell(i, c_temp);
        if (!is_missing_field(temp_field)) {
            double v;
            if (!parse_double(temp_field, v)) {
                out.row_errors.push_back(row_label + ": non-numeric temperature");
                ++out.dropped_rows;
                continue;
            }
            rec.mean_temp = v;
        }
        const std::string& prec_field = table.cell(i, c_prec);
        if (!is_missing_field(prec_field)) {
            double v;
            if (!parse_double(prec_field, v)) {
                out.row_errors.push_back(row_label + ": non-numeric precipitation");
                ++out.dropped_rows;
                continue;
            }
            rec.total_precip = v;
        }

        if (!seen_month.emplace(id, year, month).second) {
            ++out.dropped_rows;  // duplicate station-month, first wins
            continue;
        }

        if (seen_station.insert(id).second) {
            StationMeta meta;
            meta.station_id = id;
            meta.province = prov;
            meta.latitude = lat;
            meta.longitude = lon;
            if (c_sub && !is_missing_field(table.cell(i, *c_sub))) {
                meta.subregion_id = table.cell(i, *c_sub);
            }
            if (c_subpop && !is_missing_field(table.cell(i, *c_subpop))) {
                double pop;
                if (!parse_double(table.cell(i, *c_subpop), pop) || pop < 0.0) {
                    out.row_errors.push_back(row_label + ": bad subregion population");
                    ++out.dropped_rows;
                    seen_station.erase(id);
                    seen_month.erase({id, year, month});
                    continue;
                }
                meta.subregion_population = pop;
            }
            out.meta.push_back(std::move(meta));
        } else {
            ++out.duplicate_meta;
        }

        out.records.push_back(std::move(rec));
    }

    if (out.input_rows > 0 && out.dropped_rows * 2 > out.input_rows) {
        fatal_keys("more than 50% of station rows invalid", out.row_errors);
    }
    return out;
}

StationLoadResult load_stations_file(const std::filesystem::path& path, const SchemaMap& schema)
{
    return load_stations(CsvTable::read_file(path, schema.delimiter("stations")), schema);
}

CoverageResult coverage_filter(const std::vector<StationRecord>& records,
                               const std::vector<StationMeta>& meta, YearRange period,
                               CoverageThreshold threshold)
{
    if (period.size() <= 0) {
        throw DataError("coverage_filter: empty period");
    }
    if (threshold.den <= 0 || threshold.num < 0) {
        throw ConfigError("coverage threshold must be a nonnegative fraction");
    }

    // Complete months per station, temperature and precipitation separately.
    struct Counts {
        std::int64_t temp = 0;
        std::int64_t precip = 0;
    };
    std::map<std::string, Counts> counts;
    for (const auto& m : meta) {
        counts[m.station_id];  // stations with zero complete months still participate
    }
    for (const auto& r : records) {
        if (!period.contains(r.year)) {
            continue;
        }
        auto it = counts.find(r.station_id);
        if (it == counts.end()) {
            continue;  // record without meta (dropped station)
        }
        if (r.mean_temp) {
            ++it->second.temp;
        }
        if (r.total_precip) {
            ++it->second.precip;
        }
    }

    std::map<std::string, std::vector<const StationMeta*>> by_province;
    for (const auto& m : meta) {
        by_province[m.province].push_back(&m);
    }

    CoverageResult out;
    for (const auto& [province, stations] : by_province) {
        ProvinceCoverage cov;
        cov.province = province;
        cov.candidates = stations.size();
        for (const auto* m : stations) {
            const auto& c = counts[m->station_id];
            cov.max_temp_months = std::max(cov.max_temp_months, c.temp);
            cov.max_precip_months = std::max(cov.max_precip_months, c.precip);
        }
        for (const auto* m : stations) {
            const auto& c = counts[m->station_id];
            // count >= (num/den) * max, in exact integer arithmetic
            bool keep_temp = c.temp * threshold.den >= threshold.num * cov.max_temp_months;
            bool keep_prec = c.precip * threshold.den >= threshold.num * cov.max_precip_months;
            if (keep_temp && keep_prec) {
                out.retained.push_back(*m);
                ++cov.retained;
            }
        }
        if (cov.retained == 0) {
            throw DataError("coverage_filter: province " + province +
                            " has no stations meeting the coverage rule (max temp months " +
                            std::to_string(cov.max_temp_months) + ", max precip months " +
                            std::to_string(cov.max_precip_months) + ")");
        }
        out.by_province.push_back(cov);
    }
    return out;
}

std::vector<EconRow> load_econ(const CsvTable& table, const SchemaMap& schema)
{
    FieldReader f{table, schema, "econ"};
    auto c_prov = f.col("province");
    auto c_year = f.col("year");
    auto c_sector = f.col("sector");
    auto c_gdp = f.col("gdp_chained");
    auto c_pop = f.col("population");

    std::vector<EconRow> out;
    std::set<std::tuple<std::string, int, std::string>> seen;
    std::vector<std::string> dups;
    std::map<std::string, std::set<int>> series_years;

    for (std::size_t i = 0; i < table.rows(); ++i) {
        EconRow r;
        r.province = table.cell(i, c_prov);
        r.sector = table.cell(i, c_sector);
        if (!is_known_province(r.province)) {
            throw DataError("econ row " + std::to_string(i + 2) + ": unknown province '" +
                            r.province + "'");
        }
        if (!is_known_sector(r.sector)) {
            throw DataError("econ row " + std::to_string(i + 2) + ": unknown sector '" +
                            r.sector + "'");
        }
        if (!parse_int(table.cell(i, c_year), r.year) ||
            !parse_double(table.cell(i, c_gdp), r.gdp_chained) ||
            !parse_double(table.cell(i, c_pop), r.population)) {
            throw DataError("econ row " + std::to_string(i + 2) + ": unparseable numeric field");
        }
        if (r.gdp_chained <= 0.0 || r.population <= 0.0) {
            throw DataError("econ row " + std::to_string(i + 2) +
                            ": gdp and population must be positive");
        }
        if (!seen.emplace(r.province, r.year, r.sector).second) {
            dups.push_back(r.province + "/" + std::to_string(r.year) + "/" + r.sector);
        }
        series_years[r.province + "/" + r.sector].insert(r.year);
        out.push_back(std::move(r));
    }
    if (!dups.empty()) {
        fatal_keys("duplicate econ keys", dups);
    }
    check_contiguous_years(series_years, "econ");
    return out;
}

std::vector<IndexRow> load_indices(const CsvTable& table, const SchemaMap& schema)
{
    FieldReader f{table, schema, "indices"};
    auto c_name = f.col("name");
    auto c_prov = f.col("province");
    auto c_year = f.col("year");
    auto c_value = f.col("value");

    std::vector<IndexRow> out;
    std::set<std::tuple<std::string, std::string, int>> seen;
    std::vector<std::string> dups;
    std::map<std::string, std::set<int>> series_years;

    for (std::size_t i = 0; i < table.rows(); ++i) {
        IndexRow r;
        r.name = table.cell(i, c_name);
        if (std::find(kIndexNames.begin(), kIndexNames.end(), r.name) == kIndexNames.end()) {
            throw DataError("indices row " + std::to_string(i + 2) + ": unknown index '" +
                            r.name + "'");
        }
        const std::string& prov = table.cell(i, c_prov);
        if (r.name == "unemployment") {
            if (!is_known_province(prov)) {
                throw DataError("indices row " + std::to_string(i + 2) +
                                ": unemployment requires a province");
            }
            r.province = prov;
        } else if (!prov.empty()) {
            throw DataError("indices row " + std::to_string(i + 2) + ": index '" + r.name +
                            "' is national, province must be empty");
        }
        if (!parse_int(table.cell(i, c_year), r.year) ||
            !parse_double(table.cell(i, c_value), r.value) || !std::isfinite(r.value)) {
            throw DataError("indices row " + std::to_string(i + 2) + ": unparseable value");
        }
        if (!seen.emplace(r.name, prov, r.year).second) {
            dups.push_back(r.name + "/" + prov + "/" + std::to_string(r.year));
        }
        series_years[r.name + "/" + prov].insert(r.year);
        out.push_back(std::move(r));
    }
    if (!dups.empty()) {
        fatal_keys("duplicate index keys", dups);
    }
    check_contiguous_years(series_years, "indices");
    return out;
}

std::vector<EventRecord> load_events(const CsvTable& table, const SchemaMap& schema)
{
    FieldReader f{table, schema, "events"};
    auto c_id = f.col("event_id");
    auto c_label = f.col("label");
    auto c_year = f.col("year");
    auto c_month = f.col("month");
    auto c_prov = f.col("provinces");

    std::vector<EventRecord> out;
    std::set<int> seen;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        EventRecord r;
        if (!parse_int(table.cell(i, c_id), r.event_id) || r.event_id < 1 || r.event_id > 38) {
            throw DataError("events row " + std::to_string(i + 2) +
                            ": event_id must be an integer in 1..38");
        }
        if (!seen.insert(r.event_id).second) {
            throw DataError("duplicate event_id " + std::to_string(r.event_id));
        }
        r.label = table.cell(i, c_label);
        if (!parse_int(table.cell(i, c_year), r.year) ||
            !parse_int(table.cell(i, c_month), r.month) || r.month < 1 || r.month > 12) {
            throw DataError("events row " + std::to_string(i + 2) + ": bad year/month");
        }
        const std::string& prov_field = table.cell(i, c_prov);
        if (prov_field == "All" || prov_field == "ALL" || prov_field == "all") {
            r.provinces_affected = expand_province_field("All");
        } else {
            for (const auto& code : split(prov_field, '|')) {
                auto expanded = expand_province_field(code);
                r.provinces_affected.insert(r.provinces_affected.end(), expanded.begin(),
                                            expanded.end());
            }
        }
        if (r.provinces_affected.empty()) {
            throw DataError("events row " + std::to_string(i + 2) + ": no affected provinces");
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RcpDeltaRow> load_rcp(const CsvTable& table, const SchemaMap& schema)
{
    FieldReader f{table, schema, "rcp"};
    auto c_scen = f.col("scenario");
    auto c_prov = f.col("province");
    auto c_season = f.col("season");
    auto c_horizon = f.col("horizon");
    auto c_temp = f.col("temp_delta");
    auto c_prec = f.col("precip_delta");

    std::vector<RcpDeltaRow> out;
    std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
    std::map<std::tuple<Scenario, std::string, Season>, std::set<Horizon>> horizons;

    for (std::size_t i = 0; i < table.rows(); ++i) {
        RcpDeltaRow r;
        r.scenario = parse_scenario(table.cell(i, c_scen));
        r.province = table.cell(i, c_prov);
        if (!is_known_province(r.province)) {
            throw DataError("rcp row " + std::to_string(i + 2) + ": unknown province '" +
                            r.province + "'");
        }
        r.season = parse_season(table.cell(i, c_season));
        r.horizon = parse_horizon(table.cell(i, c_horizon));
        if (!parse_double(table.cell(i, c_temp), r.temp_delta) ||
            !parse_double(table.cell(i, c_prec), r.precip_delta)) {
            throw DataError("rcp row " + std::to_string(i + 2) + ": unparseable delta");
        }
        if (!seen.emplace(table.cell(i, c_scen), r.province, table.cell(i, c_season),
                          table.cell(i, c_horizon))
                 .second) {
            throw DataError("duplicate rcp cell at row " + std::to_string(i + 2));
        }
        horizons[{r.scenario, r.province, r.season}].insert(r.horizon);
        out.push_back(std::move(r));
    }

    std::vector<std::string> incomplete;
    for (const auto& [key, hs] : horizons) {
        if (hs.size() != 2) {
            const auto& [scen, prov, season] = key;
            incomplete.push_back(std::string(scenario_name(scen)) + "/" + prov + "/" +
                                 std::string(season_name(season)));
        }
    }
    if (!incomplete.empty()) {
        fatal_keys("rcp cells missing a horizon", incomplete);
    }
    return out;
}

std::vector<EconRow> load_econ_file(const std::filesystem::path& path, const SchemaMap& schema)
{
    return load_econ(CsvTable::read_file(path, schema.delimiter("econ")), schema);
}

std::vector<IndexRow> load_indices_file(const std::filesystem::path& path, const SchemaMap& schema)
{
    return load_indices(CsvTable::read_file(path, schema.delimiter("indices")), schema);
}

std::vector<EventRecord> load_events_file(const std::filesystem::path& path,
                                          const SchemaMap& schema)
{
    return load_events(CsvTable::read_file(path, schema.delimiter("events")), schema);
}

std::vector<RcpDeltaRow> load_rcp_file(const std::filesystem::path& path, const SchemaMap& schema)
{
    return load_rcp(CsvTable::read_file(path, schema.delimiter("rcp")), schema);
}

}  // namespace panelclim
