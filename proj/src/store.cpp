#include "panelclim/store.hpp"

#include "panelclim/util.hpp"

#include <algorithm>
#include <set>

namespace panelclim {

namespace {

std::string opt_str(const std::optional<std::string>& v) { return v.value_or(""); }

std::string opt_num(const std::optional<double>& v)
{
    return v.has_value() ? format_double(*v) : "";
}

double need_double(const CsvTable& t, std::size_t row, std::size_t col)
{
    double v = 0.0;
    if (!parse_double(t.cell(row, col), v)) {
        throw DataError("row " + std::to_string(row + 2) + ": unparseable number '" +
                        t.cell(row, col) + "'");
    }
    return v;
}

int need_int(const CsvTable& t, std::size_t row, std::size_t col)
{
    int v = 0;
    if (!parse_int(t.cell(row, col), v)) {
        throw DataError("row " + std::to_string(row + 2) + ": unparseable integer '" +
                        t.cell(row, col) + "'");
    }
    return v;
}

}  // namespace

CsvTable stations_table(const std::vector<StationRecord>& records)
{
    CsvTable t({"station_id", "province", "latitude", "longitude", "year", "month", "mean_temp",
                "total_precip"});
    for (const auto& r : records) {
        t.add_row({r.station_id, r.province, format_double(r.latitude),
                   format_double(r.longitude), std::to_string(r.year), std::to_string(r.month),
                   opt_num(r.mean_temp), opt_num(r.total_precip)});
    }
    return t;
}

CsvTable station_meta_table(const std::vector<StationMeta>& all,
                            const std::vector<StationMeta>& retained)
{
    std::set<std::string> kept;
    for (const auto& m : retained) kept.insert(m.station_id);
    CsvTable t({"station_id", "province", "latitude", "longitude", "subregion_id",
                "subregion_population", "retained"});
    for (const auto& m : all) {
        t.add_row({m.station_id, m.province, format_double(m.latitude),
                   format_double(m.longitude), opt_str(m.subregion_id),
                   opt_num(m.subregion_population), kept.count(m.station_id) ? "1" : "0"});
    }
    return t;
}

std::pair<std::vector<StationMeta>, std::vector<StationMeta>> read_station_meta(
    const CsvTable& table)
{
    const auto c_id = table.column("station_id");
    const auto c_prov = table.column("province");
    const auto c_lat = table.column("latitude");
    const auto c_lon = table.column("longitude");
    const auto c_sub = table.column("subregion_id");
    const auto c_pop = table.column("subregion_population");
    const auto c_ret = table.column("retained");
    std::vector<StationMeta> all;
    std::vector<StationMeta> retained;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        StationMeta m;
        m.station_id = table.cell(i, c_id);
        m.province = table.cell(i, c_prov);
        m.latitude = need_double(table, i, c_lat);
        m.longitude = need_double(table, i, c_lon);
        if (!is_missing_field(table.cell(i, c_sub))) m.subregion_id = table.cell(i, c_sub);
        if (!is_missing_field(table.cell(i, c_pop))) {
            m.subregion_population = need_double(table, i, c_pop);
        }
        if (table.cell(i, c_ret) == "1") retained.push_back(m);
        all.push_back(std::move(m));
    }
    return {std::move(all), std::move(retained)};
}

CsvTable econ_table(const std::vector<EconRow>& rows)
{
    CsvTable t({"province", "year", "sector", "gdp_chained", "population"});
    for (const auto& r : rows) {
        t.add_row({r.province, std::to_string(r.year), r.sector, format_double(r.gdp_chained),
                   format_double(r.population)});
    }
    return t;
}

CsvTable indices_table(const std::vector<IndexRow>& rows)
{
    CsvTable t({"name", "province", "year", "value"});
    for (const auto& r : rows) {
        t.add_row({r.name, opt_str(r.province), std::to_string(r.year), format_double(r.value)});
    }
    return t;
}

CsvTable events_table(const std::vector<EventRecord>& rows)
{
    CsvTable t({"event_id", "label", "year", "month", "provinces"});
    for (const auto& r : rows) {
        t.add_row({std::to_string(r.event_id), r.label, std::to_string(r.year),
                   std::to_string(r.month), join(r.provinces_affected, '|')});
    }
    return t;
}

CsvTable rcp_table(const std::vector<RcpDeltaRow>& rows)
{
    CsvTable t({"scenario", "province", "season", "horizon", "temp_delta", "precip_delta"});
    for (const auto& r : rows) {
        t.add_row({std::string(scenario_name(r.scenario)), r.province,
                   std::string(season_name(r.season)), std::string(horizon_name(r.horizon)),
                   format_double(r.temp_delta), format_double(r.precip_delta)});
    }
    return t;
}

CsvTable coverage_table(const std::vector<ProvinceCoverage>& rows)
{
    CsvTable t({"province", "max_temp_months", "max_precip_months", "candidates", "retained"});
    for (const auto& r : rows) {
        t.add_row({r.province, std::to_string(r.max_temp_months),
                   std::to_string(r.max_precip_months), std::to_string(r.candidates),
                   std::to_string(r.retained)});
    }
    return t;
}

CsvTable seasonal_table(const std::vector<SeasonalCell>& cells)
{
    CsvTable t({"province", "season", "year", "mean_temp", "mean_precip"});
    for (const auto& c : cells) {
        t.add_row({c.province, std::string(season_name(c.season)), std::to_string(c.year),
                   format_double(c.mean_temp), format_double(c.mean_precip)});
    }
    return t;
}

std::vector<SeasonalCell> read_seasonal(const CsvTable& table)
{
    const auto c_prov = table.column("province");
    const auto c_season = table.column("season");
    const auto c_year = table.column("year");
    const auto c_temp = table.column("mean_temp");
    const auto c_prec = table.column("mean_precip");
    std::vector<SeasonalCell> cells;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        SeasonalCell c;
        c.province = table.cell(i, c_prov);
        c.season = parse_season(table.cell(i, c_season));
        c.year = need_int(table, i, c_year);
        c.mean_temp = need_double(table, i, c_temp);
        c.mean_precip = need_double(table, i, c_prec);
        cells.push_back(std::move(c));
    }
    return cells;
}

CsvTable anomalies_table(const std::vector<AnomalyRow>& rows)
{
    CsvTable t({"province", "season", "year", "temp_anomaly", "precip_anomaly", "weighting"});
    for (const auto& r : rows) {
        t.add_row({r.province, std::string(season_name(r.season)), std::to_string(r.year),
                   format_double(r.temp_anomaly), format_double(r.precip_anomaly),
                   std::string(weighting_name(r.weighting))});
    }
    return t;
}

std::vector<AnomalyRow> read_anomalies(const CsvTable& table)
{
    const auto c_prov = table.column("province");
    const auto c_season = table.column("season");
    const auto c_year = table.column("year");
    const auto c_temp = table.column("temp_anomaly");
    const auto c_prec = table.column("precip_anomaly");
    const auto c_weight = table.column("weighting");
    std::vector<AnomalyRow> rows;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        AnomalyRow r;
        r.province = table.cell(i, c_prov);
        r.season = parse_season(table.cell(i, c_season));
        r.year = need_int(table, i, c_year);
        r.temp_anomaly = need_double(table, i, c_temp);
        r.precip_anomaly = need_double(table, i, c_prec);
        r.weighting = parse_weighting(table.cell(i, c_weight));
        rows.push_back(std::move(r));
    }
    return rows;
}

CsvTable growth_table(const std::vector<GrowthRow>& rows)
{
    CsvTable t({"province", "sector", "year", "pcgr"});
    for (const auto& r : rows) {
        t.add_row({r.province, r.sector, std::to_string(r.year), format_double(r.pcgr)});
    }
    return t;
}

std::vector<GrowthRow> read_growth(const CsvTable& table)
{
    const auto c_prov = table.column("province");
    const auto c_sector = table.column("sector");
    const auto c_year = table.column("year");
    const auto c_pcgr = table.column("pcgr");
    std::vector<GrowthRow> rows;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        GrowthRow r;
        r.province = table.cell(i, c_prov);
        r.sector = table.cell(i, c_sector);
        r.year = need_int(table, i, c_year);
        r.pcgr = need_double(table, i, c_pcgr);
        rows.push_back(std::move(r));
    }
    return rows;
}

CsvTable index_growth_table(const std::vector<IndexGrowthRow>& rows)
{
    CsvTable t({"name", "province", "year", "value"});
    for (const auto& r : rows) {
        t.add_row({r.name, opt_str(r.province), std::to_string(r.year), format_double(r.value)});
    }
    return t;
}

std::vector<IndexGrowthRow> read_index_growth(const CsvTable& table)
{
    const auto c_name = table.column("name");
    const auto c_prov = table.column("province");
    const auto c_year = table.column("year");
    const auto c_value = table.column("value");
    std::vector<IndexGrowthRow> rows;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        IndexGrowthRow r;
        r.name = table.cell(i, c_name);
        if (!is_missing_field(table.cell(i, c_prov))) r.province = table.cell(i, c_prov);
        r.year = need_int(table, i, c_year);
        r.value = need_double(table, i, c_value);
        rows.push_back(std::move(r));
    }
    return rows;
}

CsvTable baseline_table(const std::map<BaselineKey, SeasonalBaseline>& baselines)
{
    CsvTable t({"province", "season", "temp_mean", "precip_mean"});
    for (const auto& [key, base] : baselines) {
        t.add_row({key.first, std::string(season_name(key.second)), format_double(base.temp_mean),
                   format_double(base.precip_mean)});
    }
    return t;
}

std::map<BaselineKey, SeasonalBaseline> read_baseline(const CsvTable& table)
{
    const auto c_prov = table.column("province");
    const auto c_season = table.column("season");
    const auto c_temp = table.column("temp_mean");
    const auto c_prec = table.column("precip_mean");
    std::map<BaselineKey, SeasonalBaseline> out;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        SeasonalBaseline base;
        base.temp_mean = need_double(table, i, c_temp);
        base.precip_mean = need_double(table, i, c_prec);
        out[{table.cell(i, c_prov), parse_season(table.cell(i, c_season))}] = base;
    }
    return out;
}

nlohmann::json fit_to_json(const FitResult& fit)
{
    nlohmann::json j;
    j["model"] = fit.model_name;
    j["coefficients"] = nlohmann::json::object();
    for (std::size_t i = 0; i < fit.x_names.size(); ++i) {
        j["coefficients"][fit.x_names[i]] = fit.beta(static_cast<Eigen::Index>(i));
    }
    j["column_order"] = fit.x_names;
    j["sigma2_eps"] = fit.sigma2_eps;
    j["theta"] = nlohmann::json::object();
    for (std::size_t k = 0; k < fit.block_labels.size(); ++k) {
        j["theta"][fit.block_labels[k]] = fit.theta[k];
    }
    j["block_order"] = fit.block_labels;
    j["random_effects"] = nlohmann::json::object();
    for (std::size_t k = 0; k < fit.random_effect_names.size(); ++k) {
        j["random_effects"][fit.random_effect_names[k]] =
            fit.random_effects(static_cast<Eigen::Index>(k));
    }
    j["random_effect_order"] = fit.random_effect_names;
    j["loglik_ml"] = fit.loglik_ml;
    j["loglik_reml"] = fit.loglik_reml;
    j["aic"] = fit.aic;
    j["bic"] = fit.bic;
    j["n"] = fit.n;
    j["p"] = fit.p;
    j["converged"] = fit.converged;
    j["degenerate"] = fit.degenerate;
    j["warnings"] = fit.warnings;
    return j;
}

FitResult fit_from_json(const nlohmann::json& j)
{
    FitResult fit;
    fit.model_name = j.at("model").get<std::string>();
    fit.x_names = j.at("column_order").get<std::vector<std::string>>();
    fit.beta.resize(static_cast<Eigen::Index>(fit.x_names.size()));
    for (std::size_t i = 0; i < fit.x_names.size(); ++i) {
        fit.beta(static_cast<Eigen::Index>(i)) =
            j.at("coefficients").at(fit.x_names[i]).get<double>();
    }
    fit.sigma2_eps = j.at("sigma2_eps").get<double>();
    fit.block_labels = j.at("block_order").get<std::vector<std::string>>();
    for (const auto& label : fit.block_labels) {
        fit.theta.push_back(j.at("theta").at(label).get<double>());
    }
    fit.random_effect_names = j.at("random_effect_order").get<std::vector<std::string>>();
    fit.random_effects.resize(static_cast<Eigen::Index>(fit.random_effect_names.size()));
    for (std::size_t k = 0; k < fit.random_effect_names.size(); ++k) {
        fit.random_effects(static_cast<Eigen::Index>(k)) =
            j.at("random_effects").at(fit.random_effect_names[k]).get<double>();
    }
    fit.loglik_ml = j.at("loglik_ml").get<double>();
    fit.loglik_reml = j.at("loglik_reml").get<double>();
    fit.aic = j.at("aic").get<double>();
    fit.bic = j.at("bic").get<double>();
    fit.n = j.at("n").get<int>();
    fit.p = j.at("p").get<int>();
    fit.converged = j.at("converged").get<bool>();
    fit.degenerate = j.at("degenerate").get<bool>();
    fit.warnings = j.value("warnings", std::vector<std::string>{});
    return fit;
}

Manifest Manifest::load(const std::filesystem::path& file)
{
    Manifest m;
    if (std::filesystem::exists(file)) {
        m.json = nlohmann::json::parse(read_text_file(file));
    }
    if (!m.json.contains("stages")) m.json["stages"] = nlohmann::json::object();
    return m;
}

void Manifest::save(const std::filesystem::path& file) const
{
    write_text_file(file, json.dump(2) + "\n");
}

bool Manifest::stage_is_current(const std::string& stage, const std::string& input_hash,
                                const std::filesystem::path& out_dir) const
{
    if (!json.contains("stages") || !json.at("stages").contains(stage)) return false;
    const auto& entry = json.at("stages").at(stage);
    if (entry.value("status", "") != "ok") return false;
    if (entry.value("input_hash", "") != input_hash) return false;
    if (!entry.contains("outputs")) return false;
    for (const auto& [name, meta] : entry.at("outputs").items()) {
        const auto path = out_dir / name;
        if (!std::filesystem::exists(path)) return false;
        if (hash_hex(hash_file(path)) != meta.value("hash", "")) return false;
    }
    return true;
}

void Manifest::record_stage(const std::string& stage, const std::string& input_hash,
                            const std::filesystem::path& out_dir,
                            const std::vector<std::pair<std::string, std::size_t>>& outputs,
                            const nlohmann::json& stats)
{
    nlohmann::json entry;
    entry["status"] = "ok";
    entry["input_hash"] = input_hash;
    entry["outputs"] = nlohmann::json::object();
    for (const auto& [name, rows] : outputs) {
        entry["outputs"][name] = {{"hash", hash_hex(hash_file(out_dir / name))}, {"rows", rows}};
    }
    entry["stats"] = stats;
    json["stages"][stage] = std::move(entry);
}

nlohmann::json Manifest::stage_stats(const std::string& stage) const
{
    if (json.contains("stages") && json.at("stages").contains(stage)) {
        return json.at("stages").at(stage).value("stats", nlohmann::json::object());
    }
    return nlohmann::json::object();
}

}  // namespace panelclim
