#include "panelclim/synth.hpp"

#include "panelclim/csv.hpp"
#include "panelclim/ingest.hpp"
#include "panelclim/rng.hpp"
#include "panelclim/util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace panelclim {

namespace {

// Fixed stream ids keep each ingredient's draw sequence stable when other
// ingredients are toggled on or off.
enum Stream : std::uint64_t {
    kClimateStream = 0,
    kIndexStream = 1,
    kEventStream = 2,
    kFixedEffectStream = 3,
    kRandomEffectStream = 4,
    kNoiseStream = 5,
    kInitialLagStream = 6,
    kStationStream = 10,
    kEconStream = 11,
    kMacroStream = 12,
    kEventTableStream = 13,
    kScenarioStream = 14,
};

}  // namespace

nlohmann::json SynthConfig::to_json() const
{
    nlohmann::json j;
    j["seed"] = seed;
    j["n_provinces"] = n_provinces;
    j["years"] = std::to_string(years.first) + ":" + std::to_string(years.last);
    j["sector"] = sector;
    j["spec"] = spec.to_json();
    j["intercept"] = intercept;
    j["lag_coef"] = lag_coef;
    j["error_sd"] = error_sd;
    j["province_effect_sd"] = province_effect_sd;
    j["year_effect_sd"] = year_effect_sd;
    j["beta"] = beta;
    j["theta"] = theta;
    j["temp_anom_sd"] = temp_anom_sd;
    j["precip_frac_sd"] = precip_frac_sd;
    j["n_events"] = n_events;
    return j;
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j)
{
    SynthConfig c;
    c.seed = j.value("seed", std::uint64_t{1});
    c.n_provinces = j.value("n_provinces", 10);
    if (j.contains("years")) c.years = parse_year_range(j.at("years").get<std::string>());
    c.sector = j.value("sector", std::string("TOTAL"));
    if (j.contains("spec")) c.spec = ModelSpec::from_json(j.at("spec"));
    c.intercept = j.value("intercept", 0.02);
    c.lag_coef = j.value("lag_coef", 0.2);
    c.error_sd = j.value("error_sd", 0.01);
    c.province_effect_sd = j.value("province_effect_sd", 0.01);
    c.year_effect_sd = j.value("year_effect_sd", 0.01);
    if (j.contains("beta")) c.beta = j.at("beta").get<std::map<std::string, double>>();
    if (j.contains("theta")) c.theta = j.at("theta").get<std::map<std::string, double>>();
    c.temp_anom_sd = j.value("temp_anom_sd", 1.2);
    c.precip_frac_sd = j.value("precip_frac_sd", 0.12);
    c.n_events = j.value("n_events", 0);
    return c;
}

SynthPanel generate_panel(const SynthConfig& config)
{
    if (config.n_provinces < 2 || config.n_provinces > static_cast<int>(kProvinces.size())) {
        throw ConfigError("synthetic panel needs between 2 and " +
                          std::to_string(kProvinces.size()) + " provinces");
    }
    if (config.years.first > config.years.last) throw ConfigError("empty synthetic year range");
    if (!(config.error_sd >= 0.0)) throw ConfigError("error_sd must be non-negative");
    config.spec.validate();

    std::vector<std::string> provinces;
    for (int i = 0; i < config.n_provinces; ++i) provinces.emplace_back(kProvinces[i]);

    Panel panel;
    panel.sector = config.sector;
    if (config.spec.include_indices) {
        for (const auto& name : kIndexNames) panel.index_names.emplace_back(name);
    }

    // Regressor draws. Climate first, then macro series, then events, each
    // from its own stream.
    Rng climate_rng = Rng::for_stream(config.seed, kClimateStream);
    std::map<std::tuple<std::string, int, int>, std::pair<double, double>> climate;
    for (const auto& province : provinces) {
        for (int year = config.years.first; year <= config.years.last; ++year) {
            for (int s = 0; s < 4; ++s) {
                const double t = climate_rng.next_normal() * config.temp_anom_sd;
                const double p = climate_rng.next_normal() * config.precip_frac_sd;
                climate[{province, year, s}] = {t, p};
            }
        }
    }

    Rng index_rng = Rng::for_stream(config.seed, kIndexStream);
    std::map<int, std::array<double, 4>> national;     // year -> first four index values
    std::map<std::pair<std::string, int>, double> ue;  // unemployment
    if (config.spec.include_indices) {
        for (int year = config.years.first; year <= config.years.last; ++year) {
            national[year] = {0.02 + 0.015 * index_rng.next_normal(),
                              0.08 * index_rng.next_normal(),
                              0.06 * index_rng.next_normal(),
                              2.0 + 0.5 * index_rng.next_normal()};
        }
        for (const auto& province : provinces) {
            for (int year = config.years.first; year <= config.years.last; ++year) {
                ue[{province, year}] = 7.0 + index_rng.next_normal();
            }
        }
    }

    Rng event_rng = Rng::for_stream(config.seed, kEventStream);
    std::vector<EventRecord> events;
    const int want_events =
        config.spec.events == EventTreatment::random ? std::max(config.n_events, 1)
                                                     : config.n_events;
    for (int e = 1; e <= want_events; ++e) {
        EventRecord rec;
        rec.event_id = e;
        rec.label = "E" + std::to_string(e);
        rec.year = config.years.first +
                   static_cast<int>(event_rng.next_below(
                       static_cast<std::uint64_t>(config.years.size())));
        rec.month = 1 + static_cast<int>(event_rng.next_below(12));
        for (const auto& province : provinces) {
            if (event_rng.next_uniform() < 0.5) rec.provinces_affected.push_back(province);
        }
        if (rec.provinces_affected.empty()) {
            rec.provinces_affected.push_back(
                provinces[event_rng.next_below(provinces.size())]);
        }
        events.push_back(std::move(rec));
    }
    EventMatrix ev = event_matrix(events, provinces, config.years);
    panel.event_ids = ev.event_ids;
    panel.event_labels = ev.labels;

    // Rows in (province, year) order with a placeholder response; the
    // compiled design then defines the exact column set for this spec.
    for (const auto& province : provinces) {
        for (int year = config.years.first; year <= config.years.last; ++year) {
            PanelRow row;
            row.province = province;
            row.cluster = province;
            row.year = year;
            for (int s = 0; s < 4; ++s) {
                const auto& [t, p] = climate.at({province, year, s});
                row.temp_anomaly[static_cast<std::size_t>(s)] = t;
                row.precip_frac[static_cast<std::size_t>(s)] = p;
            }
            if (config.spec.include_indices) {
                const auto& nat = national.at(year);
                row.index_values = {nat[0], nat[1], nat[2], nat[3], ue.at({province, year})};
            }
            if (!panel.event_ids.empty()) {
                const auto r = ev.row_index(province, year);
                row.event_indicators.resize(panel.event_ids.size());
                for (std::size_t e = 0; e < panel.event_ids.size(); ++e) {
                    row.event_indicators[e] =
                        ev.indicators(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(e));
                }
            }
            panel.rows.push_back(std::move(row));
        }
    }

    // The rows still lack responses; the compile below only fixes the column
    // set and random blocks for this spec. The lag column gets placeholder
    // values that no dummy or trend combination can reproduce, keeping the
    // rank guard quiet, and is zeroed in the compiled matrix so the response
    // recursion can add the real lag term itself.
    for (std::size_t i = 0; i < panel.rows.size(); ++i) {
        panel.rows[i].pcgr_lag = 0.01 * std::sin(1.7 * static_cast<double>(i + 1));
    }
    CompiledDesign design = compile(panel, config.spec);
    design.X.col(design.column("pcgr_lag")).setZero();

    SynthTruth truth;
    truth.error_sd = config.error_sd;
    Rng effect_rng = Rng::for_stream(config.seed, kFixedEffectStream);
    Eigen::VectorXd beta_vec(design.p());
    for (int j = 0; j < design.p(); ++j) {
        const std::string& name = design.x_names[static_cast<std::size_t>(j)];
        double value = 0.0;
        if (name == "(Intercept)") {
            value = config.intercept;
        } else if (name.rfind("province:", 0) == 0) {
            value = effect_rng.next_normal() * config.province_effect_sd;
        } else if (name.rfind("year:", 0) == 0) {
            value = effect_rng.next_normal() * config.year_effect_sd;
        } else if (name == "pcgr_lag") {
            value = config.lag_coef;
        } else if (auto it = config.beta.find(name); it != config.beta.end()) {
            value = it->second;
        }
        beta_vec(j) = value;
        truth.beta[name] = value;
    }

    Rng re_rng = Rng::for_stream(config.seed, kRandomEffectStream);
    std::vector<Eigen::VectorXd> block_effects;
    for (const auto& block : design.blocks) {
        auto it = config.theta.find(block.label);
        const double ratio = it == config.theta.end() ? 0.0 : it->second;
        if (ratio < 0.0) throw ConfigError("negative variance ratio for block " + block.label);
        truth.theta[block.label] = ratio;
        const double sd = std::sqrt(ratio) * config.error_sd;
        Eigen::VectorXd u(block.Z.cols());
        for (Eigen::Index c = 0; c < u.size(); ++c) u(c) = re_rng.next_normal() * sd;
        block_effects.push_back(std::move(u));
    }

    Rng init_rng = Rng::for_stream(config.seed, kInitialLagStream);
    std::map<std::string, double> lag;
    for (const auto& province : provinces) {
        lag[province] = 0.02 + 0.02 * init_rng.next_normal();
    }

    // Responses follow the recursion in design-row order, which matches the
    // (province, year) panel order used above.
    Rng noise_rng = Rng::for_stream(config.seed, kNoiseStream);
    for (int i = 0; i < design.n(); ++i) {
        PanelRow& row = panel.rows[static_cast<std::size_t>(i)];
        double y = design.X.row(i).dot(beta_vec);  // lag column zeroed above
        y += config.lag_coef * lag.at(row.province);
        for (std::size_t k = 0; k < design.blocks.size(); ++k) {
            y += design.blocks[k].Z.row(i).dot(block_effects[k]);
        }
        y += noise_rng.next_normal() * config.error_sd;
        row.pcgr_lag = lag.at(row.province);
        row.pcgr = y;
        lag[row.province] = y;
    }
    return {std::move(panel), std::move(truth)};
}

namespace {

double monthly_temp(int province_index, int year, int month, int base_year, double noise)
{
    const double seasonal =
        -8.0 + 22.0 * std::sin(2.0 * std::numbers::pi * (month - 3.5) / 12.0);
    return seasonal - 0.6 * province_index + 0.02 * (year - base_year) + noise;
}

double monthly_precip(int province_index, int month, double noise)
{
    const double seasonal =
        65.0 + 25.0 * std::sin(2.0 * std::numbers::pi * (month - 0.5) / 12.0);
    return std::max(2.0, seasonal + 4.0 * province_index + noise);
}

}  // namespace

void generate_store(const SynthStoreConfig& config, const std::filesystem::path& dir)
{
    if (config.years.first > config.years.last) throw ConfigError("empty synthetic year range");
    if (config.n_stations < 1) throw ConfigError("need at least one dense station per province");
    std::filesystem::create_directories(dir);

    const int y0 = config.years.first;
    const int y1 = config.years.last;

    // Station months, including the year before the panel start so winter
    // cells that borrow December are complete.
    Rng st_rng = Rng::for_stream(config.seed, kStationStream);
    CsvTable stations({"station_id", "province", "latitude", "longitude", "year", "month",
                       "mean_temp", "total_precip", "subregion_id", "subregion_population"});
    for (std::size_t pi = 0; pi < kProvinces.size(); ++pi) {
        const std::string province(kProvinces[pi]);
        const int total = config.n_stations + config.n_sparse_stations;
        for (int k = 0; k < total; ++k) {
            const bool sparse = k >= config.n_stations;
            const std::string id = "SYN_" + province + "_" + std::to_string(k);
            const double lat = 44.0 + 1.3 * static_cast<double>(pi) + 0.2 * k;
            const double lon = -130.0 + 6.5 * static_cast<double>(pi) + 0.3 * k;
            const std::string sub = "S" + province + std::to_string(k);
            const double pop = 10000.0 * (k + 1) * (1.0 + static_cast<double>(pi) / 10.0);
            for (int year = y0 - 1; year <= y1; ++year) {
                for (int month = 1; month <= 12; ++month) {
                    const double t =
                        monthly_temp(static_cast<int>(pi), year, month, y0,
                                     2.0 * st_rng.next_normal());
                    const double p = monthly_precip(static_cast<int>(pi), month,
                                                    15.0 * st_rng.next_normal());
                    const double miss_rate = sparse ? 0.5 : config.missing_rate;
                    const bool miss_t = st_rng.next_uniform() < miss_rate;
                    const bool miss_p = st_rng.next_uniform() < miss_rate;
                    stations.add_row({id, province, format_double(lat), format_double(lon),
                                      std::to_string(year), std::to_string(month),
                                      miss_t ? "" : format_double(t),
                                      miss_p ? "" : format_double(p),
                                      config.subregion_population ? sub : "",
                                      config.subregion_population ? format_double(pop) : ""});
                }
            }
        }
    }
    stations.write_file(dir / "stations.csv");

    // Economic accounts start two years early so growth and its lag cover
    // the whole panel span.
    Rng ec_rng = Rng::for_stream(config.seed, kEconStream);
    CsvTable econ({"province", "year", "sector", "gdp_chained", "population"});
    std::vector<std::string> sectors = config.sectors;
    if (std::find(sectors.begin(), sectors.end(), std::string(kTotalSector)) == sectors.end()) {
        sectors.insert(sectors.begin(), std::string(kTotalSector));
    }
    for (std::size_t pi = 0; pi < kProvinces.size(); ++pi) {
        const std::string province(kProvinces[pi]);
        for (const auto& sector : sectors) {
            double gdp = 9.0e4 * (1.0 + static_cast<double>(pi) / 5.0);
            double pop = 1.0e6 * (1.0 + static_cast<double>(pi) / 3.0);
            for (int year = y0 - 2; year <= y1; ++year) {
                gdp *= std::exp(0.02 + 0.02 * ec_rng.next_normal());
                pop *= std::exp(0.01 + 0.003 * ec_rng.next_normal());
                econ.add_row({province, std::to_string(year), sector, format_double(gdp),
                              format_double(pop)});
            }
        }
    }
    econ.write_file(dir / "econ.csv");

    Rng mc_rng = Rng::for_stream(config.seed, kMacroStream);
    CsvTable indices({"name", "province", "year", "value"});
    {
        double world = 100.0, energy = 80.0, nonenergy = 90.0;
        for (int year = y0 - 1; year <= y1; ++year) {
            world *= std::exp(0.025 + 0.01 * mc_rng.next_normal());
            energy *= std::exp(0.08 * mc_rng.next_normal());
            nonenergy *= std::exp(0.05 * mc_rng.next_normal());
            indices.add_row({"world_gdp", "", std::to_string(year), format_double(world)});
            indices.add_row({"energy_index", "", std::to_string(year), format_double(energy)});
            indices.add_row(
                {"nonenergy_index", "", std::to_string(year), format_double(nonenergy)});
            indices.add_row({"target_rate", "", std::to_string(year),
                             format_double(std::max(0.25, 2.0 + 0.5 * mc_rng.next_normal()))});
        }
        for (const auto& province : kProvinces) {
            for (int year = y0 - 1; year <= y1; ++year) {
                indices.add_row({std::string("unemployment"), std::string(province),
                                 std::to_string(year),
                                 format_double(std::max(2.0, 7.0 + mc_rng.next_normal()))});
            }
        }
    }
    indices.write_file(dir / "indices.csv");

    Rng ev_rng = Rng::for_stream(config.seed, kEventTableStream);
    CsvTable events({"event_id", "label", "year", "month", "provinces"});
    for (int e = 1; e <= config.n_events; ++e) {
        const int year =
            y0 + static_cast<int>(ev_rng.next_below(static_cast<std::uint64_t>(y1 - y0 + 1)));
        const int month = 1 + static_cast<int>(ev_rng.next_below(12));
        std::string provinces_field;
        if (e % 2 == 0) {
            provinces_field = "All";
        } else {
            const int count = 1 + static_cast<int>(ev_rng.next_below(3));
            std::vector<std::string> picked;
            while (static_cast<int>(picked.size()) < count) {
                std::string cand(kProvinces[ev_rng.next_below(kProvinces.size())]);
                if (std::find(picked.begin(), picked.end(), cand) == picked.end()) {
                    picked.push_back(std::move(cand));
                }
            }
            std::sort(picked.begin(), picked.end());
            provinces_field = join(picked, "|");
        }
        events.add_row({std::to_string(e), "E" + std::to_string(e), std::to_string(year),
                        std::to_string(month), provinces_field});
    }
    events.write_file(dir / "events.csv");

    Rng sc_rng = Rng::for_stream(config.seed, kScenarioStream);
    CsvTable rcp({"scenario", "province", "season", "horizon", "temp_delta", "precip_delta"});
    for (Scenario scenario : {Scenario::rcp26, Scenario::rcp45, Scenario::rcp85}) {
        const double mult =
            scenario == Scenario::rcp26 ? 0.7 : (scenario == Scenario::rcp45 ? 1.0 : 1.8);
        for (const auto& province : kProvinces) {
            for (Season season : kSeasons) {
                const double t_near = (0.8 + 0.4 * sc_rng.next_uniform()) * mult;
                const double t_mid = t_near + (0.5 + 0.5 * sc_rng.next_uniform()) * mult;
                const double p_near = -2.0 + 8.0 * sc_rng.next_uniform();
                const double p_mid = p_near + (-1.0 + 6.0 * sc_rng.next_uniform());
                rcp.add_row({std::string(scenario_name(scenario)), std::string(province),
                             std::string(season_name(season)), "near", format_double(t_near),
                             format_double(p_near)});
                rcp.add_row({std::string(scenario_name(scenario)), std::string(province),
                             std::string(season_name(season)), "mid", format_double(t_mid),
                             format_double(p_mid)});
            }
        }
    }
    rcp.write_file(dir / "rcp.csv");

    write_text_file(dir / "schema.json", "{}\n");

    nlohmann::json run;
    run["stations"] = "stations.csv";
    run["econ"] = "econ.csv";
    run["indices"] = "indices.csv";
    run["events"] = "events.csv";
    run["rcp"] = "rcp.csv";
    run["schema"] = "schema.json";
    run["out_dir"] = "out";
    run["baseline"] = std::to_string(y0) + ":" + std::to_string(y1);
    run["panel_years"] = std::to_string(y0) + ":" + std::to_string(y1);
    run["weighting"] = "unweighted";
    run["winter_rule"] = "previous_december";
    run["coverage"] = "9/10";
    run["sector"] = "TOTAL";
    run["models"] = nlohmann::json::array({"m1", "m5"});
    run["inference_model"] = "m5";
    run["scenario"] = "rcp45";
    run["anchor_rule"] = "window_end";
    run["horizon"] = 2050;
    run["bootstrap"] = {{"replicates", 100}, {"seed", 1729}, {"threads", 1}};
    write_text_file(dir / "run.json", run.dump(2) + "\n");
}

}  // namespace panelclim
