#include "panelclim/pipeline.hpp"

#include "panelclim/boot.hpp"
#include "panelclim/infer.hpp"
#include "panelclim/panel.hpp"
#include "panelclim/project.hpp"
#include "panelclim/util.hpp"

#include <array>
#include <chrono>
#include <map>
#include <set>
#include <sstream>

namespace panelclim {

namespace {

namespace fs = std::filesystem;

struct StageOutcome {
    std::vector<std::pair<std::string, std::size_t>> outputs;
    nlohmann::json stats = nlohmann::json::object();
};

void hash_append(std::string& acc, std::string_view label, std::string_view value)
{
    acc.append(label);
    acc.push_back('=');
    acc.append(value);
    acc.push_back('\n');
}

void hash_append_file(std::string& acc, std::string_view label, const fs::path& path,
                      const std::string& produced_by)
{
    if (!fs::exists(path)) {
        if (produced_by.empty()) {
            throw DataError("input file does not exist: " + path.string());
        }
        throw DataError("missing " + path.string() + "; run the " + produced_by +
                        " stage first");
    }
    hash_append(acc, label, hash_hex(hash_file(path)));
}

std::string range_text(YearRange r)
{
    return std::to_string(r.first) + ":" + std::to_string(r.last);
}

std::string ingest_hash(const RunConfig& c)
{
    std::string acc;
    hash_append(acc, "engine", kEngineVersion);
    hash_append_file(acc, "stations", c.resolve(c.stations), "");
    hash_append_file(acc, "econ", c.resolve(c.econ), "");
    hash_append_file(acc, "indices", c.resolve(c.indices), "");
    hash_append_file(acc, "events", c.resolve(c.events), "");
    hash_append_file(acc, "rcp", c.resolve(c.rcp), "");
    if (c.schema.has_value()) hash_append_file(acc, "schema", c.resolve(*c.schema), "");
    hash_append(acc, "panel_years", range_text(c.panel_years));
    hash_append(acc, "coverage",
                std::to_string(c.coverage.num) + "/" + std::to_string(c.coverage.den));
    return hash_hex(fnv1a64(acc));
}

std::string features_hash(const RunConfig& c, const fs::path& out)
{
    std::string acc;
    hash_append(acc, "engine", kEngineVersion);
    for (const char* name : {"stations_clean.csv", "station_meta.csv", "econ.csv", "indices.csv"}) {
        hash_append_file(acc, name, out / "ingest" / name, "ingest");
    }
    hash_append(acc, "weighting", weighting_name(c.weighting));
    hash_append(acc, "winter_rule", winter_rule_name(c.winter_rule));
    hash_append(acc, "baseline", range_text(c.baseline));
    return hash_hex(fnv1a64(acc));
}

std::string fit_hash(const RunConfig& c, const fs::path& out)
{
    std::string acc;
    hash_append(acc, "engine", kEngineVersion);
    for (const char* name : {"anomalies.csv", "growth.csv", "index_growth.csv"}) {
        hash_append_file(acc, name, out / "features" / name, "features");
    }
    hash_append_file(acc, "events.csv", out / "ingest" / "events.csv", "ingest");
    hash_append(acc, "models", join(c.models, ','));
    hash_append(acc, "sector", c.sector);
    hash_append(acc, "panel_years", range_text(c.panel_years));
    return hash_hex(fnv1a64(acc));
}

std::string infer_hash(const RunConfig& c, const fs::path& out)
{
    std::string acc;
    hash_append(acc, "engine", kEngineVersion);
    hash_append_file(acc, "fits.json", out / "fit" / "fits.json", "fit");
    for (const char* name : {"anomalies.csv", "growth.csv", "index_growth.csv"}) {
        hash_append_file(acc, name, out / "features" / name, "features");
    }
    hash_append_file(acc, "events.csv", out / "ingest" / "events.csv", "ingest");
    hash_append(acc, "inference_model", c.inference_model);
    hash_append(acc, "sector", c.sector);
    hash_append(acc, "panel_years", range_text(c.panel_years));
    return hash_hex(fnv1a64(acc));
}

std::string project_hash(const RunConfig& c, const fs::path& out)
{
    std::string acc;
    hash_append(acc, "engine", kEngineVersion);
    hash_append_file(acc, "fits.json", out / "fit" / "fits.json", "fit");
    hash_append_file(acc, "baseline.csv", out / "features" / "baseline.csv", "features");
    hash_append_file(acc, "anomalies.csv", out / "features" / "anomalies.csv", "features");
    hash_append_file(acc, "rcp.csv", out / "ingest" / "rcp.csv", "ingest");
    hash_append(acc, "scenario", scenario_name(c.scenario));
    hash_append(acc, "anchor_rule", anchor_rule_name(c.anchor_rule));
    hash_append(acc, "horizon", std::to_string(c.horizon));
    hash_append(acc, "baseline", range_text(c.baseline));
    return hash_hex(fnv1a64(acc));
}

std::string bootstrap_hash(const RunConfig& c, const fs::path& out)
{
    std::string acc;
    hash_append(acc, "engine", kEngineVersion);
    hash_append_file(acc, "fits.json", out / "fit" / "fits.json", "fit");
    for (const char* name : {"anomalies.csv", "growth.csv", "index_growth.csv", "baseline.csv"}) {
        hash_append_file(acc, name, out / "features" / name, "features");
    }
    hash_append_file(acc, "events.csv", out / "ingest" / "events.csv", "ingest");
    hash_append_file(acc, "rcp.csv", out / "ingest" / "rcp.csv", "ingest");
    hash_append(acc, "scenario", scenario_name(c.scenario));
    hash_append(acc, "anchor_rule", anchor_rule_name(c.anchor_rule));
    hash_append(acc, "horizon", std::to_string(c.horizon));
    hash_append(acc, "replicates", std::to_string(c.bootstrap.replicates));
    hash_append(acc, "seed", std::to_string(c.bootstrap.seed));
    hash_append(acc, "coefficients", c.bootstrap.write_coefficients ? "1" : "0");
    return hash_hex(fnv1a64(acc));
}

std::size_t write_table(const CsvTable& table, const fs::path& path)
{
    table.write_file(path);
    return table.rows();
}

StageOutcome do_ingest(const RunConfig& c, const fs::path& stage_dir)
{
    const SchemaMap schema = c.load_schema();
    const auto stations = load_stations_file(c.resolve(c.stations), schema);
    const auto econ = load_econ_file(c.resolve(c.econ), schema);
    const auto indices = load_indices_file(c.resolve(c.indices), schema);
    const auto events = load_events_file(c.resolve(c.events), schema);
    const auto rcp = load_rcp_file(c.resolve(c.rcp), schema);
    const auto coverage = coverage_filter(stations.records, stations.meta, c.panel_years,
                                          c.coverage);

    StageOutcome out;
    out.outputs.emplace_back("stations_clean.csv",
                             write_table(stations_table(stations.records),
                                         stage_dir / "stations_clean.csv"));
    out.outputs.emplace_back("station_meta.csv",
                             write_table(station_meta_table(stations.meta, coverage.retained),
                                         stage_dir / "station_meta.csv"));
    out.outputs.emplace_back("econ.csv", write_table(econ_table(econ), stage_dir / "econ.csv"));
    out.outputs.emplace_back("indices.csv",
                             write_table(indices_table(indices), stage_dir / "indices.csv"));
    out.outputs.emplace_back("events.csv",
                             write_table(events_table(events), stage_dir / "events.csv"));
    out.outputs.emplace_back("rcp.csv", write_table(rcp_table(rcp), stage_dir / "rcp.csv"));
    out.outputs.emplace_back("coverage.csv", write_table(coverage_table(coverage.by_province),
                                                         stage_dir / "coverage.csv"));

    out.stats["station_input_rows"] = stations.input_rows;
    out.stats["station_dropped_rows"] = stations.dropped_rows;
    out.stats["station_duplicate_meta"] = stations.duplicate_meta;
    out.stats["station_row_errors"] = stations.row_errors.size();
    nlohmann::json samples = nlohmann::json::array();
    for (std::size_t i = 0; i < stations.row_errors.size() && i < 10; ++i) {
        samples.push_back(stations.row_errors[i]);
    }
    out.stats["station_row_error_samples"] = samples;
    std::size_t retained = 0;
    for (const auto& p : coverage.by_province) retained += p.retained;
    out.stats["stations_retained"] = retained;
    return out;
}

StageOutcome do_features(const RunConfig& c, const fs::path& stage_dir)
{
    const fs::path ingest_dir = stage_dir.parent_path() / "ingest";
    const SchemaMap identity;
    const auto stations = load_stations_file(ingest_dir / "stations_clean.csv", identity);
    const auto meta = read_station_meta(CsvTable::read_file(ingest_dir / "station_meta.csv"));
    const auto econ = load_econ_file(ingest_dir / "econ.csv", identity);
    const auto indices = load_indices_file(ingest_dir / "indices.csv", identity);

    const auto seasonal = seasonalize(stations.records, meta.second, c.weighting, c.winter_rule);
    const auto baselines = baseline_means(seasonal.cells, c.baseline);
    const auto anomalies = compute_anomalies(seasonal.cells, c.baseline, c.weighting);
    const auto growth = pcgr(econ);
    const auto idx_growth = index_growth(indices);

    StageOutcome out;
    out.outputs.emplace_back("seasonal.csv", write_table(seasonal_table(seasonal.cells),
                                                         stage_dir / "seasonal.csv"));
    out.outputs.emplace_back("anomalies.csv",
                             write_table(anomalies_table(anomalies), stage_dir / "anomalies.csv"));
    out.outputs.emplace_back("growth.csv",
                             write_table(growth_table(growth), stage_dir / "growth.csv"));
    out.outputs.emplace_back("index_growth.csv",
                             write_table(index_growth_table(idx_growth),
                                         stage_dir / "index_growth.csv"));
    out.outputs.emplace_back("baseline.csv", write_table(baseline_table(baselines),
                                                         stage_dir / "baseline.csv"));
    out.stats["seasonal_cells"] = seasonal.cells.size();
    out.stats["seasonal_warnings"] = seasonal.warnings.size();
    out.stats["anomaly_rows"] = anomalies.size();
    out.stats["growth_rows"] = growth.size();
    return out;
}

Panel assemble_from_store(const RunConfig& c, const fs::path& out_root)
{
    const SchemaMap identity;
    const auto anomalies = read_anomalies(CsvTable::read_file(out_root / "features/anomalies.csv"));
    const auto growth = read_growth(CsvTable::read_file(out_root / "features/growth.csv"));
    const auto idx_growth =
        read_index_growth(CsvTable::read_file(out_root / "features/index_growth.csv"));
    const auto events = load_events_file(out_root / "ingest/events.csv", identity);
    return assemble(anomalies, growth, idx_growth, events, c.sector, c.panel_years);
}

StageOutcome do_fit(const RunConfig& c, const fs::path& stage_dir)
{
    const fs::path out_root = stage_dir.parent_path();
    const Panel panel = assemble_from_store(c, out_root);

    nlohmann::json fits_json = nlohmann::json::array();
    nlohmann::json conv = nlohmann::json::object();
    for (const auto& name : c.models) {
        const ModelSpec spec = ModelSpec::preset(name);
        const CompiledDesign design = compile(panel, spec);
        const FitResult fit = fit_model(design);
        fits_json.push_back(fit_to_json(fit));
        conv[fit.model_name] = fit.converged;
    }

    StageOutcome out;
    write_text_file(stage_dir / "fits.json",
                    nlohmann::json{{"models", fits_json}}.dump(2) + "\n");
    out.outputs.emplace_back("fits.json", fits_json.size());
    out.stats["panel_rows"] = panel.rows.size();
    out.stats["panel_dropped_rows"] = panel.dropped_rows;
    out.stats["converged"] = conv;
    return out;
}

StageOutcome do_infer(const RunConfig& c, const fs::path& stage_dir)
{
    const fs::path out_root = stage_dir.parent_path();
    const Panel panel = assemble_from_store(c, out_root);
    const auto doc = nlohmann::json::parse(read_text_file(out_root / "fit/fits.json"));

    std::vector<FitResult> fits;
    std::vector<RobustVcov> vcovs;
    std::vector<MarginalEffect> margins;
    bool margins_found = false;
    for (const auto& j : doc.at("models")) {
        FitResult fit = fit_from_json(j);
        const CompiledDesign design = compile(panel, ModelSpec::preset(fit.model_name));
        const RobustVcov rv = cr2_vcov(design, fit);
        if (fit.model_name == c.inference_model) {
            margins = average_marginal_effects(fit, rv, design);
            margins_found = true;
        }
        fits.push_back(std::move(fit));
        vcovs.push_back(rv);
    }
    if (!margins_found) {
        throw DataError("stored fits lack the inference model '" + c.inference_model + "'");
    }
    const ReportTable table = report_table(fits, vcovs);

    StageOutcome out;
    out.outputs.emplace_back("table.csv", write_table(table.to_csv(), stage_dir / "table.csv"));
    write_text_file(stage_dir / "table.json", table.to_json().dump(2) + "\n");
    out.outputs.emplace_back("table.json", fits.size());
    out.outputs.emplace_back("margins.csv", write_table(margins_csv(margins, c.inference_model),
                                                        stage_dir / "margins.csv"));
    out.stats["models"] = fits.size();
    out.stats["inference_model"] = c.inference_model;
    return out;
}

FitResult inference_fit_from_store(const RunConfig& c, const fs::path& out_root)
{
    const auto doc = nlohmann::json::parse(read_text_file(out_root / "fit/fits.json"));
    for (const auto& j : doc.at("models")) {
        if (j.at("model").get<std::string>() == c.inference_model) return fit_from_json(j);
    }
    throw DataError("stored fits lack the inference model '" + c.inference_model + "'");
}

ScenarioPaths paths_from_store(const RunConfig& c, const fs::path& out_root)
{
    const auto baselines = read_baseline(CsvTable::read_file(out_root / "features/baseline.csv"));
    const auto rcp = load_rcp_file(out_root / "ingest/rcp.csv", SchemaMap{});
    const YearRange span{c.baseline.last + 1, c.horizon};
    return extrapolate_climate(rcp, baselines, c.scenario, span, c.anchor_rule);
}

StageOutcome do_project(const RunConfig& c, const fs::path& stage_dir)
{
    const fs::path out_root = stage_dir.parent_path();
    const FitResult fit = inference_fit_from_store(c, out_root);
    const auto anomalies = read_anomalies(CsvTable::read_file(out_root / "features/anomalies.csv"));
    const ScenarioPaths paths = paths_from_store(c, out_root);

    std::set<std::string> provinces;
    for (const auto& row : paths.rows) provinces.insert(row.province);
    std::vector<Trajectory> trajectories;
    for (const auto& province : provinces) {
        Trajectory t = project_impact(fit, paths, anomalies, c.baseline, province, c.horizon);
        t.sector = c.sector;
        trajectories.push_back(std::move(t));
    }

    StageOutcome out;
    out.outputs.emplace_back("paths.csv",
                             write_table(scenario_paths_csv(paths), stage_dir / "paths.csv"));
    out.outputs.emplace_back("trajectories.csv", write_table(trajectories_csv(trajectories),
                                                             stage_dir / "trajectories.csv"));
    out.stats["provinces"] = provinces.size();
    out.stats["span"] = range_text(paths.span);
    return out;
}

StageOutcome do_bootstrap(const RunConfig& c, const fs::path& stage_dir)
{
    const fs::path out_root = stage_dir.parent_path();
    const Panel panel = assemble_from_store(c, out_root);
    const ModelSpec spec = ModelSpec::preset(c.inference_model);
    const FitResult fit = inference_fit_from_store(c, out_root);
    const auto anomalies = read_anomalies(CsvTable::read_file(out_root / "features/anomalies.csv"));
    const ScenarioPaths paths = paths_from_store(c, out_root);

    BootstrapOptions options;
    options.replicates = c.bootstrap.replicates;
    options.seed = c.bootstrap.seed;
    options.threads = c.bootstrap.threads;
    options.horizon_year = c.horizon;
    options.warm_theta = fit.theta;
    const BootstrapResult result =
        block_bootstrap(panel, spec, paths, anomalies, c.baseline, options);

    StageOutcome out;
    out.outputs.emplace_back("bands.csv",
                             write_table(bootstrap_bands_csv(result), stage_dir / "bands.csv"));
    if (c.bootstrap.write_coefficients) {
        out.outputs.emplace_back("coefficients.csv",
                                 write_table(bootstrap_coefficients_csv(result),
                                             stage_dir / "coefficients.csv"));
    }
    nlohmann::json meta;
    meta["seed"] = result.seed;
    meta["replicates"] = result.requested;
    meta["failures"] = result.failures;
    meta["warnings"] = result.warnings;
    write_text_file(stage_dir / "bootstrap.json", meta.dump(2) + "\n");
    out.outputs.emplace_back("bootstrap.json", 1);
    out.stats = meta;
    return out;
}

std::string stage_hash(const RunConfig& c, const fs::path& out_root, const std::string& stage)
{
    if (stage == "ingest") return ingest_hash(c);
    if (stage == "features") return features_hash(c, out_root);
    if (stage == "fit") return fit_hash(c, out_root);
    if (stage == "infer") return infer_hash(c, out_root);
    if (stage == "project") return project_hash(c, out_root);
    if (stage == "bootstrap") return bootstrap_hash(c, out_root);
    throw ConfigError("unknown pipeline stage '" + stage + "'");
}

StageOutcome run_stage_body(const RunConfig& c, const fs::path& stage_dir,
                            const std::string& stage)
{
    fs::create_directories(stage_dir);
    if (stage == "ingest") return do_ingest(c, stage_dir);
    if (stage == "features") return do_features(c, stage_dir);
    if (stage == "fit") return do_fit(c, stage_dir);
    if (stage == "infer") return do_infer(c, stage_dir);
    if (stage == "project") return do_project(c, stage_dir);
    if (stage == "bootstrap") return do_bootstrap(c, stage_dir);
    throw ConfigError("unknown pipeline stage '" + stage + "'");
}

}  // namespace

const std::vector<std::string>& pipeline_stages()
{
    static const std::vector<std::string> stages = {"ingest", "features", "fit",
                                                    "infer",  "project",  "bootstrap"};
    return stages;
}

StageReport run_stage(const RunConfig& config, const std::string& stage)
{
    const fs::path out_root = config.resolved_out_dir();
    fs::create_directories(out_root);
    const fs::path manifest_path = out_root / "manifest.json";
    Manifest manifest = Manifest::load(manifest_path);
    manifest.json["engine"] = kEngineVersion;

    const auto start = std::chrono::steady_clock::now();
    const std::string input_hash = stage_hash(config, out_root, stage);
    const StageOutcome outcome = run_stage_body(config, out_root / stage, stage);
    manifest.record_stage(stage, input_hash, out_root / stage, outcome.outputs, outcome.stats);
    manifest.save(manifest_path);

    StageReport report;
    report.name = stage;
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

RunSummary run_all(const RunConfig& config, bool force)
{
    const fs::path out_root = config.resolved_out_dir();
    fs::create_directories(out_root);
    const fs::path manifest_path = out_root / "manifest.json";
    const fs::path failed_marker = out_root / "FAILED";
    {
        std::error_code ec;
        fs::remove(failed_marker, ec);
    }

    RunSummary summary;
    summary.out_dir = out_root;
    try {
        Manifest manifest = Manifest::load(manifest_path);
        manifest.json["engine"] = kEngineVersion;
        for (const auto& stage : pipeline_stages()) {
            StageReport report;
            report.name = stage;
            const auto start = std::chrono::steady_clock::now();
            const std::string input_hash = stage_hash(config, out_root, stage);
            if (!force && manifest.stage_is_current(stage, input_hash, out_root / stage)) {
                report.skipped = true;
            } else {
                const StageOutcome outcome = run_stage_body(config, out_root / stage, stage);
                manifest.record_stage(stage, input_hash, out_root / stage, outcome.outputs,
                                      outcome.stats);
                manifest.save(manifest_path);
            }
            report.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            summary.stages.push_back(std::move(report));
        }
    } catch (const std::exception& ex) {
        write_text_file(failed_marker, std::string(ex.what()) + "\n");
        throw;
    }
    return summary;
}

std::vector<fs::path> write_plotdata(const RunConfig& config)
{
    const fs::path out_root = config.resolved_out_dir();
    const auto require = [](const fs::path& path, const std::string& stage) {
        if (!fs::exists(path)) {
            throw DataError("missing " + path.string() + "; run the " + stage +
                            " stage first");
        }
    };
    require(out_root / "infer/margins.csv", "infer");
    require(out_root / "project/trajectories.csv", "project");

    const fs::path plot_dir = out_root / "plotdata";
    fs::create_directories(plot_dir);
    std::vector<fs::path> written;

    // Marginal effects as point estimates with confidence bars.
    {
        const CsvTable margins = CsvTable::read_file(out_root / "infer/margins.csv");
        CsvTable out({"model", "variable", "display", "estimate", "ci_low", "ci_high", "stars"});
        for (std::size_t i = 0; i < margins.rows(); ++i) {
            out.add_row({margins.cell(i, margins.column("model")),
                         margins.cell(i, margins.column("variable")),
                         margins.cell(i, margins.column("display")),
                         margins.cell(i, margins.column("estimate")),
                         margins.cell(i, margins.column("ci_low")),
                         margins.cell(i, margins.column("ci_high")),
                         margins.cell(i, margins.column("stars"))});
        }
        out.write_file(plot_dir / "margins_ci.csv");
        written.push_back(plot_dir / "margins_ci.csv");
    }

    // Impact trajectories with the bootstrap band alongside, when available.
    std::map<std::pair<std::string, std::string>, std::array<std::string, 3>> band;
    if (fs::exists(out_root / "bootstrap/bands.csv")) {
        const CsvTable bands = CsvTable::read_file(out_root / "bootstrap/bands.csv");
        for (std::size_t i = 0; i < bands.rows(); ++i) {
            band[{bands.cell(i, bands.column("province")), bands.cell(i, bands.column("year"))}] =
                {bands.cell(i, bands.column("lower")), bands.cell(i, bands.column("median")),
                 bands.cell(i, bands.column("upper"))};
        }
    }
    const CsvTable traj = CsvTable::read_file(out_root / "project/trajectories.csv");
    CsvTable joined({"scenario", "province", "sector", "year", "pct_impact", "lower", "median",
                     "upper"});
    CsvTable horizon({"scenario", "province", "sector", "pct_impact", "lower", "upper"});
    const std::string horizon_year = std::to_string(config.horizon);
    for (std::size_t i = 0; i < traj.rows(); ++i) {
        const std::string province = traj.cell(i, traj.column("province"));
        const std::string year = traj.cell(i, traj.column("year"));
        std::array<std::string, 3> cells{"", "", ""};
        if (const auto it = band.find({province, year}); it != band.end()) cells = it->second;
        joined.add_row({traj.cell(i, traj.column("scenario")), province,
                        traj.cell(i, traj.column("sector")), year,
                        traj.cell(i, traj.column("pct_impact")), cells[0], cells[1], cells[2]});
        if (year == horizon_year) {
            horizon.add_row({traj.cell(i, traj.column("scenario")), province,
                             traj.cell(i, traj.column("sector")),
                             traj.cell(i, traj.column("pct_impact")), cells[0], cells[2]});
        }
    }
    joined.write_file(plot_dir / "impact_trajectories.csv");
    written.push_back(plot_dir / "impact_trajectories.csv");
    horizon.write_file(plot_dir / "impact_horizon.csv");
    written.push_back(plot_dir / "impact_horizon.csv");
    return written;
}

}  // namespace panelclim
