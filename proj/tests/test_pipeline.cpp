#include <doctest.h>

#include "panelclim/pipeline.hpp"
#include "panelclim/synth.hpp"
#include "panelclim/util.hpp"

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

using namespace panelclim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& tag)
    {
        path = fs::temp_directory_path() /
               ("panelclim_pipe_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// Synthetic raw store plus a run configuration trimmed for test speed.
RunConfig store_config(const fs::path& dir, std::uint64_t seed)
{
    SynthStoreConfig cfg;
    cfg.seed = seed;
    generate_store(cfg, dir);
    RunConfig run = RunConfig::from_file(dir / "run.json");
    run.models = {"m1", "m5"};
    run.bootstrap.replicates = 30;
    return run;
}

std::vector<fs::path> expected_outputs(const fs::path& out)
{
    return {out / "ingest/stations_clean.csv", out / "ingest/station_meta.csv",
            out / "ingest/econ.csv",           out / "ingest/indices.csv",
            out / "ingest/events.csv",         out / "ingest/rcp.csv",
            out / "ingest/coverage.csv",       out / "features/seasonal.csv",
            out / "features/anomalies.csv",    out / "features/growth.csv",
            out / "features/index_growth.csv", out / "features/baseline.csv",
            out / "fit/fits.json",             out / "infer/table.csv",
            out / "infer/table.json",          out / "infer/margins.csv",
            out / "project/paths.csv",         out / "project/trajectories.csv",
            out / "bootstrap/bands.csv",       out / "bootstrap/bootstrap.json",
            out / "manifest.json"};
}

}  // namespace

TEST_CASE("a full run produces every stage artifact and a second run skips all stages")
{
    TempDir dir("full");
    const RunConfig run = store_config(dir.path, 101);

    const RunSummary first = run_all(run);
    REQUIRE(first.stages.size() == 6);
    for (const auto& stage : first.stages) CHECK(!stage.skipped);
    for (const auto& path : expected_outputs(first.out_dir)) CHECK(fs::exists(path));
    CHECK(!fs::exists(first.out_dir / "FAILED"));

    // Capture output content, rerun, and confirm both the skip decision and
    // the bytes.
    std::map<std::string, std::uint64_t> before;
    for (const auto& path : expected_outputs(first.out_dir)) {
        if (path.filename() != "manifest.json") before[path.string()] = hash_file(path);
    }
    const RunSummary second = run_all(run);
    for (const auto& stage : second.stages) CHECK(stage.skipped);
    for (const auto& [path, digest] : before) CHECK(hash_file(path) == digest);
}

TEST_CASE("the manifest records hashes, row counts, and stage statistics")
{
    TempDir dir("manifest");
    const RunConfig run = store_config(dir.path, 103);
    run_all(run);

    const Manifest manifest = Manifest::load(run.resolved_out_dir() / "manifest.json");
    CHECK(manifest.json.at("engine").get<std::string>() == kEngineVersion);
    for (const auto& stage : pipeline_stages()) {
        const auto& entry = manifest.json.at("stages").at(stage);
        CHECK(!entry.at("input_hash").get<std::string>().empty());
        CHECK(!entry.at("outputs").empty());
    }
    const auto ingest_stats = manifest.stage_stats("ingest");
    CHECK(ingest_stats.at("station_input_rows").get<std::size_t>() > 0);
    CHECK(ingest_stats.at("stations_retained").get<std::size_t>() == 30);
    const auto boot_stats = manifest.stage_stats("bootstrap");
    CHECK(boot_stats.at("replicates").get<int>() == 30);
}

TEST_CASE("settings invalidate only the stages that read them")
{
    TempDir dir("invalidate");
    RunConfig run = store_config(dir.path, 107);
    run_all(run);

    // The scenario feeds projection and the bootstrap but nothing upstream.
    run.scenario = Scenario::rcp85;
    const RunSummary summary = run_all(run);
    REQUIRE(summary.stages.size() == 6);
    CHECK(summary.stages[0].skipped);
    CHECK(summary.stages[1].skipped);
    CHECK(summary.stages[2].skipped);
    CHECK(summary.stages[3].skipped);
    CHECK(!summary.stages[4].skipped);
    CHECK(!summary.stages[5].skipped);
}

TEST_CASE("an input edit that leaves normalized outputs unchanged stops propagating")
{
    TempDir dir("chain");
    const RunConfig run = store_config(dir.path, 109);
    run_all(run);

    // Append a station row with an impossible latitude: the loader drops it,
    // so the raw file hash changes but stations_clean.csv does not.
    {
        std::ofstream out(dir.path / "stations.csv", std::ios::app);
        out << "SYN_BAD_0,QC,95.0,-70.0,2001,6,1.0,2.0,,\n";
    }
    const RunSummary summary = run_all(run);
    CHECK(!summary.stages[0].skipped);  // ingest sees the new bytes
    CHECK(summary.stages[1].skipped);   // features sees identical clean tables
    CHECK(summary.stages[2].skipped);
    CHECK(summary.stages[3].skipped);
    CHECK(summary.stages[4].skipped);
    CHECK(summary.stages[5].skipped);
}

TEST_CASE("a forced run recomputes every stage and reproduces the same bytes")
{
    TempDir dir("force");
    const RunConfig run = store_config(dir.path, 139);
    run_all(run);

    std::map<std::string, std::uint64_t> before;
    for (const auto& path : expected_outputs(run.resolved_out_dir())) {
        if (path.filename() != "manifest.json") before[path.string()] = hash_file(path);
    }
    const RunSummary forced = run_all(run, true);
    for (const auto& stage : forced.stages) CHECK(!stage.skipped);
    for (const auto& [path, digest] : before) CHECK(hash_file(path) == digest);
}

TEST_CASE("running a stage without its inputs names the missing predecessor")
{
    TempDir dir("missing");
    SynthStoreConfig cfg;
    cfg.seed = 111;
    generate_store(cfg, dir.path);
    RunConfig run = RunConfig::from_file(dir.path / "run.json");

    try {
        run_stage(run, "features");
        FAIL("expected a missing-input error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("run the ingest stage first") != std::string::npos);
    }
    try {
        run_stage(run, "infer");
        FAIL("expected a missing-input error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("run the fit stage first") != std::string::npos);
    }
    CHECK_THROWS_AS(run_stage(run, "polish"), ConfigError);
}

TEST_CASE("a failing run leaves a FAILED marker that the next success clears")
{
    TempDir dir("failed");
    RunConfig run = store_config(dir.path, 113);

    RunConfig broken = run;
    broken.sector = "BOGUS";
    CHECK_THROWS_AS(run_all(broken), DataError);
    const fs::path marker = run.resolved_out_dir() / "FAILED";
    REQUIRE(fs::exists(marker));
    CHECK(read_text_file(marker).find("BOGUS") != std::string::npos);

    run_all(run);
    CHECK(!fs::exists(marker));
}

TEST_CASE("single-stage runs execute unconditionally and feed the shared manifest")
{
    TempDir dir("single");
    const RunConfig run = store_config(dir.path, 127);

    const StageReport once = run_stage(run, "ingest");
    CHECK(once.name == "ingest");
    CHECK(!once.skipped);
    const StageReport again = run_stage(run, "ingest");
    CHECK(!again.skipped);

    // run_all now finds ingest current and picks up from features.
    const RunSummary summary = run_all(run);
    CHECK(summary.stages[0].skipped);
    CHECK(!summary.stages[1].skipped);
}

TEST_CASE("identical stores give byte-identical pipeline results")
{
    TempDir a("bytes_a");
    TempDir b("bytes_b");
    const RunConfig run_a = store_config(a.path, 137);
    const RunConfig run_b = store_config(b.path, 137);
    run_all(run_a);
    run_all(run_b);

    for (const char* name : {"infer/table.csv", "infer/margins.csv", "project/trajectories.csv",
                             "bootstrap/bands.csv"}) {
        CHECK(hash_file(run_a.resolved_out_dir() / name) ==
              hash_file(run_b.resolved_out_dir() / name));
    }
}

TEST_CASE("plot-ready exports join margins, trajectories, and bootstrap bands")
{
    TempDir dir("plot");
    const RunConfig run = store_config(dir.path, 149);

    try {
        write_plotdata(run);
        FAIL("expected a missing-input error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("run the infer stage first") != std::string::npos);
    }

    run_all(run);
    const auto written = write_plotdata(run);
    REQUIRE(written.size() == 3);
    for (const auto& path : written) CHECK(fs::exists(path));
    const fs::path plot_dir = run.resolved_out_dir() / "plotdata";

    const CsvTable margins = CsvTable::read_file(plot_dir / "margins_ci.csv");
    CHECK(margins.rows() == 8);
    CHECK(margins.cell(0, margins.column("model")) == run.inference_model);
    CHECK(!margins.cell(0, margins.column("ci_low")).empty());

    const CsvTable traj =
        CsvTable::read_file(run.resolved_out_dir() / "project/trajectories.csv");
    const CsvTable joined = CsvTable::read_file(plot_dir / "impact_trajectories.csv");
    REQUIRE(joined.rows() == traj.rows());
    for (std::size_t i = 0; i < joined.rows(); ++i) {
        CHECK(!joined.cell(i, joined.column("lower")).empty());
        CHECK(!joined.cell(i, joined.column("upper")).empty());
        CHECK(joined.cell(i, joined.column("pct_impact")) ==
              traj.cell(i, traj.column("pct_impact")));
    }

    // The horizon file keeps exactly the final-year row of every province.
    std::size_t horizon_rows = 0;
    for (std::size_t i = 0; i < traj.rows(); ++i) {
        if (traj.cell(i, traj.column("year")) == std::to_string(run.horizon)) ++horizon_rows;
    }
    const CsvTable horizon = CsvTable::read_file(plot_dir / "impact_horizon.csv");
    CHECK(horizon.rows() == horizon_rows);
    CHECK(horizon.rows() > 0);
}
