#include "panelclim/panel.hpp"
#include "panelclim/pipeline.hpp"
#include "panelclim/synth.hpp"
#include "panelclim/util.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>

namespace {

using panelclim::RunConfig;

int threads_from_env()
{
    const char* env = std::getenv("PANELCLIM_THREADS");
    if (env == nullptr) return 0;
    int value = 0;
    if (!panelclim::parse_int(env, value) || value < 1) {
        throw panelclim::ConfigError("PANELCLIM_THREADS must be a positive integer");
    }
    return value;
}

struct CommonArgs {
    std::string config_path;
    std::string spec_list;  // comma-separated preset override for the roster
    int threads = 0;        // 0 means not set
    bool winter_same_year = false;
};

RunConfig load_config(const CommonArgs& args)
{
    RunConfig config = RunConfig::from_file(args.config_path);
    if (args.winter_same_year) {
        config.winter_rule = panelclim::WinterRule::same_calendar_year;
    }
    if (!args.spec_list.empty()) {
        config.models = panelclim::split(args.spec_list, ',');
        for (const auto& name : config.models) panelclim::ModelSpec::preset(name);
        if (std::find(config.models.begin(), config.models.end(), config.inference_model) ==
            config.models.end()) {
            throw panelclim::ConfigError("inference model '" + config.inference_model +
                                         "' is not in the model roster");
        }
    }
    int threads = args.threads;
    if (threads == 0) threads = threads_from_env();
    if (threads > 0) config.bootstrap.threads = threads;
    return config;
}

void add_common(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("-c,--config", args.config_path, "Run configuration JSON file")
        ->required();
    cmd->add_option("--spec", args.spec_list,
                    "Comma-separated model presets overriding the configured roster");
    cmd->add_option("--threads", args.threads, "Worker threads for resampling")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--winter-same-year", args.winter_same_year,
                  "Build winter from the calendar year's own December");
}

void print_report(const panelclim::StageReport& report)
{
    std::cerr << "stage " << report.name << ": " << (report.skipped ? "up to date" : "ok")
              << " (" << panelclim::format_double(report.seconds) << "s)\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Provincial climate-growth panel engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(panelclim::kEngineVersion));

    CommonArgs run_args;
    bool force = false;
    bool run_plotdata = false;
    CLI::App* run_cmd = app.add_subcommand("run-all", "Run every pipeline stage with caching");
    add_common(run_cmd, run_args);
    run_cmd->add_flag("--force", force, "Recompute every stage even when inputs are unchanged");
    run_cmd->add_flag("--plotdata", run_plotdata,
                      "Also write plot-ready views of margins, trajectories, and bands");

    std::map<std::string, CommonArgs> stage_args;
    for (const auto& stage : panelclim::pipeline_stages()) {
        CLI::App* cmd = app.add_subcommand(stage, "Run the " + stage + " stage");
        add_common(cmd, stage_args[stage]);
    }
    bool project_plotdata = false;
    app.get_subcommand("project")
        ->add_flag("--plotdata", project_plotdata,
                   "Also write plot-ready views of margins, trajectories, and bands");

    std::string synth_dir;
    std::uint64_t synth_seed = 1;
    std::string synth_years = "1998:2017";
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "Write a synthetic demonstration input set");
    synth_cmd->add_option("-o,--out", synth_dir, "Target directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "Generator seed");
    synth_cmd->add_option("--years", synth_years, "Panel year range, e.g. 1998:2017");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            const RunConfig config = load_config(run_args);
            const auto summary = panelclim::run_all(config, force);
            for (const auto& report : summary.stages) print_report(report);
            if (run_plotdata) {
                for (const auto& path : panelclim::write_plotdata(config)) {
                    std::cerr << "plot data " << path.string() << "\n";
                }
            }
            std::cerr << "outputs in " << summary.out_dir.string() << "\n";
            return 0;
        }
        for (const auto& stage : panelclim::pipeline_stages()) {
            CLI::App* cmd = app.get_subcommand(stage);
            if (cmd->parsed()) {
                const RunConfig config = load_config(stage_args[stage]);
                print_report(panelclim::run_stage(config, stage));
                if (stage == "project" && project_plotdata) {
                    for (const auto& path : panelclim::write_plotdata(config)) {
                        std::cerr << "plot data " << path.string() << "\n";
                    }
                }
                return 0;
            }
        }
        if (synth_cmd->parsed()) {
            panelclim::SynthStoreConfig config;
            config.seed = synth_seed;
            config.years = panelclim::parse_year_range(synth_years);
            panelclim::generate_store(config, synth_dir);
            std::cerr << "synthetic inputs in " << synth_dir << "\n";
            return 0;
        }
    } catch (const panelclim::ConfigError& ex) {
        std::cerr << "configuration error: " << ex.what() << "\n";
        return 2;
    } catch (const panelclim::DataError& ex) {
        std::cerr << "data error: " << ex.what() << "\n";
        return 3;
    } catch (const panelclim::NumericError& ex) {
        std::cerr << "numeric error: " << ex.what() << "\n";
        return 4;
    } catch (const std::exception& ex) {
        std::cerr << "internal error: " << ex.what() << "\n";
        return 4;
    }
    return 0;
}
