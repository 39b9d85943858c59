#include "panelclim/boot.hpp"

#include "panelclim/rng.hpp"
#include "panelclim/stats.hpp"
#include "panelclim/util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

namespace panelclim {

namespace {

// Replicate panel: sampled provinces become slots, and a province drawn
// twice appears as two distinct clusters so the refit treats them as
// independent blocks.
Panel resample_panel(const Panel& panel, const std::vector<std::vector<const PanelRow*>>& by_province,
                     const std::vector<std::string>& provinces, const std::vector<int>& draw)
{
    Panel rep;
    rep.sector = panel.sector;
    rep.index_names = panel.index_names;
    rep.event_ids = panel.event_ids;
    rep.event_labels = panel.event_labels;
    for (std::size_t slot = 0; slot < draw.size(); ++slot) {
        const auto& rows = by_province[static_cast<std::size_t>(draw[slot])];
        const std::string cluster =
            provinces[static_cast<std::size_t>(draw[slot])] + "#" + std::to_string(slot);
        for (const PanelRow* src : rows) {
            PanelRow row = *src;
            row.cluster = cluster;
            rep.rows.push_back(std::move(row));
        }
    }
    return rep;
}

}  // namespace

BootstrapResult block_bootstrap(const Panel& panel, const ModelSpec& spec,
                                const ScenarioPaths& paths,
                                const std::vector<AnomalyRow>& historical, YearRange baseline,
                                const BootstrapOptions& options)
{
    if (options.replicates < 1) throw ConfigError("bootstrap needs at least one replicate");
    if (!(options.max_failure_rate >= 0.0 && options.max_failure_rate < 1.0)) {
        throw ConfigError("bootstrap failure budget must lie in [0, 1)");
    }

    BootstrapResult result;
    result.seed = options.seed;
    result.requested = options.replicates;
    result.scenario = paths.scenario;
    result.model = spec.name;
    result.provinces = panel.provinces();
    const std::size_t n_prov = result.provinces.size();
    if (n_prov < 2) throw DataError("bootstrap needs at least two provinces to resample");

    for (int year = paths.span.first - 1; year <= options.horizon_year; ++year) {
        result.years.push_back(year);
    }

    std::vector<std::vector<const PanelRow*>> by_province(n_prov);
    {
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < n_prov; ++i) index[result.provinces[i]] = i;
        for (const auto& row : panel.rows) by_province[index.at(row.province)].push_back(&row);
    }

    // Fail fast on configuration problems before spawning workers.
    compile(panel, spec);
    if (!options.warm_theta.empty()) {
        std::size_t expected = 0;
        if (spec.year_effect == YearEffect::random) ++expected;
        if (spec.events == EventTreatment::random) ++expected;
        if (spec.province_random_slopes) expected += 8;
        if (options.warm_theta.size() != expected) {
            throw ConfigError("warm-start ratio vector has wrong length for specification '" +
                              spec.name + "'");
        }
    }

    RemlOptions reml_options;
    if (!options.warm_theta.empty()) {
        reml_options.warm_starts = {options.warm_theta};
        reml_options.start_scales = {1.0};
    }

    result.detail.resize(static_cast<std::size_t>(options.replicates));

    const auto run_replicate = [&](int rep_index) {
        BootstrapReplicate rep;
        rep.index = rep_index;
        Rng rng = Rng::for_stream(options.seed, static_cast<std::uint64_t>(rep_index));
        rep.draw.resize(n_prov);
        for (std::size_t slot = 0; slot < n_prov; ++slot) {
            rep.draw[slot] = static_cast<int>(rng.next_below(n_prov));
        }
        try {
            const Panel resampled = resample_panel(panel, by_province, result.provinces, rep.draw);
            const CompiledDesign design = compile(resampled, spec);
            const FitResult fit = fit_model(design, reml_options);
            if (!fit.converged) {
                rep.error = "variance-ratio search did not converge";
                return rep;
            }
            rep.converged = true;
            rep.theta = fit.theta;
            for (const auto& term : climate_term_names()) {
                rep.climate_beta.push_back(fit.coefficient(term));
            }
            rep.impact.resize(n_prov);
            for (std::size_t pr = 0; pr < n_prov; ++pr) {
                const Trajectory traj =
                    project_impact(fit, paths, historical, baseline, result.provinces[pr],
                                   options.horizon_year);
                for (const auto& pt : traj.points) rep.impact[pr].push_back(pt.pct_impact);
            }
            rep.ok = true;
        } catch (const std::exception& ex) {
            rep.ok = false;
            rep.error = ex.what();
        }
        return rep;
    };

    const int threads = std::max(1, options.threads);
    if (threads == 1) {
        for (int i = 0; i < options.replicates; ++i) {
            result.detail[static_cast<std::size_t>(i)] = run_replicate(i);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&]() {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= options.replicates) break;
                    result.detail[static_cast<std::size_t>(i)] = run_replicate(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    for (const auto& rep : result.detail) {
        if (!rep.ok) ++result.failures;
    }
    const double failure_rate =
        static_cast<double>(result.failures) / static_cast<double>(options.replicates);
    if (failure_rate > options.max_failure_rate) {
        throw NumericError("bootstrap failure rate " + format_double(failure_rate) +
                           " exceeds the allowed " + format_double(options.max_failure_rate));
    }
    if (result.failures > 0) {
        result.warnings.push_back(std::to_string(result.failures) + " of " +
                                  std::to_string(options.replicates) +
                                  " replicates failed and were excluded");
    }

    const std::size_t n_years = result.years.size();
    result.lower.assign(n_prov, std::vector<double>(n_years, 0.0));
    result.median.assign(n_prov, std::vector<double>(n_years, 0.0));
    result.upper.assign(n_prov, std::vector<double>(n_years, 0.0));
    std::vector<double> values;
    for (std::size_t pr = 0; pr < n_prov; ++pr) {
        for (std::size_t yi = 0; yi < n_years; ++yi) {
            values.clear();
            for (const auto& rep : result.detail) {
                if (rep.ok) values.push_back(rep.impact[pr][yi]);
            }
            if (values.empty()) {
                throw NumericError("no successful replicates available for bands");
            }
            result.lower[pr][yi] = quantile_type7(values, 0.025);
            result.median[pr][yi] = quantile_type7(values, 0.5);
            result.upper[pr][yi] = quantile_type7(values, 0.975);
        }
    }
    return result;
}

CsvTable bootstrap_bands_csv(const BootstrapResult& result)
{
    CsvTable csv({"scenario", "model", "province", "year", "lower", "median", "upper"});
    for (std::size_t pr = 0; pr < result.provinces.size(); ++pr) {
        for (std::size_t yi = 0; yi < result.years.size(); ++yi) {
            csv.add_row({std::string(scenario_name(result.scenario)), result.model,
                         result.provinces[pr], std::to_string(result.years[yi]),
                         format_double(result.lower[pr][yi]), format_double(result.median[pr][yi]),
                         format_double(result.upper[pr][yi])});
        }
    }
    return csv;
}

CsvTable bootstrap_coefficients_csv(const BootstrapResult& result)
{
    std::vector<std::string> header = {"replicate", "ok"};
    for (const auto& term : climate_term_names()) header.push_back(term);
    CsvTable csv(header);
    for (const auto& rep : result.detail) {
        std::vector<std::string> row = {std::to_string(rep.index), rep.ok ? "1" : "0"};
        for (std::size_t k = 0; k < climate_term_names().size(); ++k) {
            row.push_back(rep.ok ? format_double(rep.climate_beta[k]) : "");
        }
        csv.add_row(row);
    }
    return csv;
}

}  // namespace panelclim
