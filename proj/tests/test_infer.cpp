#include "panelclim/infer.hpp"
#include "panelclim/rng.hpp"
#include "panelclim/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

using namespace panelclim;

namespace {

SynthPanel climate_panel(const char* preset, std::uint64_t seed, YearRange years = {1998, 2017},
                         std::map<std::string, double> theta = {})
{
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.spec = ModelSpec::preset(preset);
    cfg.years = years;
    cfg.beta = {{"temp_spring", -0.004},
                {"temp_winter", 0.006},
                {"precip_summer", 0.02},
                {"temp_spring_sq", -0.001},
                {"precip_winter_sq", 0.005},
                {"txp_spring", 0.01},
                {"txp_fall", -0.008}};
    cfg.theta = std::move(theta);
    return generate_panel(cfg);
}

// Intercept-only balanced clusters with independent errors; no random blocks.
CompiledDesign balanced_means(int groups, int per_group, std::uint64_t seed)
{
    const int n = groups * per_group;
    CompiledDesign d;
    d.spec_name = "means";
    d.y.resize(n);
    d.X = Eigen::MatrixXd::Ones(n, 1);
    d.x_names = {"(Intercept)"};
    Rng rng = Rng::for_stream(seed, 0);
    for (int g = 0; g < groups; ++g) {
        d.cluster_levels.push_back("G" + std::to_string(g));
        for (int i = 0; i < per_group; ++i) {
            d.cluster_of_row.push_back(g);
            d.y(g * per_group + i) = 0.5 + rng.next_normal();
        }
    }
    return d;
}

void check_against_oracle(const CompiledDesign& d, const FitResult& fit)
{
    const RobustVcov rv = cr2_vcov(d, fit);
    const oracle::DenseRobust ref = oracle::cr2(d, fit.beta, oracle::theta_for_design(d, fit));

    CHECK((rv.vcov - ref.vcov).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE(rv.df.size() == ref.df.size());
    for (std::size_t j = 0; j < ref.df.size(); ++j) {
        CHECK(rv.df[j] == doctest::Approx(ref.df[j]).epsilon(1e-9));
    }

    // Structural sanity: symmetry, near positive semidefiniteness, df bounds.
    CHECK((rv.vcov - rv.vcov.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rv.vcov);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    for (double df : rv.df) {
        CHECK(df > 0.0);
        CHECK(df <= rv.cluster_count - 1 + 1e-6);
    }
}

}  // namespace

TEST_CASE("cluster-robust covariance matches the dense oracle for least squares")
{
    const SynthPanel sp = climate_panel("m1", 301);
    const CompiledDesign d = compile(sp.panel, ModelSpec::preset("m1"));
    check_against_oracle(d, fit_ols(d));
}

TEST_CASE("cluster-robust covariance matches the dense oracle on the whitened scale")
{
    const SynthPanel sp = climate_panel("m5", 311, {1998, 2017}, {{"year", 2.0}});
    const CompiledDesign d = compile(sp.panel, ModelSpec::preset("m5"));
    const FitResult fit = fit_reml(d);
    REQUIRE(fit.theta[0] > 0.0);
    check_against_oracle(d, fit);
}

TEST_CASE("satterthwaite df is scale invariant and hits G-1 for balanced means")
{
    const CompiledDesign d = balanced_means(10, 17, 5);
    const FitResult fit = fit_ols(d);
    const RobustVcov rv = cr2_vcov(d, fit);

    Eigen::VectorXd c = Eigen::VectorXd::Zero(1);
    c(0) = 1.0;
    const double df = satterthwaite_df(rv, c);
    CHECK(df == doctest::Approx(9.0).epsilon(1e-9));
    CHECK(satterthwaite_df(rv, 10.0 * c) == doctest::Approx(df).epsilon(1e-12));
    CHECK_THROWS_AS(satterthwaite_df(rv, Eigen::VectorXd::Zero(1)), NumericError);
}

TEST_CASE("fewer than two clusters is an error")
{
    CompiledDesign d = balanced_means(1, 30, 6);
    const FitResult fit = fit_ols(d);
    CHECK_THROWS_AS(cr2_vcov(d, fit), DataError);
}

TEST_CASE("robust and classical errors agree under homoskedastic independence")
{
    // Without cluster structure in the generator the robust and classical
    // errors estimate the same quantity. Any single ten-cluster draw is
    // noisy, so compare the ratio averaged over seeds and terms.
    double ratio_sum = 0.0;
    int count = 0;
    for (std::uint64_t seed : {321, 322, 323, 324, 325}) {
        const SynthPanel sp = climate_panel("m3", seed, {1821, 2020});
        const CompiledDesign d = compile(sp.panel, ModelSpec::preset("m3"));
        REQUIRE(d.n() == 2000);
        const FitResult fit = fit_ols(d);
        const RobustVcov rv = cr2_vcov(d, fit);
        const Eigen::MatrixXd classical = fit.sigma2_eps * (d.X.transpose() * d.X).inverse();
        for (const auto& term : climate_term_names()) {
            const int j = d.column(term);
            ratio_sum += rv.se(j) / std::sqrt(classical(j, j));
            ++count;
        }
    }
    const double mean_ratio = ratio_sum / count;
    CHECK(mean_ratio > 0.85);
    CHECK(mean_ratio < 1.15);
}

TEST_CASE("renaming provinces changes no climate inference")
{
    const SynthPanel sp = climate_panel("m5", 331, {1998, 2017}, {{"year", 1.0}});
    const CompiledDesign base = compile(sp.panel, ModelSpec::preset("m5"));
    const FitResult fit1 = fit_reml(base);
    const RobustVcov rv1 = cr2_vcov(base, fit1);

    // "AB" becomes "ZA": a different reference province and level order.
    SynthPanel renamed = sp;
    for (auto& row : renamed.panel.rows) {
        if (row.province == "AB") {
            row.province = "ZA";
            row.cluster = "ZA";
        }
    }
    const CompiledDesign moved = compile(renamed.panel, ModelSpec::preset("m5"));
    const FitResult fit2 = fit_reml(moved);
    const RobustVcov rv2 = cr2_vcov(moved, fit2);

    REQUIRE(fit1.theta.size() == 1);
    REQUIRE(fit2.theta.size() == 1);
    CHECK(fit2.theta[0] == doctest::Approx(fit1.theta[0]).epsilon(1e-8));
    for (const auto& term : climate_term_names()) {
        const int a = base.column(term);
        const int b = moved.column(term);
        CHECK(fit2.beta(b) == doctest::Approx(fit1.beta(a)).epsilon(1e-8));
        CHECK(rv2.se(b) == doctest::Approx(rv1.se(a)).epsilon(1e-6));
    }
}

TEST_CASE("marginal effects of a pure linear spec equal the coefficients")
{
    const SynthPanel sp = climate_panel("m1", 341);
    const CompiledDesign d = compile(sp.panel, ModelSpec::preset("m1"));
    const FitResult fit = fit_ols(d);
    const RobustVcov rv = cr2_vcov(d, fit);
    const auto effects = average_marginal_effects(fit, rv, d);
    REQUIRE(effects.size() == 8);

    for (const auto& e : effects) {
        const int j = d.column(e.variable);
        const bool precip = e.variable.rfind("precip_", 0) == 0;
        const double scale = precip ? 100.0 : 1.0;
        // Identical arithmetic, not merely close.
        CHECK(e.estimate == fit.beta(j) / scale);
        CHECK(e.se == rv.se(j) / scale);
        CHECK(e.df == doctest::Approx(rv.df[static_cast<std::size_t>(j)]).epsilon(1e-12));
        CHECK(e.ci_low < e.estimate);
        CHECK(e.ci_high > e.estimate);
        CHECK(e.p_value >= 0.0);
        CHECK(e.p_value <= 1.0);
    }
}

TEST_CASE("marginal effects match finite differences for curved specs")
{
    for (const char* preset : {"m2", "m2s", "m5s"}) {
        CAPTURE(preset);
        std::map<std::string, double> theta;
        if (std::string(preset) == "m5s") theta["year"] = 1.0;
        const SynthPanel sp = climate_panel(preset, 351, {1998, 2017}, std::move(theta));
        const CompiledDesign d = compile(sp.panel, ModelSpec::preset(preset));
        const FitResult fit = fit_model(d);
        const RobustVcov rv = cr2_vcov(d, fit);
        const auto effects = average_marginal_effects(fit, rv, d);
        REQUIRE(effects.size() == 8);
        for (const auto& e : effects) {
            const bool precip = e.variable.rfind("precip_", 0) == 0;
            const double fd = oracle::fd_margin(fit, d, e.variable) / (precip ? 100.0 : 1.0);
            CHECK(std::abs(e.estimate - fd) < 1e-6);
        }
    }
}

TEST_CASE("quadratic marginal effect follows the chain rule at the sample mean")
{
    const SynthPanel sp = climate_panel("m2", 361);
    const CompiledDesign d = compile(sp.panel, ModelSpec::preset("m2"));
    const FitResult fit = fit_ols(d);
    const RobustVcov rv = cr2_vcov(d, fit);
    const auto effects = average_marginal_effects(fit, rv, d);

    const int lin = d.column("temp_spring");
    const int sq = d.column("temp_spring_sq");
    const double mean_t = d.X.col(lin).mean();
    const double expected = fit.beta(lin) + 2.0 * mean_t * fit.beta(sq);
    CHECK(effects[0].variable == "temp_spring");
    CHECK(effects[0].estimate == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("finite differences of a cubic converge at second order")
{
    // Sanity check of the oracle itself: halving the step quarters the error.
    const auto f = [](double x) { return x * x * x; };
    const double d1 = oracle::central_difference(f, 1.0, 1e-2);
    const double d2 = oracle::central_difference(f, 1.0, 5e-3);
    const double e1 = std::abs(d1 - 3.0);
    const double e2 = std::abs(d2 - 3.0);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("significance stars use the conventional thresholds")
{
    CHECK(significance_stars(0.0009) == "***");
    CHECK(significance_stars(0.001) == "**");
    CHECK(significance_stars(0.009) == "**");
    CHECK(significance_stars(0.01) == "*");
    CHECK(significance_stars(0.049) == "*");
    CHECK(significance_stars(0.05) == ".");
    CHECK(significance_stars(0.099) == ".");
    CHECK(significance_stars(0.1) == "");
    CHECK(significance_stars(0.7) == "");
}

TEST_CASE("report table carries estimates, bracketed errors, and fit rows")
{
    const SynthPanel sp = climate_panel("m1", 371);
    const CompiledDesign d1 = compile(sp.panel, ModelSpec::preset("m1"));
    const CompiledDesign d2 = compile(sp.panel, ModelSpec::preset("m2"));
    const FitResult f1 = fit_ols(d1);
    const FitResult f2 = fit_ols(d2);
    const RobustVcov v1 = cr2_vcov(d1, f1);
    const RobustVcov v2 = cr2_vcov(d2, f2);

    const ReportTable table = report_table({f1, f2}, {v1, v2});
    REQUIRE(table.columns.size() == 2);
    CHECK(table.columns[0].model == "m1");
    // Temperature block first, then precipitation, interactions, and the lag.
    CHECK(table.term_order.front() == "temp_spring");
    CHECK(table.term_order.back() == "pcgr_lag");
    for (const auto& term : table.term_order) {
        CHECK((term.rfind("temp_", 0) == 0 || term.rfind("precip_", 0) == 0 ||
               term.rfind("txp_", 0) == 0 || term == "pcgr_lag"));
    }
    // m1 lacks quadratic terms; m2 has them.
    CHECK_FALSE(table.columns[0].terms.count("temp_spring_sq"));
    CHECK(table.columns[1].terms.count("temp_spring_sq") == 1);

    const CsvTable csv = table.to_csv();
    REQUIRE(csv.header().size() == 3);  // term, m1, m2
    bool saw_se_row = false;
    bool saw_bic = false;
    bool saw_obs = false;
    for (std::size_t i = 0; i < csv.rows(); ++i) {
        const std::string& label = csv.cell(i, 0);
        if (label.find("(SE)") != std::string::npos) saw_se_row = true;
        if (label == "BIC") saw_bic = true;
        if (label == "Observations") saw_obs = true;
    }
    CHECK(saw_se_row);
    CHECK(saw_bic);
    CHECK(saw_obs);

    const auto j = table.to_json();
    CHECK(j.contains("models"));
    CHECK(j["models"].size() == 2);
}

TEST_CASE("margins table reports display units per percentage point")
{
    const SynthPanel sp = climate_panel("m1", 381);
    const CompiledDesign d = compile(sp.panel, ModelSpec::preset("m1"));
    const FitResult fit = fit_ols(d);
    const RobustVcov rv = cr2_vcov(d, fit);
    const auto effects = average_marginal_effects(fit, rv, d);
    const CsvTable csv = margins_csv(effects, "m1");
    REQUIRE(csv.rows() == 8);
    CHECK(csv.cell(0, csv.column("model")) == "m1");
    CHECK(csv.cell(0, csv.column("variable")) == "temp_spring");
    CHECK(csv.has_column("ci_low"));
    CHECK(csv.has_column("stars"));
}
