#include "panelclim/infer.hpp"

#include "panelclim/stats.hpp"
#include "panelclim/util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace panelclim {

namespace {

// Symmetric inverse square root via eigendecomposition. Eigenvalues below
// drop_tol are zeroed (pseudo-inverse) and reported through the flag.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& m, double drop_tol, bool* dropped)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success) {
        throw NumericError("eigendecomposition failed while forming matrix inverse square root");
    }
    Eigen::VectorXd inv(eig.eigenvalues().size());
    for (Eigen::Index i = 0; i < inv.size(); ++i) {
        const double lambda = eig.eigenvalues()(i);
        if (lambda <= drop_tol) {
            inv(i) = 0.0;
            if (dropped != nullptr) *dropped = true;
        } else {
            inv(i) = 1.0 / std::sqrt(lambda);
        }
    }
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

RobustVcov cr2_vcov(const CompiledDesign& design, const FitResult& fit)
{
    const int n = design.n();
    const int p = design.p();
    if (fit.beta.size() != p) {
        throw ConfigError("fit and design disagree on the number of coefficients");
    }

    RobustVcov rv;
    rv.cluster_count = static_cast<int>(design.cluster_levels.size());
    if (rv.cluster_count < 2) {
        throw DataError("cluster-robust covariance needs at least two clusters, got " +
                        std::to_string(rv.cluster_count));
    }

    // Whiten through the fitted composite covariance so the correction
    // factors see (approximately) uncorrelated unit-variance errors.
    Eigen::VectorXd resid = design.y - design.X * fit.beta;
    bool whitened = false;
    for (double t : fit.theta) whitened = whitened || t > 0.0;
    if (whitened) {
        Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
        std::size_t used = 0;
        for (const auto& b : design.blocks) {
            // Blocks dropped during fitting carry no ratio; match by label.
            if (used < fit.block_labels.size() && fit.block_labels[used] == b.label) {
                const double t = fit.theta[used];
                ++used;
                if (t > 0.0) v.noalias() += t * b.Z * b.Z.transpose();
            }
        }
        const Eigen::MatrixXd w = inverse_sqrt(v, 1e-14, nullptr);
        rv.xtilde = w * design.X;
        resid = w * resid;
    } else {
        rv.xtilde = design.X;
    }

    Eigen::LLT<Eigen::MatrixXd> llt(rv.xtilde.transpose() * rv.xtilde);
    if (llt.info() != Eigen::Success) {
        throw NumericError("whitened cross-product matrix is not positive definite");
    }
    rv.bread = llt.solve(Eigen::MatrixXd::Identity(p, p));

    rv.cluster_rows.assign(design.cluster_levels.size(), {});
    for (int i = 0; i < n; ++i) {
        rv.cluster_rows[static_cast<std::size_t>(design.cluster_of_row[static_cast<std::size_t>(i)])]
            .push_back(i);
    }

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
    rv.adjust.reserve(rv.cluster_rows.size());
    for (const auto& rows : rv.cluster_rows) {
        const int ng = static_cast<int>(rows.size());
        if (ng == 0) throw DataError("empty cluster encountered in robust covariance");
        Eigen::MatrixXd xg(ng, p);
        Eigen::VectorXd eg(ng);
        for (int i = 0; i < ng; ++i) {
            xg.row(i) = rv.xtilde.row(rows[static_cast<std::size_t>(i)]);
            eg(i) = resid(rows[static_cast<std::size_t>(i)]);
        }
        Eigen::MatrixXd leverage = Eigen::MatrixXd::Identity(ng, ng) - xg * rv.bread * xg.transpose();
        bool dropped = false;
        Eigen::MatrixXd ag = inverse_sqrt(leverage, 1e-12, &dropped);
        if (dropped) rv.pseudo_inverse_used = true;
        const Eigen::VectorXd sg = xg.transpose() * (ag * eg);
        meat.noalias() += sg * sg.transpose();
        rv.adjust.push_back(std::move(ag));
    }
    if (rv.pseudo_inverse_used) {
        rv.warnings.push_back(
            "near-singular cluster leverage adjustment; pseudo-inverse applied");
    }
    rv.vcov = rv.bread * meat * rv.bread;

    rv.df.resize(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
        Eigen::VectorXd contrast = Eigen::VectorXd::Zero(p);
        contrast(j) = 1.0;
        rv.df[static_cast<std::size_t>(j)] = satterthwaite_df(rv, contrast);
    }
    return rv;
}

double satterthwaite_df(const RobustVcov& rv, const Eigen::VectorXd& contrast)
{
    const Eigen::Index n = rv.xtilde.rows();
    const std::size_t n_clusters = rv.cluster_rows.size();
    const Eigen::VectorXd mc = rv.bread * contrast;

    // One influence vector per cluster; the degrees of freedom follow from
    // the spectrum of their Gram matrix.
    Eigen::MatrixXd w(n, static_cast<Eigen::Index>(n_clusters));
    w.setZero();
    for (std::size_t g = 0; g < n_clusters; ++g) {
        const auto& rows = rv.cluster_rows[g];
        const int ng = static_cast<int>(rows.size());
        Eigen::MatrixXd xg(ng, rv.xtilde.cols());
        for (int i = 0; i < ng; ++i) {
            xg.row(i) = rv.xtilde.row(rows[static_cast<std::size_t>(i)]);
        }
        const Eigen::VectorXd vg = rv.adjust[g] * (xg * mc);
        Eigen::VectorXd embedded = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < ng; ++i) embedded(rows[static_cast<std::size_t>(i)]) = vg(i);
        // Project out the regression space: w_g = (I - H) embedded.
        w.col(static_cast<Eigen::Index>(g)) =
            embedded - rv.xtilde * (rv.bread * (rv.xtilde.transpose() * embedded));
    }
    const Eigen::MatrixXd gram = w.transpose() * w;
    const double trace = gram.trace();
    const double frob2 = gram.squaredNorm();
    if (!(frob2 > 0.0)) {
        throw NumericError("degenerate influence structure; degrees of freedom undefined");
    }
    return trace * trace / frob2;
}

std::vector<MarginalEffect> average_marginal_effects(const FitResult& fit, const RobustVcov& rv,
                                                     const CompiledDesign& design, double level)
{
    if (!(level > 0.0 && level < 1.0)) {
        throw ConfigError("confidence level must lie strictly between 0 and 1");
    }
    const int p = design.p();
    std::vector<MarginalEffect> out;
    out.reserve(8);

    for (std::size_t term = 0; term < 8; ++term) {
        const std::string& name = climate_term_names()[term];
        const bool is_precip = term >= 4;
        const std::string season(season_token(static_cast<Season>(term % 4)));
        const std::string partner = is_precip ? "temp_" + season : "precip_" + season;

        const int col_lin = design.column(name);
        if (col_lin < 0) {
            throw ConfigError("design is missing climate regressor '" + name + "'");
        }
        const int col_sq = design.column(name + "_sq");
        const int col_txp = design.column("txp_" + season);
        const int col_partner = design.column(partner);

        // Gradient of the average derivative with respect to the
        // coefficient vector; linear in beta, so the delta method is exact.
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
        grad(col_lin) = 1.0;
        if (col_sq >= 0) grad(col_sq) = 2.0 * design.X.col(col_lin).mean();
        if (col_txp >= 0) {
            if (col_partner < 0) {
                throw ConfigError("design has interaction but no partner term '" + partner + "'");
            }
            grad(col_txp) = design.X.col(col_partner).mean();
        }

        MarginalEffect eff;
        eff.variable = name;
        eff.display = climate_display_name(name);
        eff.estimate = grad.dot(fit.beta);
        eff.se = std::sqrt(grad.dot(rv.vcov * grad));
        eff.df = satterthwaite_df(rv, grad);
        if (is_precip) {
            // Design carries precipitation anomalies as fractions; report
            // per percentage point.
            eff.estimate /= 100.0;
            eff.se /= 100.0;
        }
        eff.t_stat = eff.se > 0.0 ? eff.estimate / eff.se : 0.0;
        eff.p_value = two_sided_p_value(eff.t_stat, eff.df);
        const double crit = student_t_quantile(0.5 + level / 2.0, eff.df);
        eff.ci_low = eff.estimate - crit * eff.se;
        eff.ci_high = eff.estimate + crit * eff.se;
        out.push_back(std::move(eff));
    }
    return out;
}

std::string significance_stars(double p_value)
{
    if (p_value < 0.001) return "***";
    if (p_value < 0.01) return "**";
    if (p_value < 0.05) return "*";
    if (p_value < 0.1) return ".";
    return "";
}

namespace {

// Scale factor from design units to display units: precipitation enters the
// design as a fraction but is reported per percentage point.
double display_scale(const std::string& term)
{
    const bool has_precip = term.rfind("precip_", 0) == 0;
    const bool squared = term.size() > 3 && term.compare(term.size() - 3, 3, "_sq") == 0;
    const bool interaction = term.rfind("txp_", 0) == 0;
    if (interaction) return 1.0 / 100.0;
    if (has_precip) return squared ? 1.0 / 10000.0 : 1.0 / 100.0;
    return 1.0;
}

std::vector<std::string> report_term_order()
{
    std::vector<std::string> order;
    for (std::size_t t = 0; t < 4; ++t) order.push_back(climate_term_names()[t]);
    for (std::size_t t = 0; t < 4; ++t) order.push_back(climate_term_names()[t] + "_sq");
    for (std::size_t t = 4; t < 8; ++t) order.push_back(climate_term_names()[t]);
    for (std::size_t t = 4; t < 8; ++t) order.push_back(climate_term_names()[t] + "_sq");
    for (Season s : kSeasons) order.push_back("txp_" + std::string(season_token(s)));
    order.push_back("pcgr_lag");
    return order;
}

}  // namespace

ReportTable report_table(const std::vector<FitResult>& fits, const std::vector<RobustVcov>& vcovs)
{
    if (fits.size() != vcovs.size()) {
        throw ConfigError("report needs one covariance per fitted model");
    }
    if (fits.empty()) throw ConfigError("report needs at least one fitted model");

    ReportTable table;
    table.term_order = report_term_order();
    for (std::size_t m = 0; m < fits.size(); ++m) {
        const FitResult& fit = fits[m];
        const RobustVcov& rv = vcovs[m];
        ReportColumn col;
        col.model = fit.model_name;
        col.aic = fit.aic;
        col.bic = fit.bic;
        col.loglik_reml = fit.loglik_reml;
        col.n = fit.n;
        for (const auto& term : table.term_order) {
            auto it = std::find(fit.x_names.begin(), fit.x_names.end(), term);
            if (it == fit.x_names.end()) continue;
            const int j = static_cast<int>(it - fit.x_names.begin());
            const double scale = display_scale(term);
            ReportEntry entry;
            entry.present = true;
            entry.estimate = fit.beta(j) * scale;
            entry.se = rv.se(j) * scale;
            entry.df = rv.df[static_cast<std::size_t>(j)];
            const double t = entry.se > 0.0 ? entry.estimate / entry.se : 0.0;
            entry.p_value = two_sided_p_value(t, entry.df);
            entry.stars = significance_stars(entry.p_value);
            col.terms[term] = entry;
        }
        table.columns.push_back(std::move(col));
    }
    return table;
}

CsvTable ReportTable::to_csv() const
{
    std::vector<std::string> header = {"term"};
    for (const auto& col : columns) header.push_back(col.model);
    CsvTable csv(header);

    for (const auto& term : term_order) {
        bool any = false;
        for (const auto& col : columns) any = any || col.terms.count(term) > 0;
        if (!any) continue;
        std::vector<std::string> est_row = {climate_display_name(term)};
        std::vector<std::string> se_row = {climate_display_name(term) + " (SE)"};
        for (const auto& col : columns) {
            auto it = col.terms.find(term);
            if (it == col.terms.end()) {
                est_row.push_back("");
                se_row.push_back("");
            } else {
                est_row.push_back(format_double(it->second.estimate) + it->second.stars);
                se_row.push_back("(" + format_double(it->second.se) + ")");
            }
        }
        csv.add_row(est_row);
        csv.add_row(se_row);
    }

    const auto stat_row = [&](const std::string& label, auto getter) {
        std::vector<std::string> row = {label};
        for (const auto& col : columns) row.push_back(format_double(getter(col)));
        csv.add_row(row);
    };
    stat_row("AIC", [](const ReportColumn& c) { return c.aic; });
    stat_row("BIC", [](const ReportColumn& c) { return c.bic; });
    stat_row("Restricted log likelihood", [](const ReportColumn& c) { return c.loglik_reml; });
    stat_row("Observations", [](const ReportColumn& c) { return static_cast<double>(c.n); });
    return csv;
}

nlohmann::json ReportTable::to_json() const
{
    nlohmann::json models = nlohmann::json::array();
    for (const auto& col : columns) {
        nlohmann::json terms = nlohmann::json::object();
        for (const auto& [term, entry] : col.terms) {
            terms[term] = {{"estimate", entry.estimate}, {"se", entry.se},
                           {"df", entry.df},            {"p_value", entry.p_value},
                           {"stars", entry.stars}};
        }
        models.push_back({{"model", col.model},
                          {"aic", col.aic},
                          {"bic", col.bic},
                          {"loglik_reml", col.loglik_reml},
                          {"n", col.n},
                          {"terms", terms}});
    }
    return nlohmann::json{{"models", models}};
}

CsvTable margins_csv(const std::vector<MarginalEffect>& effects, const std::string& model)
{
    CsvTable csv({"model", "variable", "display", "estimate", "se", "df", "t", "p_value",
                  "ci_low", "ci_high", "stars"});
    for (const auto& e : effects) {
        csv.add_row({model, e.variable, e.display, format_double(e.estimate), format_double(e.se),
                     format_double(e.df), format_double(e.t_stat), format_double(e.p_value),
                     format_double(e.ci_low), format_double(e.ci_high),
                     significance_stars(e.p_value)});
    }
    return csv;
}

}  // namespace panelclim
