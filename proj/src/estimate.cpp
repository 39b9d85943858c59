#include "panelclim/estimate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace panelclim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Residual sums below this fraction of the response energy are treated as an
// exact fit; the likelihood is then unbounded and flagged instead of trusted.
constexpr double kDegenerateRatio = 1e-12;

double floored_log(double v) { return std::log(std::max(v, 1e-300)); }

// Sufficient statistics: every profiled evaluation works from these instead
// of the raw n-row matrices, so optimizer cost is independent of n.
struct CrossProducts {
    int n = 0;
    int p = 0;
    int q = 0;
    Eigen::MatrixXd XtX;
    Eigen::MatrixXd ZtX;
    Eigen::MatrixXd ZtZ;
    Eigen::VectorXd Xty;
    Eigen::VectorXd Zty;
    double yty = 0.0;
    std::vector<int> block_start;  // column offset of each block within Z
    std::vector<int> block_size;
    std::vector<std::string> block_labels;
    std::vector<std::string> effect_names;
};

CrossProducts make_crossproducts(const CompiledDesign& design,
                                 const std::vector<const RandomBlock*>& blocks)
{
    CrossProducts cp;
    cp.n = design.n();
    cp.p = design.p();
    for (const auto* b : blocks) {
        cp.block_start.push_back(cp.q);
        cp.block_size.push_back(static_cast<int>(b->Z.cols()));
        cp.block_labels.push_back(b->label);
        cp.effect_names.insert(cp.effect_names.end(), b->col_names.begin(), b->col_names.end());
        cp.q += static_cast<int>(b->Z.cols());
    }
    Eigen::MatrixXd Z(cp.n, cp.q);
    {
        int col = 0;
        for (const auto* b : blocks) {
            Z.middleCols(col, b->Z.cols()) = b->Z;
            col += static_cast<int>(b->Z.cols());
        }
    }
    cp.XtX = design.X.transpose() * design.X;
    cp.Xty = design.X.transpose() * design.y;
    cp.ZtX = Z.transpose() * design.X;
    cp.Zty = Z.transpose() * design.y;
    cp.ZtZ = Z.transpose() * Z;
    cp.yty = design.y.squaredNorm();
    return cp;
}

struct ProfileEval {
    double loglik_reml = 0.0;
    double loglik_ml = 0.0;
    double sigma2_reml = 0.0;
    double sigma2_ml = 0.0;
    double q_form = 0.0;
    Eigen::VectorXd beta;
    Eigen::VectorXd u;  // predicted random effects, original scale
    bool degenerate = false;
};

// Solves the mixed normal equations for a fixed ratio vector through one
// Cholesky of the q x q augmented system plus one of the p x p reduced
// fixed-effect system, and evaluates both likelihood variants at their
// closed-form variance optima.
ProfileEval profile(const CrossProducts& cp, const std::vector<double>& theta, bool want_effects)
{
    const int n = cp.n;
    const int p = cp.p;
    const int q = cp.q;

    Eigen::VectorXd scale(q);
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const double s = std::sqrt(theta[k]);
        scale.segment(cp.block_start[k], cp.block_size[k]).setConstant(s);
    }

    double logdet_v = 0.0;
    double logdet_s = 0.0;
    Eigen::VectorXd beta;
    double q_form = 0.0;
    Eigen::VectorXd u;

    if (q == 0) {
        Eigen::LLT<Eigen::MatrixXd> llt_x(cp.XtX);
        if (llt_x.info() != Eigen::Success) {
            throw NumericError("fixed-effect normal matrix is not positive definite");
        }
        beta = llt_x.solve(cp.Xty);
        q_form = cp.yty - beta.dot(cp.Xty);
        logdet_s = 2.0 * llt_x.matrixL().toDenseMatrix().diagonal().array().log().sum();
    } else {
        Eigen::MatrixXd A = scale.asDiagonal() * cp.ZtZ * scale.asDiagonal();
        A.diagonal().array() += 1.0;
        Eigen::LLT<Eigen::MatrixXd> llt_a(A);
        if (llt_a.info() != Eigen::Success) {
            throw NumericError("augmented random-effect system is not positive definite");
        }
        const Eigen::MatrixXd szt_x = scale.asDiagonal() * cp.ZtX;
        const Eigen::VectorXd szt_y = scale.asDiagonal() * cp.Zty;
        const Eigen::MatrixXd r_zx = llt_a.matrixL().solve(szt_x);
        const Eigen::VectorXd c_z = llt_a.matrixL().solve(szt_y);

        const Eigen::MatrixXd s_x = cp.XtX - r_zx.transpose() * r_zx;
        Eigen::LLT<Eigen::MatrixXd> llt_x(s_x);
        if (llt_x.info() != Eigen::Success) {
            throw NumericError("whitened fixed-effect system is not positive definite");
        }
        const Eigen::VectorXd t = cp.Xty - r_zx.transpose() * c_z;
        beta = llt_x.solve(t);
        q_form = cp.yty - c_z.squaredNorm() - beta.dot(t);
        logdet_v = 2.0 * llt_a.matrixL().toDenseMatrix().diagonal().array().log().sum();
        logdet_s = 2.0 * llt_x.matrixL().toDenseMatrix().diagonal().array().log().sum();

        if (want_effects) {
            const Eigen::VectorXd g =
                scale.asDiagonal() * (cp.Zty - cp.ZtX * beta);
            u = scale.asDiagonal() * llt_a.solve(g);
        }
    }

    ProfileEval ev;
    ev.beta = std::move(beta);
    ev.u = std::move(u);
    ev.q_form = std::max(q_form, 0.0);
    ev.degenerate = !(ev.q_form > kDegenerateRatio * cp.yty) || cp.yty <= 0.0;

    ev.sigma2_reml = ev.q_form / (n - p);
    ev.sigma2_ml = ev.q_form / n;
    ev.loglik_reml = -0.5 * ((n - p) * (floored_log(kTwoPi * ev.sigma2_reml) + 1.0) + logdet_v +
                             logdet_s);
    ev.loglik_ml = -0.5 * (n * (floored_log(kTwoPi * ev.sigma2_ml) + 1.0) + logdet_v);
    return ev;
}

void fill_information_criteria(FitResult& fit, int n_ratios)
{
    const double k = fit.p + n_ratios + 1;
    fit.aic = -2.0 * fit.loglik_ml + 2.0 * k;
    fit.bic = -2.0 * fit.loglik_ml + std::log(static_cast<double>(fit.n)) * k;
}

void check_inputs(const CompiledDesign& design)
{
    if (design.n() == 0) throw DataError("design has no rows");
    if (design.n() <= design.p()) {
        throw DataError("design has " + std::to_string(design.n()) + " rows but " +
                        std::to_string(design.p()) + " fixed-effect columns");
    }
    if (!design.X.allFinite() || !design.y.allFinite()) {
        throw DataError("design matrix or response contains non-finite values");
    }
    for (const auto& b : design.blocks) {
        if (!b.Z.allFinite()) {
            throw DataError("random-effect block '" + b.label + "' contains non-finite values");
        }
    }
}

// Minimizes f on [lo, hi] by golden-section search; f must already be known
// to attain its minimum inside the bracket.
double golden_minimize(const std::function<double(double)>& f, double lo, double hi)
{
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int iter = 0; iter < 80 && (b - a) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++iter) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double FitResult::coefficient(const std::string& name) const
{
    for (std::size_t i = 0; i < x_names.size(); ++i) {
        if (x_names[i] == name) return beta(static_cast<Eigen::Index>(i));
    }
    throw ConfigError("model '" + model_name + "' has no coefficient named '" + name + "'");
}

bool FitResult::has_coefficient(const std::string& name) const
{
    return std::find(x_names.begin(), x_names.end(), name) != x_names.end();
}

FitResult fit_ols(const CompiledDesign& design)
{
    check_inputs(design);
    const int n = design.n();
    const int p = design.p();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        throw NumericError("design matrix is rank deficient; cannot run least squares");
    }
    FitResult fit;
    fit.model_name = design.spec_name;
    fit.x_names = design.x_names;
    fit.n = n;
    fit.p = p;
    fit.beta = qr.solve(design.y);
    const Eigen::VectorXd resid = design.y - design.X * fit.beta;
    const double rss = resid.squaredNorm();
    const double yty = design.y.squaredNorm();
    fit.degenerate = !(rss > kDegenerateRatio * yty) || yty <= 0.0;
    fit.sigma2_eps = rss / (n - p);
    const double logdet_xtx =
        2.0 * qr.matrixQR().diagonal().head(p).array().abs().log().sum();
    fit.loglik_reml =
        -0.5 * ((n - p) * (floored_log(kTwoPi * fit.sigma2_eps) + 1.0) + logdet_xtx);
    fit.loglik_ml = -0.5 * (n * (floored_log(kTwoPi * rss / n) + 1.0));
    fill_information_criteria(fit, 0);
    if (fit.degenerate) {
        fit.warnings.push_back("residual variance is numerically zero; likelihood degenerate");
    }
    return fit;
}

FitResult fit_at_theta(const CompiledDesign& design, const std::vector<double>& theta)
{
    check_inputs(design);
    if (theta.size() != design.blocks.size()) {
        throw ConfigError("expected " + std::to_string(design.blocks.size()) +
                          " variance ratios, got " + std::to_string(theta.size()));
    }
    for (double v : theta) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError("variance ratios must be finite and non-negative");
        }
    }
    std::vector<const RandomBlock*> blocks;
    for (const auto& b : design.blocks) blocks.push_back(&b);
    const CrossProducts cp = make_crossproducts(design, blocks);
    const ProfileEval ev = profile(cp, theta, true);

    FitResult fit;
    fit.model_name = design.spec_name;
    fit.x_names = design.x_names;
    fit.n = cp.n;
    fit.p = cp.p;
    fit.beta = ev.beta;
    fit.sigma2_eps = ev.sigma2_reml;
    fit.theta = theta;
    fit.block_labels = cp.block_labels;
    fit.random_effects = ev.u;
    fit.random_effect_names = cp.effect_names;
    fit.loglik_ml = ev.loglik_ml;
    fit.loglik_reml = ev.loglik_reml;
    fit.degenerate = ev.degenerate;
    fill_information_criteria(fit, static_cast<int>(theta.size()));
    if (fit.degenerate) {
        fit.warnings.push_back("residual variance is numerically zero; likelihood degenerate");
    }
    return fit;
}

double profiled_reml_loglik(const CompiledDesign& design, const std::vector<double>& theta)
{
    check_inputs(design);
    std::vector<const RandomBlock*> blocks;
    for (const auto& b : design.blocks) blocks.push_back(&b);
    const CrossProducts cp = make_crossproducts(design, blocks);
    return profile(cp, theta, false).loglik_reml;
}

FitResult fit_reml(const CompiledDesign& design, const RemlOptions& options)
{
    check_inputs(design);

    // Blocks whose carrier is identically zero contribute nothing; drop them
    // so the optimizer does not wander along a flat direction.
    std::vector<const RandomBlock*> blocks;
    std::vector<std::string> drop_warnings;
    for (const auto& b : design.blocks) {
        if (b.Z.squaredNorm() == 0.0) {
            drop_warnings.push_back("random-effect block '" + b.label +
                                    "' is identically zero and was dropped");
        } else {
            blocks.push_back(&b);
        }
    }
    if (blocks.empty()) {
        FitResult fit = fit_ols(design);
        fit.warnings.insert(fit.warnings.end(), drop_warnings.begin(), drop_warnings.end());
        return fit;
    }

    const CrossProducts cp = make_crossproducts(design, blocks);
    const std::size_t n_ratios = blocks.size();

    const auto objective = [&](const std::vector<double>& theta) {
        return -profile(cp, theta, false).loglik_reml;
    };

    // Coarse log-spaced ladder scanned for every coordinate update; combined
    // with golden-section refinement on the bracketing interval this makes
    // each one-dimensional subproblem effectively global.
    std::vector<double> ladder = {0.0};
    for (int e = -8; e <= 6; ++e) {
        const double v = std::pow(10.0, e);
        if (v <= options.theta_max) ladder.push_back(v);
    }
    if (ladder.back() < options.theta_max) ladder.push_back(options.theta_max);

    std::vector<std::vector<double>> starts = options.warm_starts;
    for (double s : options.start_scales) {
        starts.emplace_back(n_ratios, std::min(s, options.theta_max));
    }
    if (starts.empty()) starts.emplace_back(n_ratios, 1.0);

    std::vector<double> best_theta;
    double best_value = std::numeric_limits<double>::infinity();
    bool any_converged = false;

    for (const auto& start : starts) {
        if (start.size() != n_ratios) {
            throw ConfigError("warm start has wrong number of variance ratios");
        }
        std::vector<double> theta = start;
        for (double& v : theta) v = std::clamp(v, 0.0, options.theta_max);
        double value = objective(theta);
        bool converged = false;
        for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
            const double value_before = value;
            double max_rel_move = 0.0;
            for (std::size_t k = 0; k < n_ratios; ++k) {
                const auto coord = [&](double x) {
                    std::vector<double> trial = theta;
                    trial[k] = x;
                    return objective(trial);
                };
                std::size_t best_idx = 0;
                double best_coord = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < ladder.size(); ++i) {
                    const double fx = coord(ladder[i]);
                    if (fx < best_coord) {
                        best_coord = fx;
                        best_idx = i;
                    }
                }
                const double lo = best_idx == 0 ? 0.0 : ladder[best_idx - 1];
                const double hi =
                    best_idx + 1 < ladder.size() ? ladder[best_idx + 1] : options.theta_max;
                double candidate = lo < hi ? golden_minimize(coord, lo, hi) : ladder[best_idx];
                if (coord(candidate) > best_coord) candidate = ladder[best_idx];
                max_rel_move = std::max(
                    max_rel_move, std::abs(candidate - theta[k]) / (1.0 + std::abs(theta[k])));
                theta[k] = candidate;
            }
            value = objective(theta);
            if (value_before - value < options.tol_loglik && max_rel_move < options.tol_theta) {
                converged = true;
                break;
            }
        }
        if (value < best_value) {
            best_value = value;
            best_theta = theta;
        }
        any_converged = any_converged || converged;
    }

    const ProfileEval ev = profile(cp, best_theta, true);

    FitResult fit;
    fit.model_name = design.spec_name;
    fit.x_names = design.x_names;
    fit.n = cp.n;
    fit.p = cp.p;
    fit.beta = ev.beta;
    fit.sigma2_eps = ev.sigma2_reml;
    fit.theta = best_theta;
    fit.block_labels = cp.block_labels;
    fit.random_effects = ev.u;
    fit.random_effect_names = cp.effect_names;
    fit.loglik_ml = ev.loglik_ml;
    fit.loglik_reml = ev.loglik_reml;
    fit.converged = any_converged;
    fit.degenerate = ev.degenerate;
    fit.warnings = drop_warnings;
    fill_information_criteria(fit, static_cast<int>(n_ratios));
    if (!fit.converged) {
        fit.warnings.push_back("variance-ratio search hit the sweep limit without converging");
    }
    if (fit.degenerate) {
        fit.warnings.push_back("residual variance is numerically zero; likelihood degenerate");
    }
    return fit;
}

FitResult fit_model(const CompiledDesign& design, const RemlOptions& options)
{
    if (design.blocks.empty()) return fit_ols(design);
    return fit_reml(design, options);
}

}  // namespace panelclim
