#pragma once

#include "panelclim/panel.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace panelclim {

struct FitResult {
    std::string model_name;
    Eigen::VectorXd beta;
    std::vector<std::string> x_names;
    double sigma2_eps = 0.0;            // residual variance on the REML scale
    std::vector<double> theta;          // variance ratios, one per random block
    std::vector<std::string> block_labels;
    Eigen::VectorXd random_effects;     // predicted block effects, stacked
    std::vector<std::string> random_effect_names;
    double loglik_ml = 0.0;
    double loglik_reml = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    int n = 0;
    int p = 0;
    bool converged = true;
    bool degenerate = false;  // residual sum of squares numerically zero
    std::vector<std::string> warnings;

    double coefficient(const std::string& name) const;  // throws if absent
    bool has_coefficient(const std::string& name) const;
};

struct RemlOptions {
    double theta_max = 1e6;
    double tol_loglik = 1e-10;
    double tol_theta = 1e-8;  // relative coordinate movement
    int max_sweeps = 200;
    // Uniform starting ratios; each value seeds every coordinate.
    std::vector<double> start_scales = {0.01, 1.0, 100.0};
    // Full ratio vectors tried in addition, e.g. a previous optimum when
    // refitting resampled data.
    std::vector<std::vector<double>> warm_starts;
};

// Ordinary least squares via column-pivoted QR; used when the design has no
// random blocks, and as the boundary case of the mixed fit.
FitResult fit_ols(const CompiledDesign& design);

// Restricted maximum likelihood over the profiled variance-ratio scale.
// Each ratio is sigma_k^2 / sigma_eps^2; residual variance and coefficients
// are recovered in closed form at the optimum.
FitResult fit_reml(const CompiledDesign& design, const RemlOptions& options = {});

// Evaluates the profiled fit at a caller-supplied ratio vector without
// optimizing; used to compare candidate ratios on one dataset.
FitResult fit_at_theta(const CompiledDesign& design, const std::vector<double>& theta);

// Dispatches to fit_ols or fit_reml depending on whether blocks are present.
FitResult fit_model(const CompiledDesign& design, const RemlOptions& options = {});

// Restricted log likelihood as a function of the ratio vector alone.
double profiled_reml_loglik(const CompiledDesign& design, const std::vector<double>& theta);

}  // namespace panelclim
