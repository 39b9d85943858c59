#pragma once

#include "panelclim/csv.hpp"
#include "panelclim/estimate.hpp"
#include "panelclim/panel.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace panelclim {

// Cluster-robust covariance with small-sample (leverage-corrected) cluster
// adjustments, plus everything needed to evaluate effective degrees of
// freedom for arbitrary coefficient contrasts afterwards.
struct RobustVcov {
    Eigen::MatrixXd vcov;    // p x p
    std::vector<double> df;  // per-coefficient effective degrees of freedom
    int cluster_count = 0;
    bool pseudo_inverse_used = false;
    std::vector<std::string> warnings;

    // Retained working pieces for contrast-level degrees of freedom.
    Eigen::MatrixXd xtilde;  // whitened design
    Eigen::MatrixXd bread;   // (xtilde' xtilde)^-1
    std::vector<std::vector<int>> cluster_rows;
    std::vector<Eigen::MatrixXd> adjust;  // per-cluster correction factors

    double se(int j) const { return std::sqrt(vcov(j, j)); }
};

RobustVcov cr2_vcov(const CompiledDesign& design, const FitResult& fit);

// Effective degrees of freedom for the linear combination c'beta.
double satterthwaite_df(const RobustVcov& rv, const Eigen::VectorXd& contrast);

struct MarginalEffect {
    std::string variable;  // design term, e.g. temp_spring
    std::string display;   // human label, e.g. Spring Temp.
    double estimate = 0.0;  // per degree C, or per percentage point of precip
    double se = 0.0;
    double df = 0.0;
    double t_stat = 0.0;
    double p_value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Sample-averaged derivative of the response with respect to each of the
// eight climate regressors, with delta-method uncertainty. Precipitation
// effects are rescaled to a per-percentage-point basis.
std::vector<MarginalEffect> average_marginal_effects(const FitResult& fit, const RobustVcov& rv,
                                                     const CompiledDesign& design,
                                                     double level = 0.95);

std::string significance_stars(double p_value);

struct ReportEntry {
    bool present = false;
    double estimate = 0.0;  // display units (precip terms per percentage point)
    double se = 0.0;
    double df = 0.0;
    double p_value = 0.0;
    std::string stars;
};

struct ReportColumn {
    std::string model;
    std::map<std::string, ReportEntry> terms;  // keyed by design term name
    double aic = 0.0;
    double bic = 0.0;
    double loglik_reml = 0.0;
    int n = 0;
};

struct ReportTable {
    std::vector<std::string> term_order;  // design term names, display order
    std::vector<ReportColumn> columns;

    CsvTable to_csv() const;
    nlohmann::json to_json() const;
};

// Side-by-side coefficient table across fitted specifications, climate terms
// only, ordered temperature block then precipitation block then interactions.
ReportTable report_table(const std::vector<FitResult>& fits,
                         const std::vector<RobustVcov>& vcovs);

CsvTable margins_csv(const std::vector<MarginalEffect>& effects, const std::string& model);

}  // namespace panelclim
