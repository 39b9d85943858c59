#pragma once

#include <vector>

namespace panelclim {

// Regularized incomplete beta function I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Student-t distribution with real degrees of freedom.
double student_t_cdf(double t, double df);
double student_t_pdf(double t, double df);
double student_t_quantile(double p, double df);

double two_sided_p_value(double t_stat, double df);

// Empirical quantile, type-7 interpolation. `values` need not be sorted.
double quantile_type7(std::vector<double> values, double p);

}  // namespace panelclim
