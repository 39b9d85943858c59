#include "panelclim/stats.hpp"

#include "panelclim/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace panelclim {

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x)
{
    constexpr int max_iter = 300;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) {
        d = tiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) {
            return h;
        }
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0)) {
        throw NumericError("incomplete beta requires positive shape parameters");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df)
{
    if (!(df > 0.0)) {
        throw NumericError("t distribution needs df > 0");
    }
    if (std::isinf(t)) {
        return t > 0 ? 1.0 : 0.0;
    }
    double x = df / (df + t * t);
    double half_tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
    return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

double student_t_pdf(double t, double df)
{
    double ln = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                0.5 * std::log(df * 3.14159265358979323846) -
                0.5 * (df + 1.0) * std::log1p(t * t / df);
    return std::exp(ln);
}

double student_t_quantile(double p, double df)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw NumericError("t quantile needs p in (0, 1)");
    }
    if (p == 0.5) {
        return 0.0;
    }
    // Symmetric: solve in the upper half.
    bool lower = p < 0.5;
    double target = lower ? 1.0 - p : p;

    double hi = 1.0;
    while (student_t_cdf(hi, df) < target) {
        hi *= 2.0;
        if (hi > 1e300) {
            throw NumericError("t quantile bracket overflow");
        }
    }
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13 * (1.0 + hi)) {
            break;
        }
    }
    double q = 0.5 * (lo + hi);
    // Newton polish.
    for (int i = 0; i < 3; ++i) {
        double f = student_t_cdf(q, df) - target;
        double fp = student_t_pdf(q, df);
        if (fp <= 0.0) {
            break;
        }
        q -= f / fp;
    }
    return lower ? -q : q;
}

double two_sided_p_value(double t_stat, double df)
{
    double tail = 1.0 - student_t_cdf(std::fabs(t_stat), df);
    return std::min(1.0, 2.0 * tail);
}

double quantile_type7(std::vector<double> values, double p)
{
    if (values.empty()) {
        throw NumericError("quantile of empty sample");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw NumericError("quantile probability out of [0, 1]");
    }
    std::sort(values.begin(), values.end());
    double h = (static_cast<double>(values.size()) - 1.0) * p;
    auto i = static_cast<std::size_t>(std::floor(h));
    if (i + 1 >= values.size()) {
        return values.back();
    }
    double frac = h - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
}

}  // namespace panelclim
