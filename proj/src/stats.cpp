#include "coxlab/stats.hpp"

#include <cmath>

#include "coxlab/error.hpp"

namespace coxlab {

void wilson_ci(std::uint64_t hits, std::uint64_t trials, double& lo, double& hi) {
    if (trials == 0) {
        lo = 0.0;
        hi = 1.0;
        return;
    }
    const double z = 1.959963984540054;  // 97.5% normal quantile
    double n = double(trials), ph = double(hits) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (ph + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / denom;
    lo = hits == 0 ? 0.0 : std::max(0.0, center - half);
    hi = hits == trials ? 1.0 : std::min(1.0, center + half);
}

double binomial_se(std::uint64_t hits, std::uint64_t trials) {
    if (trials == 0) return 0.0;
    double n = double(trials), p = double(hits) / n;
    return std::sqrt(p * (1.0 - p) / n);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorCode::INSUFFICIENT_DATA, "need at least two points for a fit");
    double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    double vx = sxx - sx * sx / n;
    if (!(vx > 0.0)) throw Error(ErrorCode::DIVISION_DEGENERATE, "x values are constant");
    LinearFit f;
    f.slope = (sxy - sx * sy / n) / vx;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
    }
    double ss_tot = syy - sy * sy / n;
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (x.size() > 2) f.slope_se = std::sqrt(ss_res / (n - 2.0) / vx);
    return f;
}

}  // namespace coxlab
