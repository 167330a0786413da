#pragma once

#include <cstdint>
#include <vector>

namespace coxlab {

// Wilson 95% score interval for a binomial proportion.
void wilson_ci(std::uint64_t hits, std::uint64_t trials, double& lo, double& hi);

// Binomial standard error sqrt(p(1-p)/n).
double binomial_se(std::uint64_t hits, std::uint64_t trials);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
};

// Ordinary least squares of y on x. Throws INSUFFICIENT_DATA for fewer than
// two points and DIVISION_DEGENERATE for constant x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace coxlab
