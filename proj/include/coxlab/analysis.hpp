#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coxlab/lattice.hpp"
#include "coxlab/params.hpp"
#include "coxlab/stats.hpp"

namespace coxlab {

// One Monte Carlo estimate of theta_n(lambda) with a Wilson 95% CI.
// n <= 4 is the theta = 1 convention: hits = trials and a zero-width CI.
struct ThetaEstimate {
    double lambda = 0.0;
    std::int64_t n = 0;
    std::uint64_t trials = 0;
    std::uint64_t hits = 0;
    double theta = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const ThetaEstimate&, const ThetaEstimate&) = default;
};

ThetaEstimate estimate_theta(const ValidatedParams& p, double lambda, std::int64_t n,
                             std::uint64_t trials, std::uint64_t seed);

// theta_n for every n in n_list, all scales evaluated on shared per-trial
// realizations (so the estimates are exactly nonincreasing in n).
std::vector<ThetaEstimate> estimate_theta_multi(const ValidatedParams& p, double lambda,
                                                const std::vector<std::int64_t>& n_list,
                                                std::uint64_t trials, std::uint64_t seed);

// theta_n across a lambda grid with one coupled driver per trial (so hit
// counts are exactly nondecreasing in lambda).
std::vector<ThetaEstimate> theta_sweep(const ValidatedParams& p,
                                       const std::vector<double>& lambda_list, std::int64_t n,
                                       std::uint64_t trials, std::uint64_t seed);

// CSV table with header lambda,n,trials,hits,theta,ci_lo,ci_hi,seed.
std::string theta_table_csv(const std::vector<ThetaEstimate>& rows);

// Bisection bracket for the finite-size lambda_c proxy: the lambda at which
// the coupled estimate of theta_n crosses `threshold`.
struct LambdaCBracket {
    double lo = 0.0, hi = 0.0;
    double theta_lo = 0.0, theta_hi = 0.0;  // coupled estimates at the final endpoints
    std::int64_t n = 0;
    std::uint64_t trials = 0;
    double threshold = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t iterations = 0;

    double midpoint() const { return 0.5 * (lo + hi); }
};

// Bisect on [lambda_lo, lambda_hi] with shared trial seeds at every probe,
// until hi - lo <= tol. NO_SIGN_CHANGE if theta at both initial endpoints
// falls on the same side of the threshold. This is a finite-size proxy for
// lambda_c, not the limit quantity.
LambdaCBracket estimate_lambda_c(const ValidatedParams& p, std::int64_t n, std::uint64_t trials,
                                 double threshold, double tol, double lambda_lo, double lambda_hi,
                                 std::uint64_t seed);

struct SubcriticalRow {
    double lambda = 0.0;
    bool valid = false;        // false: too few nonzero theta values (INSUFFICIENT_DATA)
    double slope = 0.0;        // of log theta_n vs n; negative in the subcritical phase
    double slope_se = 0.0;
    double r2 = 0.0;
    std::uint64_t points = 0;  // nonzero theta values entering the fit
    std::string note;
};

struct SharpnessReport {
    LambdaCBracket bracket;
    std::vector<SubcriticalRow> subcritical;   // lambda values below the bracket
    bool supercritical_valid = false;          // regression of theta vs (lambda - lambda_c)
    double super_slope = 0.0, super_slope_se = 0.0;
    double super_intercept = 0.0, super_r2 = 0.0;
    std::uint64_t super_points = 0;
    std::string note;
    std::vector<ThetaEstimate> table;          // every (lambda, n) estimate used

    std::string to_text() const;
};

SharpnessReport fit_sharpness(const ValidatedParams& p, const std::vector<double>& lambda_list,
                              const std::vector<std::int64_t>& n_list, std::uint64_t trials,
                              std::uint64_t seed);

// Resampling influences of block z on f_n, plus the integrated pivotal
// probability: piv_integral = rho * mean over uniform (x in I_b(z), r, u)
// of the indicator that inserting mark (r, u) at site x flips f_n from
// false to true. All standard errors come from per-trial means.
struct InfluenceEstimate {
    BlockId z;
    double lambda = 0.0;
    std::int64_t n = 0;
    std::uint64_t trials = 0;
    double inf_x = 0.0, inf_x_se = 0.0;          // driver block resample
    double inf_y = 0.0, inf_y_se = 0.0;          // environment block resample
    double inf_joint = 0.0, inf_joint_se = 0.0;  // both resampled
    double piv_integral = 0.0, piv_integral_se = 0.0;
};

InfluenceEstimate estimate_influences(const ValidatedParams& p, double lambda, std::int64_t n,
                                      const BlockId& z, std::uint64_t trials, std::uint64_t seed);

// Per-block revealment of the exploration algorithm with m drawn uniformly
// from {6, ..., n-3} each trial. Requires n >= 16 (N_TOO_SMALL below).
struct RevealmentEstimate {
    double lambda = 0.0;
    std::int64_t n = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t hits = 0;  // trials where the exploration outcome was true
    std::unordered_map<BlockId, std::uint64_t, BlockIdHash> counts;

    double delta(const BlockId& z) const;
    double se(const BlockId& z) const;
};

RevealmentEstimate estimate_revealment(const ValidatedParams& p, double lambda, std::int64_t n,
                                       std::uint64_t trials, std::uint64_t seed);

enum class InequalityKind { OSSS, EfronStein, Russo, PivLemma, InfLemma, Differential };

const char* inequality_kind_name(InequalityKind kind);
InequalityKind inequality_kind_from_name(const std::string& name);

// Empirical check of one inequality. For OSSS / EFRON_STEIN the verdict is
// lhs <= rhs within 3 combined sigma; for RUSSO it is equality within 3
// sigma; the remaining kinds report an implied constant (never asserted
// against a numeric paper value). A zero denominator leaves the constant
// unset with a DIVISION_DEGENERATE note instead of failing.
struct InequalityReport {
    InequalityKind kind = InequalityKind::OSSS;
    double lambda = 0.0;
    std::int64_t n = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    double lhs = 0.0, lhs_se = 0.0;
    double rhs = 0.0, rhs_se = 0.0;
    double slack = 0.0;  // rhs - lhs
    bool pass = false;
    std::optional<double> implied_constant;
    std::string constant_name;
    std::string notes;

    std::string to_text() const;
};

InequalityReport verify_inequality(InequalityKind kind, const ValidatedParams& p, double lambda,
                                   std::int64_t n, std::uint64_t trials, std::uint64_t seed);

}  // namespace coxlab
