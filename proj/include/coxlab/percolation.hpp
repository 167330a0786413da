#pragma once

#include <cstdint>
#include <vector>

#include "coxlab/sampler.hpp"

namespace coxlab {

// Union-find labels over point indices: two points share a root iff they
// are linked by a chain of points at pairwise distance <= 2 * ball_radius.
class ClusterLabels {
public:
    explicit ClusterLabels(std::size_t n = 0);

    std::size_t size() const { return parent_.size(); }
    std::uint32_t add();  // append a new singleton, returning its index
    std::uint32_t find(std::uint32_t i) const;
    void unite(std::uint32_t a, std::uint32_t b);
    bool same(std::uint32_t a, std::uint32_t b) const { return find(a) == find(b); }

    // canonical cluster ids, contiguous from 0 in order of first appearance
    std::vector<std::uint32_t> cluster_ids() const;

private:
    mutable std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> rank_;
};

ClusterLabels build_clusters(const CoxConfiguration& config, double ball_radius);

enum class RegionKind { Box, Annulus };

// Λ_a = [-a,a]^2, or ∂Λ_a = Λ_{a-M} \ Λ_{a-2M} (sup-norm band (a-2M, a-M]).
struct RegionSpec {
    RegionKind kind = RegionKind::Box;
    double a = 0.0;
    double M = 0.0;  // used by Annulus

    static RegionSpec box(double a) { return RegionSpec{RegionKind::Box, a, 0.0}; }
    static RegionSpec annulus(double a, double M) { return RegionSpec{RegionKind::Annulus, a, M}; }

    // Euclidean distance from p to the (closure of the) region.
    double distance(const Point2& p) const;
};

// True iff some cluster has a point within ball_radius of A and one within
// ball_radius of B. REGIONS_OVERLAP if the regions intersect.
bool connects(const CoxConfiguration& config, const ClusterLabels& labels, const RegionSpec& A,
              const RegionSpec& B, double ball_radius);

// f_n = 1{Λ_{3M} <-> ∂Λ_{Mn}} on the realization at level lambda.
// WINDOW_TOO_SMALL if the window does not cover Λ_{Mn}; RANGE for n < 5.
bool evaluate_f_n(const Driver& driver, const Environment& env, double lambda, std::int64_t n);

// f_s for every s in n_list, evaluated on one shared realization covering
// the largest requested scale (valid because a crossing of ∂Λ_{Ms} must
// touch the annulus band, which is at least one ball diameter wide).
std::vector<bool> evaluate_f_multi(const Driver& driver, const Environment& env, double lambda,
                                   const std::vector<std::int64_t>& n_list);

// f_n at every lambda in lambda_list from one realization at the largest
// level: by the monotone coupling, the configuration at lambda is exactly
// the subset of points with t <= lambda, so each entry equals
// evaluate_f_n at that lambda while paying for one mark scan.
std::vector<bool> evaluate_f_n_lambdas(const Driver& driver, const Environment& env,
                                       const std::vector<double>& lambda_list, std::int64_t n);

struct ExplorationResult {
    bool outcome = false;
    std::vector<BlockId> revealed;              // sorted
    std::vector<BlockId> trace;                 // reveal order (when traced)
    std::uint64_t steps = 0;
};

// The randomized determination algorithm T^m: reveal the shell
// ||z|_inf - m| <= 3, seed S from components meeting ∂Λ_{Mm}, then grow by
// revealing I^{++} of the active block nearest the shell (lexicographic
// tie-break) among those meeting S. BAD_M unless 6 <= m <= n-3.
ExplorationResult explore(const Driver& driver, const Environment& env, double lambda,
                          std::int64_t n, std::int64_t m, bool trace = false);

}  // namespace coxlab
