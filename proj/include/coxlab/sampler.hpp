#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "coxlab/environment.hpp"
#include "coxlab/lattice.hpp"
#include "coxlab/params.hpp"

namespace coxlab {

// One driver mark: position coordinate v, acceptance mark u, coupling level
// t. A mark becomes a point at level lambda iff t <= lambda and u <= U_x.
struct DriverMark {
    double v = 0.0;  // in [0,1]
    double u = 0.0;  // in [0,rho]
    double t = 0.0;  // in [0,lambda_max]; 0 for inserted marks

    friend bool operator==(const DriverMark&, const DriverMark&) = default;
    friend auto operator<=>(const DriverMark&, const DriverMark&) = default;
};

struct SiteIdHash {
    std::size_t operator()(const SiteId& k) const {
        std::uint64_t h = std::uint64_t(k.x) * 0x9e3779b97f4a7c15ull;
        h ^= std::uint64_t(k.y) + 0x517cc1b727220a95ull + (h << 6) + (h >> 2);
        return std::size_t(h);
    }
};

// The driver field V: per site, a unit-intensity Poisson process on
// [0,1] x [0,rho] x [0,lambda_max]. Mark lists are recomputed on demand
// from counter-based streams, so a Driver is a value described by
// (params, window, seed, trial, lambda_max) plus sparse overrides.
class Driver {
public:
    Driver(const ValidatedParams& p, BlockWindow window, std::uint64_t seed,
           double lambda_max, std::uint64_t trial = 0);

    const ValidatedParams& params() const { return p_; }
    BlockWindow window() const { return window_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t trial() const { return trial_; }
    double lambda_max() const { return lambda_max_; }

    // Marks of site x sorted by (t, v, u): base stream, or the resample
    // replicate if overridden, plus inserted marks (t = 0) first.
    std::vector<DriverMark> marks(const SiteId& x) const;

    // Exact test for marks(x).empty() reading one uniform from x's stream
    // (conservatively true when the mark mean exceeds the single-stage
    // Poisson sampler's range).
    bool may_have_marks(const SiteId& x) const;

    // Fast path for scanning a whole block: hash the key prefix shared by
    // the block's base mark streams once, then test each site by its
    // in-block index. Only valid when has_local_modifications() is false.
    bool has_local_modifications() const {
        return !site_overrides_.empty() || !inserted_.empty();
    }
    std::uint64_t block_mark_prefix(const BlockId& z) const;
    bool may_have_marks_prefixed(std::uint64_t prefix, std::uint64_t sub) const;

    // Copy with one extra always-active mark at site x. RANGE if r or u is
    // out of bounds, OUT_OF_WINDOW if x is outside the window.
    Driver with_inserted_mark(const SiteId& x, double r, double u) const;

    // Copies with fresh mark lists (streams RESAMPLE_DRIVER, replicate j).
    Driver with_resampled_site(const SiteId& x, std::uint32_t replicate) const;
    Driver with_resampled_block(const BlockId& z, std::uint32_t replicate) const;

private:
    ValidatedParams p_;
    BlockWindow window_;
    std::uint64_t seed_ = 0;
    std::uint64_t trial_ = 0;
    double lambda_max_ = 0.0;
    double mark_limit_ = 1.0;  // exp(-rho * lambda_max), valid for means <= 16
    std::unordered_map<SiteId, std::uint32_t, SiteIdHash> site_overrides_;
    std::unordered_map<SiteId, std::vector<DriverMark>, SiteIdHash> inserted_;
};

Driver sample_driver(const ValidatedParams& p, BlockWindow window, double lambda_max,
                     std::uint64_t seed, std::uint64_t trial = 0);

struct CoxPoint {
    Point2 pos;
    SiteId site;
    std::uint32_t mark_index = 0;  // index into the site's sorted mark list
    double t = 0.0;  // the mark's coupling level; the point exists at all lambda >= t
};

struct CoxConfiguration {
    std::vector<CoxPoint> points;  // ordered by (block, site, mark_index)
    double lambda = 0.0;
    std::uint64_t width_rejections = 0;  // WIDTH marks dropped by the proposal cap
};

// Realize the Cox configuration at level lambda from a driver and an
// environment: per site, marks with t <= lambda and u <= mass map through
// the arc-length table (segment variants) or the WIDTH rejection sampler.
// SCALE_MISMATCH if driver and environment disagree on params or window,
// RANGE if lambda > driver.lambda_max.
CoxConfiguration realize(const Driver& driver, const Environment& env, double lambda);

// Same, restricted to the sites of the given blocks (used by exploration).
CoxConfiguration realize_blocks(const Driver& driver, const Environment& env, double lambda,
                                const std::vector<BlockId>& blocks);

}  // namespace coxlab
