#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coxlab/geometry.hpp"
#include "coxlab/lattice.hpp"
#include "coxlab/params.hpp"

namespace coxlab {

// Per-site environment data: the mass U_x and, for segment variants, the
// clipped street pieces inside the cube Q(x; b, M) with a cumulative
// arc-length table realizing the position law Q_x.
struct EnvironmentSite {
    SiteId site;
    double mass = 0.0;          // capped length (CAPPED), length (DEL/DEL_GRID), area (WIDTH)
    double total_length = 0.0;  // uncapped clipped length; 0 for WIDTH
    std::vector<Segment> segments;  // absolute coordinates, lexicographic order
    std::vector<double> cum;        // cumulative lengths; back() == total_length
    std::vector<Segment> width_region;  // WIDTH only: edges within w0 of the cube
    double quad_error = 0.0;            // WIDTH only: quadrature error bound on mass

    friend bool operator==(const EnvironmentSite&, const EnvironmentSite&) = default;
};

// How block environments are materialized. Local is the defining
// construction (each block from its I^+ neighborhood only, hence 1-dependent
// for the grid variants). Global triangulates the whole padded window once;
// for grid variants with M >= 2L it produces bit-identical sites (the grid
// forces circumradii < L*sqrt(2)/2, so every triangle near a block is
// determined by the padded local data) and is much faster for large windows.
enum class BuildStrategy { Auto, Local, Global };

// The random environment E over a window of blocks. Blocks are materialized
// lazily and cached; all randomness is replayed from counter-based streams,
// so an Environment is fully described by (params, window, seed, overrides).
class Environment {
public:
    Environment(const ValidatedParams& p, BlockWindow window, std::uint64_t seed,
                BuildStrategy strategy = BuildStrategy::Auto);

    const ValidatedParams& params() const { return p_; }
    BlockWindow window() const { return window_; }
    std::uint64_t seed() const { return seed_; }
    BuildStrategy strategy() const { return strategy_; }

    // All sites of a block with positive mass (or positive uncapped length),
    // ordered by site index. OUT_OF_WINDOW if z is outside the window.
    const std::vector<EnvironmentSite>& block_nonempty_sites(const BlockId& z) const;

    // Copy of one site's data (an all-zero record if the site is empty).
    // In global mode an uncached block is answered per cube, without
    // materializing the rest of the block.
    EnvironmentSite site(const SiteId& x) const;

    // Whether z's full site list is already materialized.
    bool block_cached(const BlockId& z) const;

    // Whether site() can answer uncached blocks cheaply (global mode).
    bool lazy_site_queries() const;

    // The block field Y_z: Poisson(lambda_del) points on Mz + [0, M)^2,
    // honoring any resample override for z. Defined for any z (blocks
    // outside the window are used as padding).
    std::vector<Point2> block_points(const BlockId& z) const;

    // A copy of this environment in which Y_z is replaced by an independent
    // copy (stream purpose RESAMPLE_ENV, the given replicate). Only blocks
    // whose construction reads Y_z change; for grid variants that is
    // exactly I^+(z).
    Environment with_resampled_y(const BlockId& z, std::uint32_t replicate) const;
    Environment with_resampled_y(const std::vector<std::pair<BlockId, std::uint32_t>>& overrides) const;

    // Summed mass over the nonempty sites of z (materializes the block).
    double block_mass(const BlockId& z) const;

    // Maximum circumradius over triangles of the triangulation used for
    // block z whose circumcenter falls inside the block region.
    double block_max_circumradius(const BlockId& z) const;

private:
    struct GlobalData;

    const std::vector<EnvironmentSite>& build_block(const BlockId& z) const;
    std::vector<EnvironmentSite> build_block_local(const BlockId& z) const;
    std::vector<EnvironmentSite> build_block_global(const BlockId& z) const;
    std::vector<EnvironmentSite> sites_from_edges(const BlockId& z,
                                                  const std::vector<Segment>& edges) const;
    EnvironmentSite build_cube_site(const SiteId& site, const std::vector<Segment>& cand) const;
    EnvironmentSite site_from_global(const SiteId& x, const BlockId& z) const;
    void ensure_global() const;
    void ensure_global_circumradius() const;
    bool use_global() const;

    ValidatedParams p_;
    BlockWindow window_;
    std::uint64_t seed_ = 0;
    BuildStrategy strategy_ = BuildStrategy::Auto;
    std::unordered_map<BlockId, std::uint32_t, BlockIdHash> y_overrides_;
    mutable std::unordered_map<BlockId, std::vector<EnvironmentSite>, BlockIdHash> cache_;
    // lazy single-site queries: per block, cube -> candidate edge indices
    // in CSR form (cube c owns items[offsets[c]..offsets[c+1]))
    struct CubeIndex {
        std::vector<std::int32_t> offsets;
        std::vector<std::int32_t> items;
    };
    mutable std::unordered_map<BlockId, CubeIndex, BlockIdHash> cube_index_;
    mutable std::unordered_map<BlockId, double, BlockIdHash> circumradius_;
    mutable std::shared_ptr<GlobalData> global_;
};

Environment build_environment(const ValidatedParams& p, BlockWindow window, std::uint64_t seed,
                              BuildStrategy strategy = BuildStrategy::Auto);

// Inverse of the arc-length parametrization Gamma: the point at arc length
// v * total_length along the ordered clipped segments. EMPTY_SUPPORT for a
// massless site, VARIANT_MISMATCH for WIDTH sites, RANGE for v outside [0,1].
Point2 inverse_position(const EnvironmentSite& s, double v);

// Diagnostic report for conditions (i)-(iv) of the environment class.
struct ConditionReport {
    bool one_dependence = true;
    std::optional<SiteId> one_dependence_counterexample;
    bool bounded_intensity = true;
    double max_mass = 0.0;
    double coverage_estimate = 0.0;  // P(origin site's block non-empty at o)
    double coverage_ci_lo = 0.0, coverage_ci_hi = 0.0;
    double q0 = 0.0;
    bool coverage_above_q0 = false;
    bool essential_connectedness = true;
    std::optional<BlockId> connectedness_counterexample;
    double largest_passing_eta = 0.0;
    double max_circumradius_ratio = 0.0;  // vs L*sqrt(2)/2
    std::uint64_t sampled_blocks = 0;

    std::string to_text() const;
};

ConditionReport check_conditions(const Environment& env, double eta, double q0,
                                 std::uint64_t n_blocks, std::uint64_t seed);

// Versioned text dump: one line per nonempty site (id, mass, total length,
// segments, cumulative table) with %.17g doubles.
void dump_environment(const Environment& env, std::ostream& os);

}  // namespace coxlab
