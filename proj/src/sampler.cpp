#include "coxlab/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "coxlab/error.hpp"

namespace coxlab {

namespace {

constexpr int kWidthProposalCap = 10000;

StreamKey driver_stream_key(std::uint64_t seed, std::uint64_t trial, const SiteId& x,
                            const ValidatedParams& p, std::uint32_t replicate, bool resampled) {
    BlockId z = block_of_site(x, p);
    StreamKey k;
    k.master_seed = seed;
    k.block_x = z.x;
    k.block_y = z.y;
    k.purpose = resampled ? StreamPurpose::ResampleDriver : StreamPurpose::Driver;
    k.replicate = replicate;
    k.trial = trial;
    k.sub = std::uint64_t(site_index_in_block(x, p));
    return k;
}

}  // namespace

Driver::Driver(const ValidatedParams& p, BlockWindow window, std::uint64_t seed, double lambda_max,
               std::uint64_t trial)
    : p_(p), window_(window), seed_(seed), trial_(trial), lambda_max_(lambda_max) {
    if (!(lambda_max >= p.lambda()))
        throw Error(ErrorCode::RANGE, "lambda_max must be at least params.lambda");
    mark_limit_ = std::exp(-p.rho() * lambda_max);
}

Driver sample_driver(const ValidatedParams& p, BlockWindow window, double lambda_max,
                     std::uint64_t seed, std::uint64_t trial) {
    return Driver(p, window, seed, lambda_max, trial);
}

std::vector<DriverMark> Driver::marks(const SiteId& x) const {
    std::uint32_t replicate = 0;
    bool resampled = false;
    if (auto it = site_overrides_.find(x); it != site_overrides_.end()) {
        replicate = it->second;
        resampled = true;
    }
    std::vector<DriverMark> out;
    if (auto it = inserted_.find(x); it != inserted_.end()) out = it->second;
    if (lambda_max_ > 0.0) {
        RandomStream s(driver_stream_key(seed_, trial_, x, p_, replicate, resampled));
        std::uint64_t count = s.poisson(p_.rho() * lambda_max_);
        out.reserve(out.size() + count);
        for (std::uint64_t i = 0; i < count; ++i) {
            DriverMark m;
            m.v = s.next_double();
            m.u = s.uniform(0.0, p_.rho());
            m.t = s.uniform(0.0, lambda_max_);
            out.push_back(m);
        }
    }
    std::sort(out.begin(), out.end());  // (t, v, u)
    return out;
}

bool Driver::may_have_marks(const SiteId& x) const {
    if (!inserted_.empty() && inserted_.count(x)) return true;
    if (lambda_max_ <= 0.0) return false;
    double mean = p_.rho() * lambda_max_;
    if (mean > 16.0) return true;  // poisson() would split the stream
    std::uint32_t replicate = 0;
    bool resampled = false;
    if (!site_overrides_.empty())
        if (auto it = site_overrides_.find(x); it != site_overrides_.end()) {
            replicate = it->second;
            resampled = true;
        }
    // Mirrors the first step of poisson(mean): the count is zero exactly
    // when the first uniform already falls below exp(-mean).
    RandomStream s(driver_stream_key(seed_, trial_, x, p_, replicate, resampled));
    return s.next_double() >= mark_limit_;
}

std::uint64_t Driver::block_mark_prefix(const BlockId& z) const {
    StreamKey k;
    k.master_seed = seed_;
    k.block_x = z.x;
    k.block_y = z.y;
    k.purpose = StreamPurpose::Driver;
    k.trial = trial_;
    return stream_prefix(k);
}

bool Driver::may_have_marks_prefixed(std::uint64_t prefix, std::uint64_t sub) const {
    if (lambda_max_ <= 0.0) return false;
    if (p_.rho() * lambda_max_ > 16.0) return true;
    RandomStream s(prefix, sub, 0);
    return s.next_double() >= mark_limit_;
}

Driver Driver::with_inserted_mark(const SiteId& x, double r, double u) const {
    if (!(r >= 0.0) || !(r <= 1.0) || !(u >= 0.0) || !(u <= p_.rho()))
        throw Error(ErrorCode::RANGE, "inserted mark outside [0,1] x [0,rho]");
    if (!window_.contains(block_of_site(x, p_)))
        throw Error(ErrorCode::OUT_OF_WINDOW, "inserted mark outside the window");
    Driver out = *this;
    out.inserted_[x].push_back(DriverMark{r, u, 0.0});
    return out;
}

Driver Driver::with_resampled_site(const SiteId& x, std::uint32_t replicate) const {
    if (!window_.contains(block_of_site(x, p_)))
        throw Error(ErrorCode::OUT_OF_WINDOW, "resample site outside the window");
    Driver out = *this;
    out.site_overrides_[x] = replicate;
    return out;
}

Driver Driver::with_resampled_block(const BlockId& z, std::uint32_t replicate) const {
    if (!window_.contains(z)) throw Error(ErrorCode::OUT_OF_WINDOW, "resample block outside the window");
    Driver out = *this;
    for (const auto& x : sites_of_block(z, p_)) out.site_overrides_[x] = replicate;
    return out;
}

namespace {

void realize_site(const Driver& driver, const ValidatedParams& p, const EnvironmentSite& s,
                  double lambda, CoxConfiguration& out) {
    if (!(s.mass > 0.0)) return;
    auto marks = driver.marks(s.site);
    bool width = p.variant() == Variant::WIDTH;
    double side = p.cube_side();
    for (std::uint32_t i = 0; i < std::uint32_t(marks.size()); ++i) {
        const auto& m = marks[i];
        if (m.t > lambda) break;  // sorted by t
        if (m.u > s.mass) continue;
        if (!width) {
            out.points.push_back(CoxPoint{inverse_position(s, m.v), s.site, i, m.t});
            continue;
        }
        // WIDTH rejection sampler, replayable from the mark's v bits
        StreamKey k;
        BlockId z = block_of_site(s.site, p);
        k.master_seed = driver.seed();
        k.block_x = z.x;
        k.block_y = z.y;
        k.purpose = StreamPurpose::Alg;
        k.trial = driver.trial();
        k.sub = std::uint64_t(site_index_in_block(s.site, p));
        k.extra = std::bit_cast<std::uint64_t>(m.v);
        RandomStream rs(k);
        Box2 cube{double(s.site.x) * side, double(s.site.y) * side, double(s.site.x + 1) * side,
                  double(s.site.y + 1) * side};
        bool placed = false;
        for (int attempt = 0; attempt < kWidthProposalCap; ++attempt) {
            Point2 cand{rs.uniform(cube.xlo, cube.xhi), rs.uniform(cube.ylo, cube.yhi)};
            if (min_distance_to_segments(cand, s.width_region) <= p.w0()) {
                out.points.push_back(CoxPoint{cand, s.site, i, m.t});
                placed = true;
                break;
            }
        }
        if (!placed) ++out.width_rejections;
    }
}

// Per-block realization. For a block already materialized (or an
// environment without cheap single-site queries) walk its nonempty sites;
// otherwise walk the site grid, skip sites whose mark list is empty, and
// fetch only the cubes that can actually carry points. Both walks visit
// sites in ascending site-index order, so the point order is identical.
void realize_block(const Driver& driver, const Environment& env, const BlockId& z, double lambda,
                   CoxConfiguration& out) {
    if (env.block_cached(z) || !env.lazy_site_queries()) {
        for (const auto& s : env.block_nonempty_sites(z))
            realize_site(driver, env.params(), s, lambda, out);
        return;
    }
    if (!env.window().contains(z))
        throw Error(ErrorCode::OUT_OF_WINDOW, "block outside the environment window");
    std::int64_t m = env.params().b_inv();
    bool plain = !driver.has_local_modifications();
    std::uint64_t prefix = plain ? driver.block_mark_prefix(z) : 0;
    std::uint64_t sub = 0;
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < m; ++j, ++sub) {
            SiteId x{z.x * m + i, z.y * m + j};  // sites_of_block order; sub is its in-block index
            bool occupied = plain ? driver.may_have_marks_prefixed(prefix, sub)
                                  : driver.may_have_marks(x);
            if (!occupied) continue;
            realize_site(driver, env.params(), env.site(x), lambda, out);
        }
}

void check_compatible(const Driver& driver, const Environment& env) {
    const auto& a = driver.params().raw();
    const auto& b = env.params().raw();
    if (a.variant != b.variant || a.M != b.M || a.b_inv != b.b_inv || a.L != b.L ||
        a.rho != b.rho || a.w0 != b.w0 || a.lambda_del != b.lambda_del ||
        driver.window().n != env.window().n)
        throw Error(ErrorCode::SCALE_MISMATCH, "driver and environment disagree on params/window");
}

}  // namespace

CoxConfiguration realize(const Driver& driver, const Environment& env, double lambda) {
    check_compatible(driver, env);
    if (!(lambda >= 0.0) || lambda > driver.lambda_max())
        throw Error(ErrorCode::RANGE, "lambda must lie in [0, lambda_max]");
    CoxConfiguration out;
    out.lambda = lambda;
    if (lambda == 0.0) return out;
    env.window().for_each([&](BlockId z) { realize_block(driver, env, z, lambda, out); });
    return out;
}

CoxConfiguration realize_blocks(const Driver& driver, const Environment& env, double lambda,
                                const std::vector<BlockId>& blocks) {
    check_compatible(driver, env);
    if (!(lambda >= 0.0) || lambda > driver.lambda_max())
        throw Error(ErrorCode::RANGE, "lambda must lie in [0, lambda_max]");
    CoxConfiguration out;
    out.lambda = lambda;
    if (lambda == 0.0) return out;
    for (const auto& z : blocks) realize_block(driver, env, z, lambda, out);
    return out;
}

}  // namespace coxlab
