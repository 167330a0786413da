#include "coxlab/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "coxlab/error.hpp"
#include "coxlab/stats.hpp"

namespace coxlab {

namespace {

constexpr int kQuadCells = 256;  // WIDTH quadrature resolution per cube side

StreamKey env_stream_key(std::uint64_t seed, const BlockId& z, std::uint32_t replicate,
                         bool resampled) {
    StreamKey k;
    k.master_seed = seed;
    k.block_x = z.x;
    k.block_y = z.y;
    k.purpose = resampled ? StreamPurpose::ResampleEnv : StreamPurpose::Env;
    k.replicate = replicate;
    return k;
}

double segment_segment_distance(const Segment& s, const Segment& t) {
    // endpoints against the other segment covers all non-crossing cases
    double d = std::min(std::min(distance_to_segment(s.a, t), distance_to_segment(s.b, t)),
                        std::min(distance_to_segment(t.a, s), distance_to_segment(t.b, s)));
    if (d == 0.0) return 0.0;
    // crossing check
    int o1 = orient2d(s.a, s.b, t.a);
    int o2 = orient2d(s.a, s.b, t.b);
    int o3 = orient2d(t.a, t.b, s.a);
    int o4 = orient2d(t.a, t.b, s.b);
    if (o1 * o2 < 0 && o3 * o4 < 0) return 0.0;
    return d;
}

double segment_box_distance(const Segment& e, const Box2& box) {
    if (box.contains(e.a) || box.contains(e.b)) return 0.0;
    Segment sides[4] = {{{box.xlo, box.ylo}, {box.xhi, box.ylo}},
                        {{box.xhi, box.ylo}, {box.xhi, box.yhi}},
                        {{box.xhi, box.yhi}, {box.xlo, box.yhi}},
                        {{box.xlo, box.yhi}, {box.xlo, box.ylo}}};
    double best = segment_segment_distance(e, sides[0]);
    for (int i = 1; i < 4 && best > 0.0; ++i)
        best = std::min(best, segment_segment_distance(e, sides[i]));
    return best;
}

// Conservative bucketing of segments into an m x m grid of cells of side
// `cell` anchored at (x0, y0): every cell whose closed box intersects the
// segment (within `margin`) receives the segment's index, possibly along
// with some extra near-miss cells. Exactness is restored downstream by
// clip_segment / distance tests.
template <class Emit>
void bucket_segment(const Segment& e, double x0, double y0, double cell, std::int64_t m,
                    double margin, Emit&& emit) {
    double exlo = std::min(e.a.x, e.b.x) - margin, exhi = std::max(e.a.x, e.b.x) + margin;
    double eylo = std::min(e.a.y, e.b.y) - margin, eyhi = std::max(e.a.y, e.b.y) + margin;
    auto col_of = [&](double x) {
        return std::max<std::int64_t>(0, std::min(m - 1, std::int64_t(std::floor((x - x0) / cell))));
    };
    auto row_of = [&](double y) {
        return std::max<std::int64_t>(0, std::min(m - 1, std::int64_t(std::floor((y - y0) / cell))));
    };
    if (exhi < x0 || exlo > x0 + double(m) * cell || eyhi < y0 || eylo > y0 + double(m) * cell)
        return;
    std::int64_t i_lo = col_of(exlo), i_hi = col_of(exhi);
    double dx = e.b.x - e.a.x, dy = e.b.y - e.a.y;
    for (std::int64_t i = i_lo; i <= i_hi; ++i) {
        double cxlo = x0 + double(i) * cell - margin, cxhi = x0 + double(i + 1) * cell + margin;
        double ylo, yhi;
        if (std::abs(dx) < 1e-300) {
            ylo = eylo;
            yhi = eyhi;
        } else {
            double t0 = (cxlo - e.a.x) / dx, t1 = (cxhi - e.a.x) / dx;
            if (t0 > t1) std::swap(t0, t1);
            t0 = std::max(0.0, t0);
            t1 = std::min(1.0, t1);
            if (t0 > t1) continue;
            double ya = e.a.y + t0 * dy, yb = e.a.y + t1 * dy;
            ylo = std::min(ya, yb) - margin;
            yhi = std::max(ya, yb) + margin;
        }
        std::int64_t j_lo = row_of(ylo), j_hi = row_of(yhi);
        for (std::int64_t j = j_lo; j <= j_hi; ++j) emit(i, j);
    }
}

}  // namespace

struct Environment::GlobalData {
    Triangulation tri;
    std::vector<Segment> edges;
    // block -> candidate edge indices (conservative), CSR over the padded
    // block grid [lo,hi)^2, row-major in (x - lo, y - lo)
    std::int64_t lo = 0, hi = 0;
    std::vector<std::int32_t> bb_off, bb_items;
    bool circum_built = false;  // the map below is filled on first use
    std::unordered_map<BlockId, double, BlockIdHash> max_circumradius;

    // edge indices of block z in ascending order (empty outside the grid)
    std::pair<const std::int32_t*, const std::int32_t*> block_edges(const BlockId& z) const {
        if (z.x < lo || z.x >= hi || z.y < lo || z.y >= hi) return {nullptr, nullptr};
        std::size_t c = std::size_t((z.x - lo) * (hi - lo) + (z.y - lo));
        return {bb_items.data() + bb_off[c], bb_items.data() + bb_off[c + 1]};
    }
};

Environment::Environment(const ValidatedParams& p, BlockWindow window, std::uint64_t seed,
                         BuildStrategy strategy)
    : p_(p), window_(window), seed_(seed), strategy_(strategy) {
    if (window.n <= 0) throw Error(ErrorCode::RANGE, "window must be nonempty");
}

Environment build_environment(const ValidatedParams& p, BlockWindow window, std::uint64_t seed,
                              BuildStrategy strategy) {
    return Environment(p, window, seed, strategy);
}

bool Environment::use_global() const {
    if (p_.variant() == Variant::DEL) return true;  // DEL has no local construction
    switch (strategy_) {
        case BuildStrategy::Local: return false;
        case BuildStrategy::Global: return true;
        case BuildStrategy::Auto:
            // The grid forces circumradii below L*sqrt(2) for triangles
            // touching a block, so with M >= 3L every such triangle is
            // already determined by the I^+ data and the global
            // triangulation reproduces the local construction bit for bit.
            return p_.M() >= 3.0 * p_.L();
    }
    return false;
}

std::vector<Point2> Environment::block_points(const BlockId& z) const {
    std::uint32_t replicate = 0;
    bool resampled = false;
    if (auto it = y_overrides_.find(z); it != y_overrides_.end()) {
        replicate = it->second;
        resampled = true;
    }
    RandomStream s(env_stream_key(seed_, z, replicate, resampled));
    double M = p_.M();
    Box2 region{double(z.x) * M, double(z.y) * M, double(z.x + 1) * M, double(z.y + 1) * M};
    return sample_poisson_block(s, p_.lambda_del(), region);
}

const std::vector<EnvironmentSite>& Environment::block_nonempty_sites(const BlockId& z) const {
    if (!window_.contains(z))
        throw Error(ErrorCode::OUT_OF_WINDOW, "block outside the environment window");
    return build_block(z);
}

const std::vector<EnvironmentSite>& Environment::build_block(const BlockId& z) const {
    if (auto it = cache_.find(z); it != cache_.end()) return it->second;
    auto sites = use_global() ? build_block_global(z) : build_block_local(z);
    return cache_.emplace(z, std::move(sites)).first->second;
}

std::vector<EnvironmentSite> Environment::build_block_local(const BlockId& z) const {
    double M = p_.M();
    std::vector<Point2> pts;
    for (const auto& w : block_neighborhood(z, 1)) {
        auto bp = block_points(w);
        pts.insert(pts.end(), bp.begin(), bp.end());
    }
    Box2 padded{double(z.x - 1) * M, double(z.y - 1) * M, double(z.x + 2) * M,
                double(z.y + 2) * M};
    if (p_.has_grid()) pts = superimpose_grid(pts, p_.L(), padded);
    Triangulation tri = delaunay_triangulate(pts);
    std::vector<Segment> edges;
    edges.reserve(tri.edges.size());
    for (const auto& e : tri.edges) edges.push_back({tri.vertices[e[0]], tri.vertices[e[1]]});
    // circumradius diagnostic over triangles whose circumcenter is in z
    Box2 region{double(z.x) * M, double(z.y) * M, double(z.x + 1) * M, double(z.y + 1) * M};
    double maxr = 0.0;
    for (const auto& t : tri.triangles) {
        auto cc = circumcircle(tri.vertices[t[0]], tri.vertices[t[1]], tri.vertices[t[2]]);
        if (cc.center.x >= region.xlo && cc.center.x < region.xhi && cc.center.y >= region.ylo &&
            cc.center.y < region.yhi)
            maxr = std::max(maxr, cc.radius);
    }
    circumradius_[z] = maxr;
    return sites_from_edges(z, edges);
}

void Environment::ensure_global() const {
    if (global_) return;
    auto g = std::make_shared<GlobalData>();
    double M = p_.M();
    int pad = p_.variant() == Variant::DEL ? 2 : 1;
    std::int64_t lo = -window_.n - pad, hi = window_.n + pad;
    std::vector<Point2> pts;
    for (std::int64_t x = lo; x < hi; ++x)
        for (std::int64_t y = lo; y < hi; ++y) {
            auto bp = block_points(BlockId{x, y});
            pts.insert(pts.end(), bp.begin(), bp.end());
        }
    Box2 padded{double(lo) * M, double(lo) * M, double(hi) * M, double(hi) * M};
    if (p_.has_grid()) pts = superimpose_grid(pts, p_.L(), padded);
    g->tri = delaunay_triangulate(pts);
    g->edges.reserve(g->tri.edges.size());
    for (const auto& e : g->tri.edges)
        g->edges.push_back({g->tri.vertices[e[0]], g->tri.vertices[e[1]]});
    // bucket edges by block (conservative, one-block anchored grid), CSR
    // built in two counting passes to avoid per-block vector churn
    std::int64_t m = hi - lo;
    g->lo = lo;
    g->hi = hi;
    g->bb_off.assign(std::size_t(m * m) + 1, 0);
    for (std::int32_t i = 0; i < std::int32_t(g->edges.size()); ++i)
        bucket_segment(g->edges[i], double(lo) * M, double(lo) * M, M, m, 1e-9,
                       [&](std::int64_t bx, std::int64_t by) {
                           ++g->bb_off[std::size_t(bx * m + by) + 1];
                       });
    for (std::size_t c = 1; c < g->bb_off.size(); ++c) g->bb_off[c] += g->bb_off[c - 1];
    g->bb_items.resize(std::size_t(g->bb_off.back()));
    std::vector<std::int32_t> cursor(g->bb_off.begin(), g->bb_off.end() - 1);
    for (std::int32_t i = 0; i < std::int32_t(g->edges.size()); ++i)
        bucket_segment(g->edges[i], double(lo) * M, double(lo) * M, M, m, 1e-9,
                       [&](std::int64_t bx, std::int64_t by) {
                           g->bb_items[std::size_t(cursor[std::size_t(bx * m + by)]++)] = i;
                       });
    global_ = std::move(g);
}

// Fill the per-block circumradius map lazily: it is a diagnostic, and
// skipping it keeps the per-trial global build cost down.
void Environment::ensure_global_circumradius() const {
    ensure_global();
    if (global_->circum_built) return;
    double M = p_.M();
    for (const auto& t : global_->tri.triangles) {
        auto cc = circumcircle(global_->tri.vertices[t[0]], global_->tri.vertices[t[1]],
                               global_->tri.vertices[t[2]]);
        BlockId z{std::int64_t(std::floor(cc.center.x / M)),
                  std::int64_t(std::floor(cc.center.y / M))};
        auto& r = global_->max_circumradius[z];
        r = std::max(r, cc.radius);
    }
    global_->circum_built = true;
}

std::vector<EnvironmentSite> Environment::build_block_global(const BlockId& z) const {
    ensure_global_circumradius();
    auto [eb, ee] = global_->block_edges(z);
    std::vector<Segment> edges;
    edges.reserve(std::size_t(ee - eb));
    for (auto it = eb; it != ee; ++it) edges.push_back(global_->edges[*it]);
    if (auto it = global_->max_circumradius.find(z); it != global_->max_circumradius.end())
        circumradius_[z] = it->second;
    else
        circumradius_[z] = 0.0;
    return sites_from_edges(z, edges);
}

std::vector<EnvironmentSite> Environment::sites_from_edges(const BlockId& z,
                                                           const std::vector<Segment>& edges) const {
    double side = p_.cube_side();
    std::int64_t m = p_.sites_per_block_side();
    double x0 = double(z.x) * p_.M(), y0 = double(z.y) * p_.M();
    bool width = p_.variant() == Variant::WIDTH;
    double margin = width ? p_.w0() + 1e-9 : 1e-9;

    // candidate edges per cube
    std::vector<std::vector<std::int32_t>> cand(std::size_t(m * m));
    for (std::int32_t i = 0; i < std::int32_t(edges.size()); ++i)
        bucket_segment(edges[i], x0, y0, side, m, margin, [&](std::int64_t cx, std::int64_t cy) {
            cand[std::size_t(cx * m + cy)].push_back(i);
        });

    std::vector<EnvironmentSite> out;
    std::vector<Segment> local;
    for (std::int64_t cx = 0; cx < m; ++cx)
        for (std::int64_t cy = 0; cy < m; ++cy) {
            const auto& ids = cand[std::size_t(cx * m + cy)];
            if (ids.empty()) continue;
            SiteId site{z.x * m + cx, z.y * m + cy};
            local.clear();
            for (auto i : ids) local.push_back(edges[i]);
            EnvironmentSite s = build_cube_site(site, local);
            bool empty = width ? s.mass <= 0.0 : s.segments.empty();
            if (empty) continue;
            out.push_back(std::move(s));
        }
    return out;
}

// Exact per-cube site data from the cube's candidate edges (in edge-index
// order). Returns an all-zero record for a cube the streets miss.
EnvironmentSite Environment::build_cube_site(const SiteId& site,
                                             const std::vector<Segment>& cand) const {
    double side = p_.cube_side();
    // exact double cube corners: (Mb)*k with k the global site index
    Box2 cube{double(site.x) * side, double(site.y) * side, double(site.x + 1) * side,
              double(site.y + 1) * side};
    EnvironmentSite s;
    s.site = site;
    if (p_.variant() == Variant::WIDTH) {
        for (const Segment& e : cand)
            if (segment_box_distance(e, cube) <= p_.w0()) s.width_region.push_back(e);
        if (s.width_region.empty()) return s;
        std::sort(s.width_region.begin(), s.width_region.end(),
                  [](const Segment& l, const Segment& r) {
                      if (l.a != r.a) return l.a < r.a;
                      return l.b < r.b;
                  });
        // stratified corner quadrature: full cells count 1, cells with
        // mixed corner membership count 1/2 (the reported error bound)
        double cell = (cube.xhi - cube.xlo) / kQuadCells;
        std::vector<std::uint8_t> in((kQuadCells + 1) * (kQuadCells + 1));
        for (int iy = 0; iy <= kQuadCells; ++iy)
            for (int ix = 0; ix <= kQuadCells; ++ix) {
                Point2 p{cube.xlo + ix * cell, cube.ylo + iy * cell};
                in[std::size_t(iy) * (kQuadCells + 1) + ix] =
                    min_distance_to_segments(p, s.width_region) <= p_.w0() ? 1 : 0;
            }
        std::int64_t full = 0, mixed = 0;
        for (int iy = 0; iy < kQuadCells; ++iy)
            for (int ix = 0; ix < kQuadCells; ++ix) {
                int c = in[std::size_t(iy) * (kQuadCells + 1) + ix] +
                        in[std::size_t(iy) * (kQuadCells + 1) + ix + 1] +
                        in[std::size_t(iy + 1) * (kQuadCells + 1) + ix] +
                        in[std::size_t(iy + 1) * (kQuadCells + 1) + ix + 1];
                if (c == 4)
                    ++full;
                else if (c > 0)
                    ++mixed;
            }
        s.mass = (double(full) + 0.5 * double(mixed)) * cell * cell;
        s.quad_error = 0.5 * double(mixed) * cell * cell;
        if (s.mass <= 0.0) return EnvironmentSite{.site = site};  // treated as empty
        return s;
    }
    ClipResult cr = clip_segments_to_cube(cand, cube);
    if (cr.segments.empty()) return s;
    s.segments = std::move(cr.segments);
    s.total_length = cr.total_length;
    s.cum.reserve(s.segments.size());
    double acc = 0.0;
    for (const auto& seg : s.segments) {
        acc += seg.length();
        s.cum.push_back(acc);
    }
    s.cum.back() = s.total_length;
    s.mass =
        p_.variant() == Variant::CAPPED ? std::min(p_.rho(), s.total_length) : s.total_length;
    return s;
}

EnvironmentSite Environment::site(const SiteId& x) const {
    BlockId z = block_of_site(x, p_);
    if (!window_.contains(z))
        throw Error(ErrorCode::OUT_OF_WINDOW, "site outside the environment window");
    if (!block_cached(z) && use_global()) return site_from_global(x, z);
    const auto& sites = build_block(z);
    auto it = std::lower_bound(sites.begin(), sites.end(), x,
                               [](const EnvironmentSite& s, const SiteId& k) { return s.site < k; });
    if (it != sites.end() && it->site == x) return *it;
    EnvironmentSite empty;
    empty.site = x;
    return empty;
}

bool Environment::block_cached(const BlockId& z) const { return cache_.count(z) != 0; }

bool Environment::lazy_site_queries() const { return use_global(); }

// Single-cube construction against the global edge set: the first query in
// a block replays the bucket pass sites_from_edges uses and caches the
// cube -> candidate-edge index, so the result is bit-identical to the full
// block build without materializing the other cubes.
EnvironmentSite Environment::site_from_global(const SiteId& x, const BlockId& z) const {
    ensure_global();
    double side = p_.cube_side();
    std::int64_t m = p_.sites_per_block_side();
    std::int64_t cx = x.x - z.x * m, cy = x.y - z.y * m;
    auto it = cube_index_.find(z);
    if (it == cube_index_.end()) {
        double x0 = double(z.x) * p_.M(), y0 = double(z.y) * p_.M();
        double margin = p_.variant() == Variant::WIDTH ? p_.w0() + 1e-9 : 1e-9;
        CubeIndex idx;
        idx.offsets.assign(std::size_t(m * m) + 1, 0);
        auto [eb, ee] = global_->block_edges(z);
        for (auto e = eb; e != ee; ++e)
            bucket_segment(global_->edges[*e], x0, y0, side, m, margin,
                           [&](std::int64_t bx, std::int64_t by) {
                               ++idx.offsets[std::size_t(bx * m + by) + 1];
                           });
        for (std::size_t c = 1; c < idx.offsets.size(); ++c) idx.offsets[c] += idx.offsets[c - 1];
        idx.items.resize(std::size_t(idx.offsets.back()));
        std::vector<std::int32_t> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
        // second pass fills ascending edge indices per cube, matching the
        // push_back order sites_from_edges produces
        for (auto e = eb; e != ee; ++e)
            bucket_segment(global_->edges[*e], x0, y0, side, m, margin,
                           [&](std::int64_t bx, std::int64_t by) {
                               idx.items[std::size_t(cursor[std::size_t(bx * m + by)]++)] = *e;
                           });
        it = cube_index_.emplace(z, std::move(idx)).first;
    }
    const CubeIndex& idx = it->second;
    std::size_t c = std::size_t(cx * m + cy);
    std::vector<Segment> local;
    local.reserve(std::size_t(idx.offsets[c + 1] - idx.offsets[c]));
    for (std::int32_t k = idx.offsets[c]; k < idx.offsets[c + 1]; ++k)
        local.push_back(global_->edges[idx.items[std::size_t(k)]]);
    return build_cube_site(x, local);
}

Environment Environment::with_resampled_y(const BlockId& z, std::uint32_t replicate) const {
    return with_resampled_y(std::vector<std::pair<BlockId, std::uint32_t>>{{z, replicate}});
}

Environment Environment::with_resampled_y(
    const std::vector<std::pair<BlockId, std::uint32_t>>& overrides) const {
    Environment out(p_, window_, seed_, strategy_);
    out.y_overrides_ = y_overrides_;
    for (const auto& [z, j] : overrides) out.y_overrides_[z] = j;
    if (p_.variant() != Variant::DEL && !use_global()) {
        // locality: only blocks reading a changed Y_z must be rebuilt
        std::set<BlockId> dirty;
        for (const auto& [z, j] : overrides)
            for (const auto& w : block_neighborhood(z, 1)) dirty.insert(w);
        out.cache_ = cache_;
        out.circumradius_ = circumradius_;
        for (const auto& w : dirty) {
            out.cache_.erase(w);
            out.circumradius_.erase(w);
        }
    }
    return out;
}

double Environment::block_mass(const BlockId& z) const {
    double total = 0.0;
    for (const auto& s : block_nonempty_sites(z)) total += s.mass;
    return total;
}

double Environment::block_max_circumradius(const BlockId& z) const {
    build_block(z);
    auto it = circumradius_.find(z);
    return it == circumradius_.end() ? 0.0 : it->second;
}

Point2 inverse_position(const EnvironmentSite& s, double v) {
    if (!(v >= 0.0) || !(v <= 1.0)) throw Error(ErrorCode::RANGE, "v must lie in [0,1]");
    if (!(s.mass > 0.0)) throw Error(ErrorCode::EMPTY_SUPPORT, "site has zero mass");
    if (s.segments.empty())
        throw Error(ErrorCode::VARIANT_MISMATCH, "WIDTH sites have no arc-length table");
    double target = v * s.total_length;
    auto it = std::lower_bound(s.cum.begin(), s.cum.end(), target);
    std::size_t i = std::min(std::size_t(it - s.cum.begin()), s.segments.size() - 1);
    double before = i == 0 ? 0.0 : s.cum[i - 1];
    const Segment& seg = s.segments[i];
    double len = seg.length();
    double t = len > 0.0 ? std::min(1.0, std::max(0.0, (target - before) / len)) : 0.0;
    return Point2{seg.a.x + t * (seg.b.x - seg.a.x), seg.a.y + t * (seg.b.y - seg.a.y)};
}

namespace {

struct SiteMassMap {
    // masses of eta-supported / non-empty sites over a neighborhood
    std::unordered_map<std::int64_t, double> mass;  // key = packed site index
    static std::int64_t pack(const SiteId& k) { return k.x * 0x100000 + k.y + 0x80000; }
};

}  // namespace

ConditionReport check_conditions(const Environment& env, double eta, double q0,
                                 std::uint64_t n_blocks, std::uint64_t seed) {
    const auto& p = env.params();
    ConditionReport rep;
    rep.q0 = q0;
    rep.sampled_blocks = n_blocks;

    StreamKey ak;
    ak.master_seed = seed;
    ak.purpose = StreamPurpose::Alg;
    ak.extra = 0x636f6e64;  // condition-check stream
    RandomStream alg(ak);

    BlockWindow win = env.window();
    std::int64_t m = p.sites_per_block_side();
    int pad = p.variant() == Variant::DEL ? 2 : 1;

    // sampled blocks (with replacement, deterministic)
    std::vector<BlockId> samples;
    for (std::uint64_t i = 0; i < n_blocks; ++i) {
        std::int64_t bx = std::int64_t(alg.uniform(0, double(win.side()))) - win.n;
        std::int64_t by = std::int64_t(alg.uniform(0, double(win.side()))) - win.n;
        samples.push_back(BlockId{std::min(bx, win.n - 1), std::min(by, win.n - 1)});
    }

    // (i) 1-dependence: resample every Y-block in the padded region outside
    // I^+(z) and demand bit-identical sites in z
    std::uint64_t dep_checks = std::min<std::uint64_t>(n_blocks, 64);
    for (std::uint64_t i = 0; i < dep_checks && rep.one_dependence; ++i) {
        BlockId z = samples[i];
        std::vector<std::pair<BlockId, std::uint32_t>> far;
        auto keep = block_neighborhood(z, 1);
        for (std::int64_t x = -win.n - pad; x < win.n + pad; ++x)
            for (std::int64_t y = -win.n - pad; y < win.n + pad; ++y) {
                BlockId w{x, y};
                if (std::find(keep.begin(), keep.end(), w) == keep.end())
                    far.push_back({w, std::uint32_t(i + 1)});
            }
        Environment env2 = env.with_resampled_y(far);
        const auto& a = env.block_nonempty_sites(z);
        const auto& b = env2.block_nonempty_sites(z);
        if (!(a == b)) {
            rep.one_dependence = false;
            rep.one_dependence_counterexample =
                a.empty() ? (b.empty() ? SiteId{z.x * m, z.y * m} : b.front().site) : a.front().site;
        }
    }

    // (ii) bounded intensity over the sampled blocks
    for (const auto& z : samples) {
        for (const auto& s : env.block_nonempty_sites(z)) rep.max_mass = std::max(rep.max_mass, s.mass);
        rep.max_circumradius_ratio = std::max(
            rep.max_circumradius_ratio, env.block_max_circumradius(z) / (p.L() * std::sqrt(2.0) / 2.0));
    }
    bool capped = p.variant() == Variant::CAPPED || p.variant() == Variant::WIDTH;
    rep.bounded_intensity = !capped || rep.max_mass <= p.rho();

    // (iii) coverage: P(origin site non-empty) over fresh environments
    std::uint64_t cov_trials = n_blocks, cov_hits = 0;
    for (std::uint64_t t = 0; t < cov_trials; ++t) {
        Environment fresh(p, BlockWindow{1}, mix64(mix64(seed, 0xc0feu), t), env.strategy());
        if (fresh.site(SiteId{0, 0}).mass > 0.0) ++cov_hits;
    }
    rep.coverage_estimate = cov_trials ? double(cov_hits) / double(cov_trials) : 0.0;
    wilson_ci(cov_hits, cov_trials, rep.coverage_ci_lo, rep.coverage_ci_hi);
    rep.coverage_above_q0 = rep.coverage_estimate > q0;

    // (iv) essential connectedness: every pair of non-empty sites in
    // I_b^+(z) joined by a chain of adjacent eta-supported sites in I_b^{++}(z)
    auto connected_at = [&](const BlockId& z, double et) {
        SiteMassMap mm;
        for (const auto& w : block_neighborhood(z, 2)) {
            if (!win.contains(w)) continue;
            for (const auto& s : env.block_nonempty_sites(w))
                mm.mass[SiteMassMap::pack(s.site)] = s.mass;
        }
        std::vector<SiteId> pivots;  // non-empty sites of I_b^+(z)
        for (const auto& w : block_neighborhood(z, 1)) {
            if (!win.contains(w)) continue;
            for (const auto& s : env.block_nonempty_sites(w))
                if (s.mass > 0.0) pivots.push_back(s.site);
        }
        if (pivots.size() < 2) return true;
        // BFS from pivots[0] over eta-supported adjacency
        for (const auto& pv : pivots)
            if (mm.mass[SiteMassMap::pack(pv)] < et) return false;
        std::set<std::int64_t> seen{SiteMassMap::pack(pivots[0])};
        std::queue<SiteId> q;
        q.push(pivots[0]);
        std::int64_t lo_x = (z.x - 2) * m, hi_x = (z.x + 3) * m;
        std::int64_t lo_y = (z.y - 2) * m, hi_y = (z.y + 3) * m;
        while (!q.empty()) {
            SiteId c = q.front();
            q.pop();
            for (std::int64_t dx = -1; dx <= 1; ++dx)
                for (std::int64_t dy = -1; dy <= 1; ++dy) {
                    if (dx == 0 && dy == 0) continue;
                    SiteId nb{c.x + dx, c.y + dy};
                    if (nb.x < lo_x || nb.x >= hi_x || nb.y < lo_y || nb.y >= hi_y) continue;
                    auto key = SiteMassMap::pack(nb);
                    if (seen.count(key)) continue;
                    auto it = mm.mass.find(key);
                    if (it == mm.mass.end() || it->second < et) continue;
                    seen.insert(key);
                    q.push(nb);
                }
        }
        for (const auto& pv : pivots)
            if (!seen.count(SiteMassMap::pack(pv))) return false;
        return true;
    };

    double best_eta = p.rho();
    bool any_eta = false;
    for (const auto& z : samples) {
        if (!connected_at(z, eta)) {
            rep.essential_connectedness = false;
            if (!rep.connectedness_counterexample) rep.connectedness_counterexample = z;
        }
        // largest passing eta on the geometric grid rho * 2^-k (monotone in k)
        double z_best = -1.0;
        for (int k = 0; k <= 60; ++k) {
            double et = p.rho() * std::ldexp(1.0, -k);
            if (connected_at(z, et)) {
                z_best = et;
                break;
            }
        }
        if (z_best < 0.0) {
            best_eta = 0.0;
        } else {
            best_eta = std::min(best_eta, z_best);
            any_eta = true;
        }
    }
    rep.largest_passing_eta = any_eta ? best_eta : 0.0;
    return rep;
}

std::string ConditionReport::to_text() const {
    std::ostringstream os;
    os << "condition_report v1\n";
    os << "one_dependence = " << (one_dependence ? "pass" : "fail") << "\n";
    if (one_dependence_counterexample)
        os << "one_dependence_counterexample = " << one_dependence_counterexample->x << " "
           << one_dependence_counterexample->y << "\n";
    os << "bounded_intensity = " << (bounded_intensity ? "pass" : "fail") << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", max_mass);
    os << "max_mass = " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.6f", coverage_estimate);
    os << "coverage_estimate = " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.6f %.6f", coverage_ci_lo, coverage_ci_hi);
    os << "coverage_ci = " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.6g", q0);
    os << "q0 = " << buf << "\n";
    os << "coverage_above_q0 = " << (coverage_above_q0 ? "yes" : "no")
       << "  # informational: the domination constant q0(d) is configured, not derived\n";
    os << "essential_connectedness = " << (essential_connectedness ? "pass" : "fail") << "\n";
    if (connectedness_counterexample)
        os << "connectedness_counterexample = " << connectedness_counterexample->x << " "
           << connectedness_counterexample->y << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", largest_passing_eta);
    os << "largest_passing_eta = " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.6f", max_circumradius_ratio);
    os << "max_circumradius_ratio = " << buf << "  # vs L*sqrt(2)/2\n";
    os << "sampled_blocks = " << sampled_blocks << "\n";
    return os.str();
}

void dump_environment(const Environment& env, std::ostream& os) {
    os << "coxenv v1\n";
    const auto& p = env.params();
    char buf[512];
    std::snprintf(buf, sizeof buf, "params variant=%s M=%.17g b_inv=%lld L=%.17g rho=%.17g w0=%.17g\n",
                  variant_name(p.variant()), p.M(), (long long)p.b_inv(), p.L(), p.raw().rho, p.w0());
    os << buf;
    os << "window " << env.window().n << "\n";
    os << "seed " << env.seed() << "\n";
    env.window().for_each([&](BlockId z) {
        for (const auto& s : env.block_nonempty_sites(z)) {
            std::snprintf(buf, sizeof buf, "site %lld %lld %.17g %.17g", (long long)s.site.x,
                          (long long)s.site.y, s.mass, s.total_length);
            os << buf;
            for (std::size_t i = 0; i < s.segments.size(); ++i) {
                std::snprintf(buf, sizeof buf, " %.17g %.17g %.17g %.17g %.17g", s.segments[i].a.x,
                              s.segments[i].a.y, s.segments[i].b.x, s.segments[i].b.y, s.cum[i]);
                os << buf;
            }
            os << "\n";
        }
    });
}

}  // namespace coxlab
