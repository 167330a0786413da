#include "coxlab/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "coxlab/error.hpp"

namespace coxlab {

namespace {

struct CellKey {
    std::int64_t x = 0;
    std::int64_t y = 0;
    friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& c) const {
        std::uint64_t h = std::uint64_t(c.x) * 0x9e3779b97f4a7c15ull;
        h ^= std::uint64_t(c.y) + 0x517cc1b727220a95ull + (h << 6) + (h >> 2);
        return std::size_t(h);
    }
};

double dist2(const Point2& a, const Point2& b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Incremental cluster structure: points are inserted into a spatial hash
// with cell side 2r, and each new point is united with every earlier point
// at distance <= 2r (only the 3x3 cell neighborhood can contain one).
class ClusterBuilder {
public:
    ClusterBuilder(double ball_radius) : r_(ball_radius), labels_(0) {
        if (!(ball_radius > 0.0)) {
            throw Error(ErrorCode::RANGE, "ball_radius must be positive");
        }
    }

    std::uint32_t add(const Point2& p) {
        std::uint32_t idx = std::uint32_t(points_.size());
        points_.push_back(p);
        labels_.add();
        double cell = 2.0 * r_;
        CellKey key{std::int64_t(std::floor(p.x / cell)), std::int64_t(std::floor(p.y / cell))};
        double lim = 4.0 * r_ * r_;
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = grid_.find(CellKey{key.x + dx, key.y + dy});
                if (it == grid_.end()) continue;
                for (std::uint32_t j : it->second) {
                    if (dist2(p, points_[j]) <= lim) labels_.unite(idx, j);
                }
            }
        }
        grid_[key].push_back(idx);
        return idx;
    }

    const std::vector<Point2>& points() const { return points_; }
    ClusterLabels& labels() { return labels_; }

private:
    double r_;
    std::vector<Point2> points_;
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> grid_;
    ClusterLabels labels_;
};

}  // namespace

ClusterLabels::ClusterLabels(std::size_t n) {
    parent_.resize(n);
    rank_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) parent_[i] = std::uint32_t(i);
}

std::uint32_t ClusterLabels::add() {
    std::uint32_t idx = std::uint32_t(parent_.size());
    parent_.push_back(idx);
    rank_.push_back(0);
    return idx;
}

std::uint32_t ClusterLabels::find(std::uint32_t i) const {
    while (parent_[i] != i) {
        parent_[i] = parent_[parent_[i]];  // path halving
        i = parent_[i];
    }
    return i;
}

void ClusterLabels::unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
}

std::vector<std::uint32_t> ClusterLabels::cluster_ids() const {
    std::vector<std::uint32_t> ids(parent_.size(), std::uint32_t(-1));
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) {
        std::uint32_t root = find(std::uint32_t(i));
        if (ids[root] == std::uint32_t(-1)) ids[root] = next++;
        ids[i] = ids[root];
    }
    return ids;
}

ClusterLabels build_clusters(const CoxConfiguration& config, double ball_radius) {
    ClusterBuilder builder(ball_radius);
    for (const CoxPoint& p : config.points) builder.add(p.pos);
    return std::move(builder.labels());
}

double RegionSpec::distance(const Point2& p) const {
    double ax = std::fabs(p.x), ay = std::fabs(p.y);
    if (kind == RegionKind::Box) {
        double dx = std::max(0.0, ax - a);
        double dy = std::max(0.0, ay - a);
        return std::hypot(dx, dy);
    }
    // Annulus: sup-norm band [a-2M, a-M] between two centered squares.
    double outer = a - M, inner = a - 2.0 * M;
    double s = std::max(ax, ay);
    if (s > outer) {
        double dx = std::max(0.0, ax - outer);
        double dy = std::max(0.0, ay - outer);
        return std::hypot(dx, dy);
    }
    if (s < inner) return inner - s;  // axis-aligned move to the inner square's boundary
    return 0.0;
}

namespace {

// Sup-norm radial extent of a region: [0, a] for a box, (a-2M, a-M] for an
// annulus (open at the inner edge). Centered regions overlap iff their
// extents do.
struct Extent {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;
};

Extent region_extent(const RegionSpec& r) {
    if (r.kind == RegionKind::Box) {
        if (!(r.a > 0.0)) throw Error(ErrorCode::RANGE, "box region needs a > 0");
        return Extent{0.0, r.a, false};
    }
    if (!(r.a > 2.0 * r.M) || !(r.M > 0.0)) {
        throw Error(ErrorCode::RANGE, "annulus region needs a > 2M > 0");
    }
    return Extent{r.a - 2.0 * r.M, r.a - r.M, true};
}

void check_disjoint(const RegionSpec& A, const RegionSpec& B) {
    Extent a = region_extent(A);
    Extent b = region_extent(B);
    bool a_reaches_b = a.lo_open ? a.lo < b.hi : a.lo <= b.hi;
    bool b_reaches_a = b.lo_open ? b.lo < a.hi : b.lo <= a.hi;
    if (a_reaches_b && b_reaches_a) {
        throw Error(ErrorCode::REGIONS_OVERLAP, "connection regions overlap");
    }
}

}  // namespace

bool connects(const CoxConfiguration& config, const ClusterLabels& labels, const RegionSpec& A,
              const RegionSpec& B, double ball_radius) {
    if (!(ball_radius > 0.0)) throw Error(ErrorCode::RANGE, "ball_radius must be positive");
    if (labels.size() != config.points.size()) {
        throw Error(ErrorCode::RANGE, "cluster labels do not match the configuration");
    }
    check_disjoint(A, B);
    std::unordered_set<std::uint32_t> near_a;
    for (std::uint32_t i = 0; i < config.points.size(); ++i) {
        if (A.distance(config.points[i].pos) <= ball_radius) near_a.insert(labels.find(i));
    }
    if (near_a.empty()) return false;
    for (std::uint32_t i = 0; i < config.points.size(); ++i) {
        if (B.distance(config.points[i].pos) <= ball_radius &&
            near_a.count(labels.find(i)) != 0) {
            return true;
        }
    }
    return false;
}

namespace {

std::vector<BlockId> blocks_up_to(std::int64_t n, const BlockWindow& window) {
    std::vector<BlockId> out;
    out.reserve(std::size_t(4 * n * n));
    for (std::int64_t x = -n; x < n; ++x) {
        for (std::int64_t y = -n; y < n; ++y) {
            BlockId z{x, y};
            if (window.contains(z)) out.push_back(z);
        }
    }
    return out;
}

void require_scale(const Driver& driver, std::int64_t n) {
    if (n < 5) throw Error(ErrorCode::RANGE, "f_n needs n >= 5 (theta_i = 1 below that)");
    if (driver.window().n < n) {
        throw Error(ErrorCode::WINDOW_TOO_SMALL, "window does not cover Lambda_{Mn}");
    }
}

}  // namespace

bool evaluate_f_n(const Driver& driver, const Environment& env, double lambda, std::int64_t n) {
    return evaluate_f_multi(driver, env, lambda, {n})[0];
}

std::vector<bool> evaluate_f_multi(const Driver& driver, const Environment& env, double lambda,
                                   const std::vector<std::int64_t>& n_list) {
    if (n_list.empty()) return {};
    std::int64_t n_max = 0;
    for (std::int64_t n : n_list) {
        require_scale(driver, n);
        n_max = std::max(n_max, n);
    }
    const ValidatedParams& p = driver.params();
    CoxConfiguration config =
        realize_blocks(driver, env, lambda, blocks_up_to(n_max, driver.window()));
    ClusterLabels labels = build_clusters(config, p.ball_radius());
    RegionSpec origin = RegionSpec::box(3.0 * p.M());
    std::vector<bool> out;
    out.reserve(n_list.size());
    for (std::int64_t n : n_list) {
        out.push_back(connects(config, labels, origin,
                               RegionSpec::annulus(p.M() * double(n), p.M()), p.ball_radius()));
    }
    return out;
}

std::vector<bool> evaluate_f_n_lambdas(const Driver& driver, const Environment& env,
                                       const std::vector<double>& lambda_list, std::int64_t n) {
    if (lambda_list.empty()) return {};
    require_scale(driver, n);
    const ValidatedParams& p = driver.params();
    double lambda_top = *std::max_element(lambda_list.begin(), lambda_list.end());
    CoxConfiguration full =
        realize_blocks(driver, env, lambda_top, blocks_up_to(n, driver.window()));
    RegionSpec origin = RegionSpec::box(3.0 * p.M());
    RegionSpec target = RegionSpec::annulus(p.M() * double(n), p.M());
    std::vector<bool> out;
    out.reserve(lambda_list.size());
    for (double lambda : lambda_list) {
        if (lambda == 0.0) {
            out.push_back(false);
            continue;
        }
        CoxConfiguration config;
        config.lambda = lambda;
        for (const CoxPoint& pt : full.points)
            if (pt.t <= lambda) config.points.push_back(pt);
        ClusterLabels labels = build_clusters(config, p.ball_radius());
        out.push_back(connects(config, labels, origin, target, p.ball_radius()));
    }
    return out;
}

ExplorationResult explore(const Driver& driver, const Environment& env, double lambda,
                          std::int64_t n, std::int64_t m, bool trace) {
    require_scale(driver, n);
    if (m < 6 || m > n - 3) {
        throw Error(ErrorCode::BAD_M, "exploration scale m must satisfy 6 <= m <= n - 3");
    }
    const ValidatedParams& p = driver.params();
    double r = p.ball_radius();
    RegionSpec origin = RegionSpec::box(3.0 * p.M());
    RegionSpec target = RegionSpec::annulus(p.M() * double(n), p.M());
    RegionSpec seed_band = RegionSpec::annulus(p.M() * double(m), p.M());

    // Universe of revealable blocks: the tiling of Lambda_{Mn} (the event is
    // local to it), intersected with the driver's window.
    auto in_universe = [&](const BlockId& z) {
        return block_sup_norm(z) <= n && driver.window().contains(z);
    };

    ClusterBuilder builder(r);
    std::unordered_set<BlockId, BlockIdHash> revealed;
    std::unordered_map<std::uint32_t, bool> root_cache;
    ExplorationResult result;

    // per-point region proximity, updated incrementally
    std::vector<char> near_origin, near_target, near_seed;

    auto reveal_block = [&](const BlockId& z) {
        if (!in_universe(z) || revealed.count(z)) return;
        revealed.insert(z);
        result.trace.push_back(z);
        CoxConfiguration cfg = realize_blocks(driver, env, lambda, {z});
        for (const CoxPoint& cp : cfg.points) {
            builder.add(cp.pos);
            near_origin.push_back(origin.distance(cp.pos) <= r);
            near_target.push_back(target.distance(cp.pos) <= r);
            near_seed.push_back(seed_band.distance(cp.pos) <= r);
        }
    };

    auto crossing_found = [&]() {
        ClusterLabels& labels = builder.labels();
        std::unordered_set<std::uint32_t> roots;
        for (std::uint32_t i = 0; i < near_origin.size(); ++i) {
            if (near_origin[i]) roots.insert(labels.find(i));
        }
        if (roots.empty()) return false;
        for (std::uint32_t i = 0; i < near_target.size(); ++i) {
            if (near_target[i] && roots.count(labels.find(i))) return true;
        }
        return false;
    };

    // S = points of clusters meeting the seed band ∂Λ_{Mm}
    auto seed_roots = [&]() {
        ClusterLabels& labels = builder.labels();
        std::unordered_set<std::uint32_t> roots;
        for (std::uint32_t i = 0; i < near_seed.size(); ++i) {
            if (near_seed[i]) roots.insert(labels.find(i));
        }
        return roots;
    };

    // step (i): reveal the shell || |z|_inf - m || <= 3
    for (std::int64_t x = -(m + 3); x < m + 3; ++x) {
        for (std::int64_t y = -(m + 3); y < m + 3; ++y) {
            BlockId z{x, y};
            if (std::llabs(block_sup_norm(z) - m) <= 3) reveal_block(z);
        }
    }

    auto fully_revealed = [&](const BlockId& z) {
        for (const BlockId& w : block_neighborhood(z, 2)) {
            if (in_universe(w) && !revealed.count(w)) return false;
        }
        return true;
    };

    auto block_of_point = [&](const Point2& pt) {
        return BlockId{std::int64_t(std::floor(pt.x / p.M())), std::int64_t(std::floor(pt.y / p.M()))};
    };

    bool outcome = crossing_found();
    while (!outcome) {
        // blocks of S-points that are revealed but whose I^{++} is not
        std::unordered_set<std::uint32_t> sroots = seed_roots();
        ClusterLabels& labels = builder.labels();
        const std::vector<Point2>& points = builder.points();
        BlockId best{0, 0};
        bool have_best = false;
        std::int64_t best_dist = std::numeric_limits<std::int64_t>::max();
        std::unordered_set<BlockId, BlockIdHash> considered;
        for (std::uint32_t i = 0; i < points.size(); ++i) {
            if (!sroots.count(labels.find(i))) continue;
            BlockId z = block_of_point(points[i]);
            if (!considered.insert(z).second) continue;
            if (!revealed.count(z) || fully_revealed(z)) continue;
            std::int64_t d = std::llabs(block_sup_norm(z) - m);
            if (!have_best || d < best_dist ||
                (d == best_dist && std::pair(z.x, z.y) < std::pair(best.x, best.y))) {
                best = z;
                best_dist = d;
                have_best = true;
            }
        }
        if (!have_best) break;
        for (const BlockId& w : block_neighborhood(best, 2)) reveal_block(w);
        ++result.steps;
        outcome = crossing_found();
    }

    result.outcome = outcome;
    result.revealed.assign(revealed.begin(), revealed.end());
    std::sort(result.revealed.begin(), result.revealed.end());
    if (!trace) result.trace.clear();
    return result;
}

}  // namespace coxlab
