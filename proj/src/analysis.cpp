#include "coxlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "coxlab/environment.hpp"
#include "coxlab/error.hpp"
#include "coxlab/percolation.hpp"
#include "coxlab/rng.hpp"
#include "coxlab/sampler.hpp"

namespace coxlab {

namespace {

constexpr int kPivSamplesPerBlock = 2;  // insertion probes per block per trial

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t t) { return mix64(seed, t); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// One trial's randomness: shared environment + driver for coupled
// evaluations at several intensities or scales.
struct Trial {
    Environment env;
    Driver drv;

    Trial(const ValidatedParams& p, std::int64_t window_n, double lambda_max, std::uint64_t seed,
          std::uint64_t t)
        : env(p, BlockWindow{window_n}, trial_seed(seed, t)),
          // the mark ceiling also covers the params' nominal intensity
          drv(p, BlockWindow{window_n}, trial_seed(seed, t), std::max(lambda_max, p.lambda())) {}
};

std::vector<BlockId> universe_blocks(std::int64_t n, const BlockWindow& w) {
    std::vector<BlockId> out;
    for (std::int64_t x = -n; x < n; ++x) {
        for (std::int64_t y = -n; y < n; ++y) {
            if (w.contains(BlockId{x, y})) out.push_back(BlockId{x, y});
        }
    }
    return out;
}

struct CellKey {
    std::int64_t x = 0, y = 0;
    friend bool operator==(const CellKey&, const CellKey&) = default;
};
struct CellKeyHash {
    std::size_t operator()(const CellKey& c) const {
        std::uint64_t h = std::uint64_t(c.x) * 0x9e3779b97f4a7c15ull;
        h ^= std::uint64_t(c.y) + 0x517cc1b727220a95ull + (h << 6) + (h >> 2);
        return std::size_t(h);
    }
};

// A realized configuration on the Lambda_{Mn} block universe together with
// its clusters and region-proximity data, reusable for cheap "what changes
// if ..." probes.
struct Base {
    const ValidatedParams& p;
    std::int64_t n;
    double r;
    RegionSpec A, B;
    CoxConfiguration config;
    ClusterLabels labels{0};
    bool outcome = false;
    std::unordered_set<std::uint32_t> rootsA, rootsB;
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> hash;

    Base(const Trial& trial, double lambda, std::int64_t n_)
        : p(trial.drv.params()),
          n(n_),
          r(p.ball_radius()),
          A(RegionSpec::box(3.0 * p.M())),
          B(RegionSpec::annulus(p.M() * double(n_), p.M())) {
        config = realize_blocks(trial.drv, trial.env, lambda,
                                universe_blocks(n, trial.drv.window()));
        labels = build_clusters(config, r);
        double cell = 2.0 * r;
        for (std::uint32_t i = 0; i < config.points.size(); ++i) {
            const Point2& pt = config.points[i].pos;
            if (A.distance(pt) <= r) rootsA.insert(labels.find(i));
            if (B.distance(pt) <= r) rootsB.insert(labels.find(i));
            hash[CellKey{std::int64_t(std::floor(pt.x / cell)),
                         std::int64_t(std::floor(pt.y / cell))}]
                .push_back(i);
        }
        outcome = false;
        for (std::uint32_t root : rootsA) {
            if (rootsB.count(root)) {
                outcome = true;
                break;
            }
        }
    }

    // Would one extra point at `pos` flip the outcome from false to true?
    // (The event is increasing, so only 0 -> 1 flips are possible.)
    bool insertion_flips(const Point2& pos) const {
        if (outcome) return false;
        bool touchesA = A.distance(pos) <= r;
        bool touchesB = B.distance(pos) <= r;
        if (touchesA && touchesB) return true;
        double cell = 2.0 * r;
        double lim = 4.0 * r * r;
        CellKey key{std::int64_t(std::floor(pos.x / cell)),
                    std::int64_t(std::floor(pos.y / cell))};
        for (std::int64_t dx = -1; dx <= 1 && !(touchesA && touchesB); ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = hash.find(CellKey{key.x + dx, key.y + dy});
                if (it == hash.end()) continue;
                for (std::uint32_t i : it->second) {
                    double ddx = pos.x - config.points[i].pos.x;
                    double ddy = pos.y - config.points[i].pos.y;
                    if (ddx * ddx + ddy * ddy > lim) continue;
                    std::uint32_t root = labels.find(i);
                    touchesA = touchesA || rootsA.count(root) != 0;
                    touchesB = touchesB || rootsB.count(root) != 0;
                    if (touchesA && touchesB) return true;
                }
            }
        }
        return touchesA && touchesB;
    }

    // f_n after replacing the realization of `changed` blocks with the one
    // produced by (drv2, env2). Unchanged blocks keep their base points.
    bool eval_with_changed(const Driver& drv2, const Environment& env2, double lambda,
                           const std::vector<BlockId>& changed) const {
        std::unordered_set<BlockId, BlockIdHash> dirty;
        std::vector<BlockId> to_realize;
        for (const BlockId& z : changed) {
            if (block_sup_norm(z) <= n && drv2.window().contains(z) && dirty.insert(z).second) {
                to_realize.push_back(z);
            }
        }
        if (to_realize.empty()) return outcome;
        CoxConfiguration cfg;
        cfg.lambda = lambda;
        for (const CoxPoint& pt : config.points) {
            if (!dirty.count(block_of_site(pt.site, p))) cfg.points.push_back(pt);
        }
        CoxConfiguration fresh = realize_blocks(drv2, env2, lambda, to_realize);
        cfg.points.insert(cfg.points.end(), fresh.points.begin(), fresh.points.end());
        ClusterLabels l2 = build_clusters(cfg, r);
        return connects(cfg, l2, A, B, r);
    }
};

// Position of the point created by inserting mark (r, u) at site x, if the
// mark is accepted. For WIDTH the rejection sampler is replayed by
// realizing the modified block and picking out the inserted mark (index 0:
// inserted marks carry t = 0 and sort first).
std::optional<Point2> inserted_point(const Trial& trial, double lambda, const SiteId& x,
                                     double r, double u) {
    EnvironmentSite s = trial.env.site(x);
    if (s.mass <= 0.0 || u > s.mass) return std::nullopt;
    if (trial.drv.params().variant() != Variant::WIDTH) return inverse_position(s, r);
    Driver drv2 = trial.drv.with_inserted_mark(x, r, u);
    CoxConfiguration cfg = realize_blocks(drv2, trial.env, lambda,
                                          {block_of_site(x, trial.drv.params())});
    for (const CoxPoint& pt : cfg.points) {
        if (pt.site == x && pt.mark_index == 0) return pt.pos;
    }
    return std::nullopt;  // proposal cap exhausted
}

void require_trials(std::uint64_t trials) {
    if (trials < 1) throw Error(ErrorCode::RANGE, "trials must be >= 1");
}

ThetaEstimate convention_row(double lambda, std::int64_t n, std::uint64_t trials,
                             std::uint64_t seed) {
    return ThetaEstimate{lambda, n, trials, trials, 1.0, 1.0, 1.0, seed};
}

ThetaEstimate make_row(double lambda, std::int64_t n, std::uint64_t trials, std::uint64_t hits,
                       std::uint64_t seed) {
    ThetaEstimate row{lambda, n, trials, hits, double(hits) / double(trials), 0.0, 0.0, seed};
    wilson_ci(hits, trials, row.ci_lo, row.ci_hi);
    return row;
}

}  // namespace

ThetaEstimate estimate_theta(const ValidatedParams& p, double lambda, std::int64_t n,
                             std::uint64_t trials, std::uint64_t seed) {
    require_trials(trials);
    if (n < 1) throw Error(ErrorCode::RANGE, "n must be >= 1");
    if (n <= 4) return convention_row(lambda, n, trials, seed);
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Trial trial(p, n, lambda, seed, t);
        hits += evaluate_f_n(trial.drv, trial.env, lambda, n);
    }
    return make_row(lambda, n, trials, hits, seed);
}

std::vector<ThetaEstimate> estimate_theta_multi(const ValidatedParams& p, double lambda,
                                                const std::vector<std::int64_t>& n_list,
                                                std::uint64_t trials, std::uint64_t seed) {
    require_trials(trials);
    std::vector<std::int64_t> scales;
    std::int64_t n_max = 1;
    for (std::int64_t n : n_list) {
        if (n < 1) throw Error(ErrorCode::RANGE, "n must be >= 1");
        if (n >= 5) scales.push_back(n);
        n_max = std::max(n_max, n);
    }
    std::vector<std::uint64_t> hits(scales.size(), 0);
    if (!scales.empty()) {
        for (std::uint64_t t = 0; t < trials; ++t) {
            Trial trial(p, n_max, lambda, seed, t);
            std::vector<bool> f = evaluate_f_multi(trial.drv, trial.env, lambda, scales);
            for (std::size_t i = 0; i < scales.size(); ++i) hits[i] += f[i];
        }
    }
    std::vector<ThetaEstimate> rows;
    std::size_t next = 0;
    for (std::int64_t n : n_list) {
        if (n <= 4) {
            rows.push_back(convention_row(lambda, n, trials, seed));
        } else {
            rows.push_back(make_row(lambda, n, trials, hits[next++], seed));
        }
    }
    return rows;
}

std::vector<ThetaEstimate> theta_sweep(const ValidatedParams& p,
                                       const std::vector<double>& lambda_list, std::int64_t n,
                                       std::uint64_t trials, std::uint64_t seed) {
    require_trials(trials);
    if (lambda_list.empty()) return {};
    if (n < 1) throw Error(ErrorCode::RANGE, "n must be >= 1");
    double lambda_max = *std::max_element(lambda_list.begin(), lambda_list.end());
    std::vector<std::uint64_t> hits(lambda_list.size(), 0);
    if (n >= 5) {
        for (std::uint64_t t = 0; t < trials; ++t) {
            Trial trial(p, n, lambda_max, seed, t);
            auto outcomes = evaluate_f_n_lambdas(trial.drv, trial.env, lambda_list, n);
            for (std::size_t i = 0; i < lambda_list.size(); ++i) hits[i] += outcomes[i];
        }
    }
    std::vector<ThetaEstimate> rows;
    for (std::size_t i = 0; i < lambda_list.size(); ++i) {
        rows.push_back(n <= 4 ? convention_row(lambda_list[i], n, trials, seed)
                              : make_row(lambda_list[i], n, trials, hits[i], seed));
    }
    return rows;
}

std::string theta_table_csv(const std::vector<ThetaEstimate>& rows) {
    std::ostringstream os;
    os << "lambda,n,trials,hits,theta,ci_lo,ci_hi,seed\n";
    for (const ThetaEstimate& r : rows) {
        os << fmt(r.lambda) << ',' << r.n << ',' << r.trials << ',' << r.hits << ','
           << fmt(r.theta) << ',' << fmt(r.ci_lo) << ',' << fmt(r.ci_hi) << ',' << r.seed << '\n';
    }
    return os.str();
}

LambdaCBracket estimate_lambda_c(const ValidatedParams& p, std::int64_t n, std::uint64_t trials,
                                 double threshold, double tol, double lambda_lo, double lambda_hi,
                                 std::uint64_t seed) {
    require_trials(trials);
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorCode::RANGE, "threshold must be in (0,1)");
    }
    if (!(tol > 0.0)) throw Error(ErrorCode::RANGE, "tol must be positive");
    if (!(lambda_lo >= 0.0 && lambda_hi > lambda_lo)) {
        throw Error(ErrorCode::RANGE, "need 0 <= lambda_lo < lambda_hi");
    }
    if (n < 5) throw Error(ErrorCode::RANGE, "lambda_c bisection needs n >= 5");

    // Coupled estimate: every probe reuses the same per-trial randomness
    // with a common mark ceiling, so theta-hat is exactly monotone.
    auto theta_at = [&](double lambda) {
        std::uint64_t hits = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            Trial trial(p, n, lambda_hi, seed, t);
            hits += evaluate_f_n(trial.drv, trial.env, lambda, n);
        }
        return double(hits) / double(trials);
    };

    LambdaCBracket out;
    out.n = n;
    out.trials = trials;
    out.threshold = threshold;
    out.seed = seed;
    out.lo = lambda_lo;
    out.hi = lambda_hi;
    out.theta_lo = theta_at(lambda_lo);
    out.theta_hi = theta_at(lambda_hi);
    if (out.theta_lo > threshold || out.theta_hi < threshold) {
        throw Error(ErrorCode::NO_SIGN_CHANGE,
                    "theta estimates at both bracket endpoints are on the same side of the "
                    "threshold");
    }
    while (out.hi - out.lo > tol && out.iterations < 64) {
        double mid = 0.5 * (out.lo + out.hi);
        double tm = theta_at(mid);
        if (tm >= threshold) {
            out.hi = mid;
            out.theta_hi = tm;
        } else {
            out.lo = mid;
            out.theta_lo = tm;
        }
        ++out.iterations;
    }
    return out;
}

SharpnessReport fit_sharpness(const ValidatedParams& p, const std::vector<double>& lambda_list,
                              const std::vector<std::int64_t>& n_list, std::uint64_t trials,
                              std::uint64_t seed) {
    require_trials(trials);
    if (lambda_list.size() < 2 || n_list.empty()) {
        throw Error(ErrorCode::RANGE, "need at least two lambdas and one scale");
    }
    std::vector<double> lambdas = lambda_list;
    std::sort(lambdas.begin(), lambdas.end());
    std::int64_t n_max = *std::max_element(n_list.begin(), n_list.end());

    SharpnessReport rep;
    double tol = std::max((lambdas.back() - lambdas.front()) / 128.0, 1e-9);
    rep.bracket = estimate_lambda_c(p, n_max, trials, 0.5, tol, lambdas.front(), lambdas.back(),
                                    mix64(seed, 0x5c));

    // Subcritical rows: log theta_n vs n at each lambda below the bracket.
    std::uint64_t idx = 0;
    for (double lambda : lambdas) {
        ++idx;
        if (lambda >= rep.bracket.lo) continue;
        std::vector<ThetaEstimate> rows =
            estimate_theta_multi(p, lambda, n_list, trials, mix64(seed, idx));
        rep.table.insert(rep.table.end(), rows.begin(), rows.end());
        SubcriticalRow sub;
        sub.lambda = lambda;
        std::vector<double> xs, ys;
        for (const ThetaEstimate& r : rows) {
            if (r.n >= 5 && r.hits > 0) {
                xs.push_back(double(r.n));
                ys.push_back(std::log(r.theta));
                ++sub.points;
            }
        }
        if (xs.size() < 2) {
            sub.note = "INSUFFICIENT_DATA: fewer than two nonzero theta values";
        } else {
            try {
                LinearFit fit = linear_fit(xs, ys);
                sub.valid = true;
                sub.slope = fit.slope;
                sub.slope_se = fit.slope_se;
                sub.r2 = fit.r2;
            } catch (const Error& e) {
                sub.note = std::string("INSUFFICIENT_DATA: ") + e.what();
            }
        }
        rep.subcritical.push_back(sub);
    }

    // Supercritical regression: theta_{n_max} vs (lambda - lambda_c hat)
    // just above the bracket, coupled across the grid.
    std::vector<double> upper;
    for (double lambda : lambdas) {
        if (lambda > rep.bracket.hi) upper.push_back(lambda);
    }
    if (upper.size() >= 2) {
        std::vector<ThetaEstimate> rows =
            theta_sweep(p, upper, n_max, trials, mix64(seed, 0xa7));
        rep.table.insert(rep.table.end(), rows.begin(), rows.end());
        std::vector<double> xs, ys;
        for (const ThetaEstimate& r : rows) {
            xs.push_back(r.lambda - rep.bracket.midpoint());
            ys.push_back(r.theta);
        }
        try {
            LinearFit fit = linear_fit(xs, ys);
            rep.supercritical_valid = true;
            rep.super_slope = fit.slope;
            rep.super_slope_se = fit.slope_se;
            rep.super_intercept = fit.intercept;
            rep.super_r2 = fit.r2;
            rep.super_points = xs.size();
        } catch (const Error& e) {
            rep.note = std::string("supercritical fit unavailable: ") + e.what();
        }
    } else {
        rep.note = "supercritical fit unavailable: fewer than two lambdas above the bracket";
    }
    return rep;
}

std::string SharpnessReport::to_text() const {
    std::ostringstream os;
    os << "sharpness_report v1\n";
    os << "lambda_c_lo=" << fmt(bracket.lo) << "\nlambda_c_hi=" << fmt(bracket.hi)
       << "\nlambda_c_note=finite-size bisection proxy at n=" << bracket.n
       << " threshold=" << fmt(bracket.threshold) << "\n";
    for (const SubcriticalRow& s : subcritical) {
        os << "subcritical lambda=" << fmt(s.lambda) << " valid=" << (s.valid ? 1 : 0)
           << " slope=" << fmt(s.slope) << " slope_se=" << fmt(s.slope_se) << " r2=" << fmt(s.r2)
           << " points=" << s.points;
        if (!s.note.empty()) os << " note=" << s.note;
        os << "\n";
    }
    os << "supercritical valid=" << (supercritical_valid ? 1 : 0) << " slope=" << fmt(super_slope)
       << " slope_se=" << fmt(super_slope_se) << " intercept=" << fmt(super_intercept)
       << " r2=" << fmt(super_r2) << " points=" << super_points << "\n";
    if (!note.empty()) os << "note=" << note << "\n";
    return os.str();
}

InfluenceEstimate estimate_influences(const ValidatedParams& p, double lambda, std::int64_t n,
                                      const BlockId& z, std::uint64_t trials, std::uint64_t seed) {
    require_trials(trials);
    if (n < 5) throw Error(ErrorCode::RANGE, "influence estimation needs n >= 5");
    // Blocks modestly beyond Lambda_{M(n+2)} are admitted so the exact-zero
    // locality of f_n is observable; far-away targets are a caller error.
    if (block_sup_norm(z) > 2 * n) {
        throw Error(ErrorCode::OUT_OF_WINDOW, "target block far outside Lambda_{M(n+2)}");
    }
    std::int64_t wn = std::max(n + 3, block_sup_norm(z) + 1);
    std::vector<BlockId> env_changed = block_neighborhood(z, 1);
    std::vector<SiteId> sites = sites_of_block(z, p);

    InfluenceEstimate out;
    out.z = z;
    out.lambda = lambda;
    out.n = n;
    out.trials = trials;
    std::uint64_t cx = 0, cy = 0, cj = 0;
    double piv_sum = 0.0, piv_sq = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Trial trial(p, wn, lambda, seed, t);
        Base base(trial, lambda, n);

        Driver drv_x = trial.drv.with_resampled_block(z, 1);
        Environment env_y = trial.env.with_resampled_y(z, 1);
        cx += base.eval_with_changed(drv_x, trial.env, lambda, {z}) != base.outcome;
        cy += base.eval_with_changed(trial.drv, env_y, lambda, env_changed) != base.outcome;
        cj += base.eval_with_changed(drv_x, env_y, lambda, env_changed) != base.outcome;

        RandomStream alg(StreamKey{trial_seed(seed, t), z.x, z.y, StreamPurpose::Alg, 0, t, 7, 0});
        int flips = 0;
        const int k = 4;
        for (int s = 0; s < k; ++s) {
            const SiteId& x = sites[alg.next_u64() % sites.size()];
            double r = alg.next_double();
            double u = alg.uniform(0.0, p.rho());
            std::optional<Point2> pos = inserted_point(trial, lambda, x, r, u);
            flips += pos && base.insertion_flips(*pos);
        }
        double mean = double(flips) / double(k);
        piv_sum += mean;
        piv_sq += mean * mean;
    }
    out.inf_x = double(cx) / double(trials);
    out.inf_x_se = binomial_se(cx, trials);
    out.inf_y = double(cy) / double(trials);
    out.inf_y_se = binomial_se(cy, trials);
    out.inf_joint = double(cj) / double(trials);
    out.inf_joint_se = binomial_se(cj, trials);
    double mean = piv_sum / double(trials);
    double var = std::max(0.0, piv_sq / double(trials) - mean * mean);
    out.piv_integral = p.rho() * mean;
    out.piv_integral_se = p.rho() * std::sqrt(var / double(trials));
    return out;
}

double RevealmentEstimate::delta(const BlockId& z) const {
    auto it = counts.find(z);
    return trials == 0 ? 0.0 : double(it == counts.end() ? 0 : it->second) / double(trials);
}

double RevealmentEstimate::se(const BlockId& z) const {
    auto it = counts.find(z);
    return binomial_se(it == counts.end() ? 0 : it->second, trials);
}

RevealmentEstimate estimate_revealment(const ValidatedParams& p, double lambda, std::int64_t n,
                                       std::uint64_t trials, std::uint64_t seed) {
    require_trials(trials);
    if (n < 16) throw Error(ErrorCode::N_TOO_SMALL, "revealment bound needs n >= 16");
    RevealmentEstimate out;
    out.lambda = lambda;
    out.n = n;
    out.trials = trials;
    out.seed = seed;
    std::int64_t m_count = n - 8;  // |{6, ..., n-3}|
    for (std::uint64_t t = 0; t < trials; ++t) {
        Trial trial(p, n, lambda, seed, t);
        RandomStream alg(StreamKey{trial_seed(seed, t), 0, 0, StreamPurpose::Alg, 0, t, 0xa1, 0});
        std::int64_t m = 6 + std::int64_t(alg.next_u64() % std::uint64_t(m_count));
        ExplorationResult res = explore(trial.drv, trial.env, lambda, n, m);
        out.hits += res.outcome;
        for (const BlockId& z : res.revealed) ++out.counts[z];
    }
    return out;
}

const char* inequality_kind_name(InequalityKind kind) {
    switch (kind) {
        case InequalityKind::OSSS: return "OSSS";
        case InequalityKind::EfronStein: return "EFRON_STEIN";
        case InequalityKind::Russo: return "RUSSO";
        case InequalityKind::PivLemma: return "PIV_LEMMA";
        case InequalityKind::InfLemma: return "INF_LEMMA";
        case InequalityKind::Differential: return "DIFFERENTIAL";
    }
    return "?";
}

InequalityKind inequality_kind_from_name(const std::string& name) {
    for (InequalityKind k :
         {InequalityKind::OSSS, InequalityKind::EfronStein, InequalityKind::Russo,
          InequalityKind::PivLemma, InequalityKind::InfLemma, InequalityKind::Differential}) {
        if (name == inequality_kind_name(k)) return k;
    }
    throw Error(ErrorCode::RANGE, "unknown inequality kind: " + name);
}

namespace {

double combine_se(double a, double b) { return std::sqrt(a * a + b * b); }

// Joint-resampling influence of every listed block, sharing one base
// realization per trial. Returns per-block flip counts for the requested
// resample modes (bit 0: driver, bit 1: environment).
struct PerBlockCounts {
    std::vector<std::uint64_t> driver_only, env_only, joint;
};

PerBlockCounts count_influences(const ValidatedParams& p, double lambda, std::int64_t n,
                                const std::vector<BlockId>& targets, std::uint64_t trials,
                                std::uint64_t seed, bool want_driver, bool want_env,
                                bool want_joint) {
    PerBlockCounts out;
    out.driver_only.assign(targets.size(), 0);
    out.env_only.assign(targets.size(), 0);
    out.joint.assign(targets.size(), 0);
    std::int64_t wn = n + 3;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Trial trial(p, wn, lambda, seed, t);
        Base base(trial, lambda, n);
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const BlockId& z = targets[i];
            std::vector<BlockId> env_changed = block_neighborhood(z, 1);
            if (want_driver) {
                Driver d2 = trial.drv.with_resampled_block(z, 1);
                out.driver_only[i] +=
                    base.eval_with_changed(d2, trial.env, lambda, {z}) != base.outcome;
            }
            if (want_env) {
                Environment e2 = trial.env.with_resampled_y(z, 1);
                out.env_only[i] +=
                    base.eval_with_changed(trial.drv, e2, lambda, env_changed) != base.outcome;
            }
            if (want_joint) {
                Driver d2 = trial.drv.with_resampled_block(z, 1);
                Environment e2 = trial.env.with_resampled_y(z, 1);
                out.joint[i] +=
                    base.eval_with_changed(d2, e2, lambda, env_changed) != base.outcome;
            }
        }
    }
    return out;
}

InequalityReport verify_osss(const ValidatedParams& p, double lambda, std::int64_t n,
                             std::uint64_t trials, std::uint64_t seed) {
    InequalityReport rep;
    std::vector<BlockId> targets;
    std::vector<double> delta, delta_se;
    double theta, theta_se;
    if (n >= 16) {
        RevealmentEstimate rev = estimate_revealment(p, lambda, n, trials, mix64(seed, 1));
        theta = double(rev.hits) / double(trials);
        theta_se = binomial_se(rev.hits, trials);
        for (const auto& [z, c] : rev.counts) {
            targets.push_back(z);
            delta.push_back(double(c) / double(trials));
            delta_se.push_back(binomial_se(c, trials));
        }
        rep.notes = "revealment from exploration with random m";
    } else {
        // Below the exploration range the reveal-everything algorithm is
        // used: delta_z = 1 on the whole universe.
        ThetaEstimate th = estimate_theta(p, lambda, n, trials, mix64(seed, 1));
        theta = th.theta;
        theta_se = binomial_se(th.hits, th.trials);
        targets = universe_blocks(n, BlockWindow{n});
        delta.assign(targets.size(), 1.0);
        delta_se.assign(targets.size(), 0.0);
        rep.notes = "deterministic reveal-all algorithm (n too small for exploration)";
    }
    PerBlockCounts counts =
        count_influences(p, lambda, n, targets, trials, mix64(seed, 2), false, false, true);
    double rhs = 0.0, var = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double inf = double(counts.joint[i]) / double(trials);
        double inf_se = binomial_se(counts.joint[i], trials);
        rhs += 0.5 * delta[i] * inf;
        var += 0.25 * (delta[i] * inf_se * delta[i] * inf_se + inf * delta_se[i] * inf * delta_se[i]);
    }
    rep.lhs = theta * (1.0 - theta);
    rep.lhs_se = std::fabs(1.0 - 2.0 * theta) * theta_se + theta_se * theta_se;
    rep.rhs = rhs;
    rep.rhs_se = std::sqrt(var);
    rep.slack = rep.rhs - rep.lhs;
    rep.pass = rep.lhs <= rep.rhs + 3.0 * combine_se(rep.lhs_se, rep.rhs_se);
    return rep;
}

InequalityReport verify_efron_stein(const ValidatedParams& p, double lambda, std::int64_t n,
                                    std::uint64_t trials, std::uint64_t seed) {
    InequalityReport rep;
    std::vector<BlockId> targets = universe_blocks(n, BlockWindow{n});
    if (targets.size() > 256) {
        // deterministic thinning for large universes
        std::vector<BlockId> thin;
        for (std::size_t i = 0; i < targets.size(); i += targets.size() / 256 + 1) {
            thin.push_back(targets[i]);
        }
        targets = thin;
        rep.notes = "universe thinned to " + std::to_string(targets.size()) + " probe blocks";
    }
    PerBlockCounts counts =
        count_influences(p, lambda, n, targets, trials, mix64(seed, 2), true, true, true);
    double lhs = 0.0, rhs = 0.0, lvar = 0.0, rvar = 0.0;
    bool all_pass = true;
    double worst = std::numeric_limits<double>::infinity();
    BlockId worst_z{0, 0};
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double ij = double(counts.joint[i]) / double(trials);
        double ix = double(counts.driver_only[i]) / double(trials);
        double iy = double(counts.env_only[i]) / double(trials);
        double se_j = binomial_se(counts.joint[i], trials);
        double se_x = binomial_se(counts.driver_only[i], trials);
        double se_y = binomial_se(counts.env_only[i], trials);
        lhs += ij;
        rhs += ix + iy;
        lvar += se_j * se_j;
        rvar += se_x * se_x + se_y * se_y;
        double slack_z = ix + iy - ij;
        double se_z = std::sqrt(se_j * se_j + se_x * se_x + se_y * se_y);
        if (slack_z + 3.0 * se_z < 0.0) all_pass = false;
        if (slack_z < worst) {
            worst = slack_z;
            worst_z = targets[i];
        }
    }
    rep.lhs = lhs;
    rep.lhs_se = std::sqrt(lvar);
    rep.rhs = rhs;
    rep.rhs_se = std::sqrt(rvar);
    rep.slack = rhs - lhs;
    rep.pass = all_pass && rep.lhs <= rep.rhs + 3.0 * combine_se(rep.lhs_se, rep.rhs_se);
    rep.notes += (rep.notes.empty() ? "" : "; ");
    rep.notes += "worst block (" + std::to_string(worst_z.x) + "," + std::to_string(worst_z.y) +
                 ") slack " + fmt(worst);
    return rep;
}

// Shared centered-difference derivative and per-block pivotal sums.
struct RussoData {
    double deriv = 0.0, deriv_se = 0.0;
    double piv_sum = 0.0, piv_sum_se = 0.0;  // sum over x of the pivotal integral
    double theta = 0.0, theta_se = 0.0;
};

RussoData russo_data(const ValidatedParams& p, double lambda, std::int64_t n,
                     std::uint64_t trials, std::uint64_t seed, double h) {
    RussoData out;
    std::vector<BlockId> universe = universe_blocks(n, BlockWindow{n});
    double nsites = double(p.sites_per_block());
    double dsum = 0.0, dsq = 0.0, rsum = 0.0, rsq = 0.0;
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Trial trial(p, n, lambda + h, seed, t);
        bool f_minus = evaluate_f_n(trial.drv, trial.env, lambda - h, n);
        bool f_plus = evaluate_f_n(trial.drv, trial.env, lambda + h, n);
        double d = (double(f_plus) - double(f_minus)) / (2.0 * h);
        dsum += d;
        dsq += d * d;

        Base base(trial, lambda, n);
        hits += base.outcome;
        std::uint64_t flips = 0;
        for (const BlockId& z : universe) {
            std::vector<SiteId> sites = sites_of_block(z, p);
            RandomStream alg(
                StreamKey{trial_seed(seed, t), z.x, z.y, StreamPurpose::Alg, 0, t, 7, 0});
            for (int s = 0; s < kPivSamplesPerBlock; ++s) {
                const SiteId& x = sites[alg.next_u64() % sites.size()];
                double r = alg.next_double();
                double u = alg.uniform(0.0, p.rho());
                std::optional<Point2> pos = inserted_point(trial, lambda, x, r, u);
                flips += pos && base.insertion_flips(*pos);
            }
        }
        // sum over blocks of nsites * rho * (per-block flip fraction)
        double rt = nsites * p.rho() * double(flips) / double(kPivSamplesPerBlock);
        rsum += rt;
        rsq += rt * rt;
    }
    double tn = double(trials);
    out.deriv = dsum / tn;
    out.deriv_se = std::sqrt(std::max(0.0, dsq / tn - out.deriv * out.deriv) / tn);
    out.piv_sum = rsum / tn;
    out.piv_sum_se = std::sqrt(std::max(0.0, rsq / tn - out.piv_sum * out.piv_sum) / tn);
    out.theta = double(hits) / tn;
    out.theta_se = binomial_se(hits, trials);
    return out;
}

InequalityReport verify_russo(const ValidatedParams& p, double lambda, std::int64_t n,
                              std::uint64_t trials, std::uint64_t seed) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::RANGE, "RUSSO check needs lambda > 0");
    double h = 0.1 * lambda;
    RussoData data = russo_data(p, lambda, n, trials, seed, h);
    InequalityReport rep;
    rep.lhs = data.deriv;
    rep.lhs_se = data.deriv_se;
    rep.rhs = lambda * data.piv_sum;
    rep.rhs_se = lambda * data.piv_sum_se;
    rep.slack = rep.rhs - rep.lhs;
    rep.pass = std::fabs(rep.slack) <= 3.0 * combine_se(rep.lhs_se, rep.rhs_se);
    rep.notes =
        "centered difference at h=" + fmt(h) +
        "; under the unit-rate mark parametrization the derivative equals the raw pivotal sum, "
        "so the lambda-weighted form is an identity at lambda=1";
    return rep;
}

InequalityReport verify_piv_lemma(const ValidatedParams& p, double lambda, std::int64_t n,
                                  std::uint64_t trials, std::uint64_t seed) {
    BlockId z{3, 3};  // representative block with 3 <= |z|_inf <= n-3 for n >= 7
    InfluenceEstimate inf = estimate_influences(p, lambda, n, z, trials, mix64(seed, 3));
    double denom = lambda * double(p.sites_per_block()) * inf.piv_integral;
    double denom_se = lambda * double(p.sites_per_block()) * inf.piv_integral_se;
    double lambda_star = lambda * p.rho() * double(p.b_inv()) * double(p.b_inv());
    InequalityReport rep;
    rep.constant_name = "c_Piv";
    rep.lhs = inf.inf_x;
    rep.lhs_se = inf.inf_x_se;
    if (denom > 0.0) {
        rep.implied_constant = inf.inf_x / denom;
        double bound = lambda_star > 700.0 ? std::numeric_limits<double>::infinity()
                                           : 2.0 * std::exp(lambda_star);
        rep.rhs = bound * denom;
        rep.rhs_se = bound == std::numeric_limits<double>::infinity() ? 0.0 : bound * denom_se;
        rep.slack = rep.rhs - rep.lhs;
        rep.pass = rep.lhs <= rep.rhs + 3.0 * combine_se(rep.lhs_se, rep.rhs_se);
        rep.notes = "reference bound 2*exp(lambda_*) with lambda_*=" + fmt(lambda_star) +
                    "; constant reported, not asserted";
    } else {
        rep.rhs = 0.0;
        rep.slack = -rep.lhs;
        rep.pass = inf.inf_x <= 3.0 * inf.inf_x_se;
        rep.notes = "DIVISION_DEGENERATE: pivotal integral estimate is zero; constant unavailable";
    }
    return rep;
}

InequalityReport verify_inf_lemma(const ValidatedParams& p, double lambda, std::int64_t n,
                                  std::uint64_t trials, std::uint64_t seed) {
    BlockId z{3, 3};
    std::vector<BlockId> around = block_neighborhood(z, 2);
    PerBlockCounts counts =
        count_influences(p, lambda, n, around, trials, mix64(seed, 4), true, false, false);
    InfluenceEstimate inf = estimate_influences(p, lambda, n, z, trials, mix64(seed, 5));
    double denom = 0.0, dvar = 0.0;
    for (std::size_t i = 0; i < around.size(); ++i) {
        denom += double(counts.driver_only[i]) / double(trials);
        double se = binomial_se(counts.driver_only[i], trials);
        dvar += se * se;
    }
    InequalityReport rep;
    rep.constant_name = "c_Inf";
    rep.lhs = inf.inf_y;
    rep.lhs_se = inf.inf_y_se;
    rep.rhs = denom;
    rep.rhs_se = std::sqrt(dvar);
    rep.slack = denom - inf.inf_y;
    if (denom > 0.0) {
        rep.implied_constant = inf.inf_y / denom;
        rep.pass = true;
        rep.notes = "rhs is the raw influence sum over I^{++}(z); constant reported, not asserted";
    } else {
        rep.pass = inf.inf_y <= 3.0 * inf.inf_y_se;
        rep.notes = "DIVISION_DEGENERATE: influence sum over I^{++}(z) is zero; constant "
                    "unavailable";
    }
    return rep;
}

InequalityReport verify_differential(const ValidatedParams& p, double lambda, std::int64_t n,
                                     std::uint64_t trials, std::uint64_t seed) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::RANGE, "DIFFERENTIAL check needs lambda > 0");
    double h = 0.1 * lambda;
    RussoData data = russo_data(p, lambda, n, trials, seed, h);
    std::vector<std::int64_t> scales;
    for (std::int64_t s = 1; s <= n; ++s) scales.push_back(s);
    std::vector<ThetaEstimate> rows =
        estimate_theta_multi(p, lambda, scales, trials, mix64(seed, 6));
    double theta_sum = 0.0;
    for (const ThetaEstimate& r : rows) theta_sum += r.theta;
    double theta = rows.back().theta;
    InequalityReport rep;
    rep.constant_name = "c_Diff";
    rep.lhs = data.deriv;
    rep.lhs_se = data.deriv_se;
    double factor = theta_sum > 0.0 ? double(n) * theta * (1.0 - theta) / theta_sum : 0.0;
    rep.rhs = factor;
    rep.rhs_se = 0.0;
    rep.slack = rep.rhs - rep.lhs;
    if (factor > 0.0) {
        rep.implied_constant = data.deriv / factor;
        rep.pass = data.deriv + 3.0 * data.deriv_se > 0.0;
        rep.notes = "c_Diff = theta' * sum_s theta_s / (n theta (1-theta)); reported, not asserted";
    } else {
        rep.pass = true;
        rep.notes = "DIVISION_DEGENERATE: theta(1-theta) estimate is zero; constant unavailable";
    }
    return rep;
}

}  // namespace

std::string InequalityReport::to_text() const {
    std::ostringstream os;
    os << "inequality_report v1\n";
    os << "kind=" << inequality_kind_name(kind) << "\nlambda=" << fmt(lambda) << "\nn=" << n
       << "\ntrials=" << trials << "\nseed=" << seed << "\nlhs=" << fmt(lhs)
       << "\nlhs_se=" << fmt(lhs_se) << "\nrhs=" << fmt(rhs) << "\nrhs_se=" << fmt(rhs_se)
       << "\nslack=" << fmt(slack) << "\npass=" << (pass ? 1 : 0) << "\n";
    if (implied_constant) {
        os << "constant_name=" << constant_name << "\nconstant=" << fmt(*implied_constant) << "\n";
    } else if (!constant_name.empty()) {
        os << "constant_name=" << constant_name << "\nconstant=unavailable\n";
    }
    if (!notes.empty()) os << "notes=" << notes << "\n";
    return os.str();
}

InequalityReport verify_inequality(InequalityKind kind, const ValidatedParams& p, double lambda,
                                   std::int64_t n, std::uint64_t trials, std::uint64_t seed) {
    require_trials(trials);
    if (n < 5) throw Error(ErrorCode::RANGE, "inequality checks need n >= 5");
    InequalityReport rep;
    switch (kind) {
        case InequalityKind::OSSS: rep = verify_osss(p, lambda, n, trials, seed); break;
        case InequalityKind::EfronStein:
            rep = verify_efron_stein(p, lambda, n, trials, seed);
            break;
        case InequalityKind::Russo: rep = verify_russo(p, lambda, n, trials, seed); break;
        case InequalityKind::PivLemma: rep = verify_piv_lemma(p, lambda, n, trials, seed); break;
        case InequalityKind::InfLemma: rep = verify_inf_lemma(p, lambda, n, trials, seed); break;
        case InequalityKind::Differential:
            rep = verify_differential(p, lambda, n, trials, seed);
            break;
    }
    rep.kind = kind;
    rep.lambda = lambda;
    rep.n = n;
    rep.trials = trials;
    rep.seed = seed;
    return rep;
}

}  // namespace coxlab
