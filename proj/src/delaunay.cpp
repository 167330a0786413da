#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

#include "coxlab/error.hpp"
#include "coxlab/geometry.hpp"

namespace coxlab {

namespace {

using Rational = boost::multiprecision::mpq_rational;

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

int orient2d_exact(const Point2& a, const Point2& b, const Point2& c) {
    Rational det = (Rational(b.x) - Rational(a.x)) * (Rational(c.y) - Rational(a.y)) -
                   (Rational(b.y) - Rational(a.y)) * (Rational(c.x) - Rational(a.x));
    return det.sign();
}

int incircle_exact(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    Rational adx = Rational(a.x) - Rational(d.x), ady = Rational(a.y) - Rational(d.y);
    Rational bdx = Rational(b.x) - Rational(d.x), bdy = Rational(b.y) - Rational(d.y);
    Rational cdx = Rational(c.x) - Rational(d.x), cdy = Rational(c.y) - Rational(d.y);
    Rational al = adx * adx + ady * ady;
    Rational bl = bdx * bdx + bdy * bdy;
    Rational cl = cdx * cdx + cdy * cdy;
    Rational det = adx * (bdy * cl - bl * cdy) - ady * (bdx * cl - bl * cdx) +
                   al * (bdx * cdy - bdy * cdx);
    return det.sign();
}

}  // namespace

int orient2d(const Point2& a, const Point2& b, const Point2& c) {
    double detl = (b.x - a.x) * (c.y - a.y);
    double detr = (b.y - a.y) * (c.x - a.x);
    double det = detl - detr;
    double detsum = std::abs(detl) + std::abs(detr);
    // Forward error of the double evaluation stays below ~3.34e-16 * detsum;
    // anything larger is trustworthy, the rest goes to exact arithmetic.
    if (std::abs(det) > 1e-15 * detsum) return sign_of(det);
    if (det == 0.0 && detsum == 0.0) return 0;
    return orient2d_exact(a, b, c);
}

int incircle_raw(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    double adx = a.x - d.x, ady = a.y - d.y;
    double bdx = b.x - d.x, bdy = b.y - d.y;
    double cdx = c.x - d.x, cdy = c.y - d.y;
    double al = adx * adx + ady * ady;
    double bl = bdx * bdx + bdy * bdy;
    double cl = cdx * cdx + cdy * cdy;
    double det = adx * (bdy * cl - bl * cdy) - ady * (bdx * cl - bl * cdx) +
                 al * (bdx * cdy - bdy * cdx);
    double perm = std::abs(adx) * (std::abs(bdy) * cl + bl * std::abs(cdy)) +
                  std::abs(ady) * (std::abs(bdx) * cl + bl * std::abs(cdx)) +
                  al * (std::abs(bdx) * std::abs(cdy) + std::abs(bdy) * std::abs(cdx));
    if (std::abs(det) > 1e-14 * perm) return sign_of(det);
    if (det == 0.0 && perm == 0.0) return 0;
    return incircle_exact(a, b, c, d);
}

int incircle_perturbed(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    int s = incircle_raw(a, b, c, d);
    if (s != 0) return s;
    // Exactly cocircular: decide by the symbolic perturbation w_i -= eps^{r_i}
    // of the lifted coordinates, where r_i orders the points lexicographically.
    // The dominant term belongs to the lexicographically smallest point, and
    // its cofactor is (-1)^{row+3} * orient of the remaining three (rows of
    // the 4x4 lifted determinant, which equals incircle for rows a,b,c,d).
    const Point2* pts[4] = {&a, &b, &c, &d};
    int min_row = 0;
    for (int i = 1; i < 4; ++i)
        if (*pts[i] < *pts[min_row]) min_row = i;
    const Point2* rest[3];
    int k = 0;
    for (int i = 0; i < 4; ++i)
        if (i != min_row) rest[k++] = pts[i];
    int minor = orient2d(*rest[0], *rest[1], *rest[2]);
    // cofactor C = (-1)^{(min_row+1)+3} * minor; result = -sign(C).
    int cof = ((min_row + 1 + 3) % 2 == 0) ? minor : -minor;
    return -cof;
}

namespace {

struct Tri {
    std::int32_t v[3];
    std::int32_t nbr[3];  // nbr[i] is opposite vertex v[i]; -1 at the outside
    bool alive = true;
};

class BowyerWatson {
public:
    explicit BowyerWatson(std::vector<Point2> pts) : pts_(std::move(pts)) {}

    Triangulation run() {
        const std::size_t n = pts_.size();
        make_super_triangle();
        auto order = insertion_order();
        std::int32_t hint = 0;
        for (std::int32_t idx : order) hint = insert(idx, hint);
        Triangulation out;
        out.vertices = std::move(pts_);
        out.vertices.resize(n);
        for (const auto& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= std::int32_t(n) || t.v[1] >= std::int32_t(n) || t.v[2] >= std::int32_t(n))
                continue;
            out.triangles.push_back({t.v[0], t.v[1], t.v[2]});
        }
        std::sort(out.triangles.begin(), out.triangles.end());
        // Dedupe edges per lower-endpoint bucket instead of one global
        // sort: same sorted result, linear time.
        std::vector<std::int32_t> start(n + 1, 0);
        for (const auto& t : out.triangles)
            for (int e = 0; e < 3; ++e) ++start[std::size_t(std::min(t[e], t[(e + 1) % 3])) + 1];
        for (std::size_t u = 0; u < n; ++u) start[u + 1] += start[u];
        std::vector<std::int32_t> other(static_cast<std::size_t>(start[n]), 0);
        std::vector<std::int32_t> fill(start.begin(), start.end() - 1);
        for (const auto& t : out.triangles)
            for (int e = 0; e < 3; ++e) {
                std::int32_t u = t[e], v = t[(e + 1) % 3];
                if (u > v) std::swap(u, v);
                other[std::size_t(fill[std::size_t(u)]++)] = v;
            }
        out.edges.reserve(out.triangles.size() * 3 / 2 + 3);
        for (std::size_t u = 0; u < n; ++u) {
            auto lo = other.begin() + start[u], hi = other.begin() + start[u + 1];
            std::sort(lo, hi);
            for (auto it = lo; it != hi; ++it)
                if (it == lo || *it != *(it - 1))
                    out.edges.push_back({std::int32_t(u), *it});
        }
        return out;
    }

private:
    void make_super_triangle() {
        double xlo = pts_[0].x, xhi = xlo, ylo = pts_[0].y, yhi = ylo;
        for (const auto& p : pts_) {
            xlo = std::min(xlo, p.x);
            xhi = std::max(xhi, p.x);
            ylo = std::min(ylo, p.y);
            yhi = std::max(yhi, p.y);
        }
        double cx = 0.5 * (xlo + xhi), cy = 0.5 * (ylo + yhi);
        double f = 1e6 * std::max({xhi - xlo, yhi - ylo, 1.0});
        std::int32_t s0 = std::int32_t(pts_.size());
        pts_.push_back(Point2{cx - 1.31 * f, cy - 0.97 * f});
        pts_.push_back(Point2{cx + 1.43 * f, cy - 1.09 * f});
        pts_.push_back(Point2{cx + 0.07 * f, cy + 1.51 * f});
        tris_.push_back(Tri{{s0, s0 + 1, s0 + 2}, {-1, -1, -1}, true});
    }

    // Snake order over shallow row buckets: keeps consecutive insertions
    // spatially close so the walking point location stays short.
    std::vector<std::int32_t> insertion_order() const {
        const std::size_t n = pts_.size() - 3;
        std::vector<std::int32_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = std::int32_t(i);
        if (n < 16) return order;
        double ylo = pts_[0].y, yhi = ylo;
        for (std::size_t i = 0; i < n; ++i) {
            ylo = std::min(ylo, pts_[i].y);
            yhi = std::max(yhi, pts_[i].y);
        }
        std::size_t rows = std::max<std::size_t>(1, std::size_t(std::sqrt(double(n) / 2.0)));
        double h = (yhi - ylo) / double(rows);
        if (!(h > 0.0)) return order;
        std::vector<std::uint32_t> row(n);
        for (std::size_t i = 0; i < n; ++i)
            row[i] = std::uint32_t(std::min(std::size_t((pts_[i].y - ylo) / h), rows - 1));
        // Stable counting sort by row; points are pre-sorted
        // lexicographically, so within a row x stays ascending and the odd
        // rows are reversed afterwards for the snake.
        std::vector<std::size_t> start(rows + 1, 0);
        for (std::size_t i = 0; i < n; ++i) ++start[row[i] + 1];
        for (std::size_t r = 0; r < rows; ++r) start[r + 1] += start[r];
        std::vector<std::size_t> fill = start;
        for (std::size_t i = 0; i < n; ++i) order[fill[row[i]]++] = std::int32_t(i);
        for (std::size_t r = 1; r < rows; r += 2)
            std::reverse(order.begin() + std::ptrdiff_t(start[r]),
                         order.begin() + std::ptrdiff_t(start[r + 1]));
        return order;
    }

    std::int32_t locate(const Point2& p, std::int32_t hint) const {
        std::int32_t cur = hint;
        if (cur < 0 || !tris_[cur].alive) {
            cur = -1;
            for (std::int32_t i = std::int32_t(tris_.size()) - 1; i >= 0; --i)
                if (tris_[i].alive) { cur = i; break; }
        }
        std::int32_t prev = -1;
        for (std::size_t steps = 0; steps < tris_.size() + 4; ++steps) {
            const Tri& t = tris_[cur];
            std::int32_t next = -1;
            for (int e = 0; e < 3; ++e) {
                std::int32_t u = t.v[(e + 1) % 3], v = t.v[(e + 2) % 3];
                std::int32_t nb = t.nbr[e];
                if (nb == prev || nb < 0) continue;
                if (orient2d(pts_[u], pts_[v], p) < 0) { next = nb; break; }
            }
            if (next < 0) {
                // re-test including prev in case the walk must back up
                bool outside = false;
                for (int e = 0; e < 3 && !outside; ++e) {
                    std::int32_t u = t.v[(e + 1) % 3], v = t.v[(e + 2) % 3];
                    if (orient2d(pts_[u], pts_[v], p) < 0) {
                        next = t.nbr[e];
                        outside = true;
                    }
                }
                if (!outside) return cur;
                if (next < 0) return cur;
            }
            prev = cur;
            cur = next;
        }
        throw Error(ErrorCode::DEGENERATE_INPUT, "point location walk did not terminate");
    }

    std::int32_t insert(std::int32_t pi, std::int32_t hint) {
        const Point2& p = pts_[pi];
        std::int32_t seed = locate(p, hint);

        // Grow the cavity: triangles whose perturbed circumdisc contains p.
        cavity_.clear();
        stack_.clear();
        stack_.push_back(seed);
        tris_[seed].alive = false;
        cavity_.push_back(seed);
        boundary_.clear();
        while (!stack_.empty()) {
            std::int32_t ti = stack_.back();
            stack_.pop_back();
            const Tri t = tris_[ti];
            for (int e = 0; e < 3; ++e) {
                std::int32_t nb = t.nbr[e];
                std::int32_t u = t.v[(e + 1) % 3], v = t.v[(e + 2) % 3];
                if (nb < 0) {
                    boundary_.push_back({u, v, nb});
                    continue;
                }
                if (!tris_[nb].alive) {
                    if (in_cavity(nb)) continue;
                    boundary_.push_back({u, v, nb});
                    continue;
                }
                const Tri& nt = tris_[nb];
                if (incircle_perturbed(pts_[nt.v[0]], pts_[nt.v[1]], pts_[nt.v[2]], p) > 0) {
                    tris_[nb].alive = false;
                    cavity_.push_back(nb);
                    stack_.push_back(nb);
                } else {
                    boundary_.push_back({u, v, nb});
                }
            }
        }

        // Retriangulate the cavity as a fan around p.
        links_.clear();
        std::int32_t first_new = -1;
        std::size_t reuse = 0;
        for (const auto& be : boundary_) {
            std::int32_t ti;
            Tri nt;
            nt.v[0] = pi;
            nt.v[1] = be.u;
            nt.v[2] = be.v;
            nt.nbr[0] = be.outer;
            nt.nbr[1] = -2;
            nt.nbr[2] = -2;
            nt.alive = true;
            if (reuse < cavity_.size()) {
                ti = cavity_[reuse++];
                tris_[ti] = nt;
            } else {
                ti = std::int32_t(tris_.size());
                tris_.push_back(nt);
            }
            if (be.outer >= 0) {
                Tri& ot = tris_[be.outer];
                for (int e = 0; e < 3; ++e) {
                    std::int32_t ou = ot.v[(e + 1) % 3], ov = ot.v[(e + 2) % 3];
                    if (ou == be.v && ov == be.u) ot.nbr[e] = ti;
                }
            }
            link(be.u, ti, 2);  // edge (p, u) is opposite nt.v[2] = v
            link(be.v, ti, 1);  // edge (v, p) is opposite nt.v[1] = u
            first_new = ti;
        }
        // mark unused cavity slots dead for good
        for (; reuse < cavity_.size(); ++reuse) tris_[cavity_[reuse]].alive = false;
        return first_new;
    }

    bool in_cavity(std::int32_t ti) const {
        for (std::int32_t c : cavity_)
            if (c == ti) return true;
        return false;
    }

    // Pair up the two fan triangles sharing the spoke through `vertex`.
    // The boundary cycle is short, so a linear scan beats a hash map.
    void link(std::int32_t vertex, std::int32_t tri, int slot) {
        for (auto& l : links_) {
            if (l.vertex != vertex) continue;
            tris_[tri].nbr[slot] = l.tri;
            tris_[l.tri].nbr[l.slot] = tri;
            l = links_.back();
            links_.pop_back();
            return;
        }
        links_.push_back({vertex, tri, slot});
    }

    struct BoundaryEdge {
        std::int32_t u, v, outer;
    };

    std::vector<Point2> pts_;
    std::vector<Tri> tris_;
    std::vector<std::int32_t> cavity_;
    std::vector<std::int32_t> stack_;
    struct SpokeLink {
        std::int32_t vertex, tri;
        int slot;
    };

    std::vector<BoundaryEdge> boundary_;
    std::vector<SpokeLink> links_;
};

}  // namespace

Triangulation delaunay_triangulate(const std::vector<Point2>& points) {
    std::vector<Point2> pts = points;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) throw Error(ErrorCode::DEGENERATE_INPUT, "need at least 3 distinct points");
    bool has_area = false;
    for (std::size_t i = 2; i < pts.size() && !has_area; ++i)
        has_area = orient2d(pts[0], pts[1], pts[i]) != 0 || orient2d(pts[0], pts[i - 1], pts[i]) != 0;
    if (!has_area) throw Error(ErrorCode::DEGENERATE_INPUT, "all points collinear");
    BowyerWatson bw(std::move(pts));
    return bw.run();
}

}  // namespace coxlab
