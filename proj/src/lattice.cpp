#include "coxlab/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "coxlab/error.hpp"

namespace coxlab {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

BlockId block_of_site(const SiteId& k, const ValidatedParams& p) {
    return BlockId{floor_div(k.x, p.b_inv()), floor_div(k.y, p.b_inv())};
}

std::vector<SiteId> sites_of_block(const BlockId& z, const ValidatedParams& p) {
    std::vector<SiteId> out;
    std::int64_t m = p.b_inv();
    out.reserve(std::size_t(m * m));
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < m; ++j) out.push_back(SiteId{z.x * m + i, z.y * m + j});
    return out;
}

std::int64_t site_index_in_block(const SiteId& k, const ValidatedParams& p) {
    std::int64_t m = p.b_inv();
    std::int64_t i = k.x - floor_div(k.x, m) * m;
    std::int64_t j = k.y - floor_div(k.y, m) * m;
    return i * m + j;
}

std::vector<BlockId> block_neighborhood(const BlockId& z, int radius) {
    std::vector<BlockId> out;
    out.reserve(std::size_t(2 * radius + 1) * std::size_t(2 * radius + 1));
    for (int dx = -radius; dx <= radius; ++dx)
        for (int dy = -radius; dy <= radius; ++dy) out.push_back(BlockId{z.x + dx, z.y + dy});
    return out;
}

std::vector<BlockId> index_neighbors_blocks(NeighborKind kind, const BlockId& z) {
    switch (kind) {
        case NeighborKind::I_plus: return block_neighborhood(z, 1);
        case NeighborKind::I_plus_plus: return block_neighborhood(z, 2);
        default: throw Error(ErrorCode::RANGE, "block kind expected (I_plus or I_plus_plus)");
    }
}

std::vector<SiteId> index_neighbors_sites(NeighborKind kind, const BlockId& z, const ValidatedParams& p) {
    std::int64_t m = p.b_inv();
    auto range_sites = [&](std::int64_t lo, std::int64_t hi) {
        // Sites in b Z^2 ∩ (z + [lo, hi)^2), in row-major order.
        std::vector<SiteId> out;
        out.reserve(std::size_t((hi - lo) * m) * std::size_t((hi - lo) * m));
        for (std::int64_t i = (z.x + lo) * m; i < (z.x + hi) * m; ++i)
            for (std::int64_t j = (z.y + lo) * m; j < (z.y + hi) * m; ++j) out.push_back(SiteId{i, j});
        return out;
    };
    switch (kind) {
        case NeighborKind::Ib: return range_sites(0, 1);
        case NeighborKind::Ib_plus: return range_sites(-1, 2);
        case NeighborKind::Ib_plus_plus: return range_sites(-2, 3);
        default: throw Error(ErrorCode::RANGE, "site kind expected (Ib, Ib_plus or Ib_plus_plus)");
    }
}

std::int64_t block_sup_norm(const BlockId& z) {
    std::int64_t nx = std::max(-z.x, z.x + 1);
    std::int64_t ny = std::max(-z.y, z.y + 1);
    return std::max(nx, ny);
}

}  // namespace coxlab
