#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "coxlab/params.hpp"

namespace coxlab {

// Index of a coarse block z. Block z spans Mz + [0, M)^2 in the plane and
// owns the b^-2 sites I_b(z) = bZ^2 ∩ (z + [0,1)^2).
struct BlockId {
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend bool operator==(const BlockId&, const BlockId&) = default;
    friend auto operator<=>(const BlockId&, const BlockId&) = default;
};

// Index of a fine site: the site is x = b*k and owns the cube
// Q(x; b, M) = Mx + [0, Mb]^2 = (Mb)k + [0, Mb]^2.
struct SiteId {
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend bool operator==(const SiteId&, const SiteId&) = default;
    friend auto operator<=>(const SiteId&, const SiteId&) = default;
};

struct BlockIdHash {
    std::size_t operator()(const BlockId& z) const {
        std::uint64_t h = std::uint64_t(z.x) * 0x9e3779b97f4a7c15ull;
        h ^= std::uint64_t(z.y) + 0x517cc1b727220a95ull + (h << 6) + (h >> 2);
        return std::size_t(h);
    }
};

enum class NeighborKind { I_plus, I_plus_plus, Ib, Ib_plus, Ib_plus_plus };

// Block containing site k: z_i = floor(k_i * b).
BlockId block_of_site(const SiteId& k, const ValidatedParams& p);

// Sites I_b(z) in row-major order.
std::vector<SiteId> sites_of_block(const BlockId& z, const ValidatedParams& p);

// Linear index of site k within its block (row-major), in [0, b^-2).
std::int64_t site_index_in_block(const SiteId& k, const ValidatedParams& p);

// I^+(z) = z + {-1,0,1}^2 and I^{++}(z) = z + {0,+-1,+-2}^2, row-major.
std::vector<BlockId> block_neighborhood(const BlockId& z, int radius);

// The five index families of one call surface.
std::vector<BlockId> index_neighbors_blocks(NeighborKind kind, const BlockId& z);
std::vector<SiteId> index_neighbors_sites(NeighborKind kind, const BlockId& z, const ValidatedParams& p);

// Sup-norm scale of a block in units of M: max over the block's closed cube
// of |x|_inf / M. Blocks with block_sup_norm <= n tile Λ_{Mn} exactly.
std::int64_t block_sup_norm(const BlockId& z);

// Square window of blocks {-n..n-1}^2 covering Λ_{Mn}.
struct BlockWindow {
    std::int64_t n = 0;  // blocks z with -n <= z_i < n

    bool contains(const BlockId& z) const {
        return z.x >= -n && z.x < n && z.y >= -n && z.y < n;
    }
    std::int64_t side() const { return 2 * n; }
    std::int64_t count() const { return side() * side(); }
    std::int64_t linear_index(const BlockId& z) const {
        return (z.x + n) * side() + (z.y + n);
    }
    BlockId from_linear(std::int64_t i) const {
        return BlockId{i / side() - n, i % side() - n};
    }
    template <class F>
    void for_each(F&& f) const {
        for (std::int64_t x = -n; x < n; ++x)
            for (std::int64_t y = -n; y < n; ++y) f(BlockId{x, y});
    }
};

}  // namespace coxlab
