#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace coxlab {

// Purpose tag of a random stream. Streams with distinct tags are
// statistically independent even when all other key fields agree.
enum class StreamPurpose : std::uint32_t {
    Env = 1,             // per-block environment points Y_z
    Driver = 2,          // per-site marks V_x
    ResampleEnv = 3,     // independent copy of Y_z, replicate j
    ResampleDriver = 4,  // independent copy of V_x, replicate j
    Alg = 5,             // auxiliary algorithm randomness (rejection loops, m draws)
};

struct BlockId;

// Identifies one random stream. Identical keys replay identical streams.
struct StreamKey {
    std::uint64_t master_seed = 0;
    std::int64_t block_x = 0;
    std::int64_t block_y = 0;
    StreamPurpose purpose = StreamPurpose::Env;
    std::uint32_t replicate = 0;  // j for Resample* purposes
    std::uint64_t trial = 0;
    std::uint64_t sub = 0;    // site index within a block, 0 for block-level streams
    std::uint64_t extra = 0;  // auxiliary discriminator (e.g. mark bits for rejection loops)
};

// Counter-based generator: Philox4x32-10 keyed by a hash of the StreamKey.
// Any stream can be recreated from its key alone, so resampling one block
// never disturbs the randomness of any other block.
class RandomStream {
public:
    explicit RandomStream(const StreamKey& key);

    // Same stream as the StreamKey constructor, split so a caller scanning
    // many sub/extra values in one block can hash the shared prefix once.
    RandomStream(std::uint64_t prefix, std::uint64_t sub, std::uint64_t extra);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double next_double();

    // Uniform on [lo, hi).
    double uniform(double lo, double hi);

    // Exact Poisson sample (product-of-uniforms, with additive splitting
    // for large means).
    std::uint64_t poisson(double mean);

    using result_type = std::uint32_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xffffffffu; }
    result_type operator()() { return next_u32(); }

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_;
    int buffer_pos_;
};

// 64-bit mix used for key hashing (splitmix64 finalizer chain).
std::uint64_t mix64(std::uint64_t h, std::uint64_t v);

// Hash of the key fields shared by all streams of one (block, purpose,
// replicate, trial) family; pairs with the (prefix, sub, extra) constructor.
std::uint64_t stream_prefix(const StreamKey& key);

// Convenience factory.
RandomStream derive_stream(const StreamKey& key);

}  // namespace coxlab
