#include "coxlab/rng.hpp"

#include <cmath>

#include "coxlab/error.hpp"

namespace coxlab {

std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    std::uint64_t z = h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key) {
    std::uint64_t p0 = std::uint64_t(kPhiloxM0) * ctr[0];
    std::uint64_t p1 = std::uint64_t(kPhiloxM1) * ctr[2];
    std::array<std::uint32_t, 4> out;
    out[0] = std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0];
    out[1] = std::uint32_t(p1);
    out[2] = std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1];
    out[3] = std::uint32_t(p0);
    ctr = out;
}

}  // namespace

std::uint64_t stream_prefix(const StreamKey& key) {
    std::uint64_t h = key.master_seed;
    h = mix64(h, 0x636f786c61623031ull);  // stream-format version tag
    h = mix64(h, std::uint64_t(key.block_x));
    h = mix64(h, std::uint64_t(key.block_y));
    h = mix64(h, std::uint64_t(key.purpose));
    h = mix64(h, std::uint64_t(key.replicate));
    h = mix64(h, key.trial);
    return h;
}

RandomStream::RandomStream(const StreamKey& key)
    : RandomStream(stream_prefix(key), key.sub, key.extra) {}

RandomStream::RandomStream(std::uint64_t prefix, std::uint64_t sub, std::uint64_t extra) {
    std::uint64_t h = mix64(prefix, sub);
    std::uint64_t h2 = mix64(h, extra);
    std::uint64_t h3 = mix64(h2, 0x5bd1e995u);
    key_ = {std::uint32_t(h2), std::uint32_t(h2 >> 32)};
    counter_ = {0, 0, std::uint32_t(h3), std::uint32_t(h3 >> 32)};
    buffer_pos_ = 4;
}

void RandomStream::refill() {
    std::array<std::uint32_t, 4> ctr = counter_;
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, key);
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    buffer_ = ctr;
    buffer_pos_ = 0;
    if (++counter_[0] == 0) ++counter_[1];
}

std::uint32_t RandomStream::next_u32() {
    if (buffer_pos_ >= 4) refill();
    return buffer_[buffer_pos_++];
}

std::uint64_t RandomStream::next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double RandomStream::next_double() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

std::uint64_t RandomStream::poisson(double mean) {
    if (!(mean >= 0.0)) throw Error(ErrorCode::RANGE, "poisson mean must be nonnegative");
    if (mean == 0.0) return 0;
    // Additive splitting keeps the product-of-uniforms loop short and exact.
    std::uint64_t total = 0;
    while (mean > 16.0) {
        double half = mean * 0.5;
        double limit = std::exp(-half);
        std::uint64_t k = 0;
        double prod = 1.0;
        for (;;) {
            prod *= next_double();
            if (prod < limit) break;
            ++k;
        }
        total += k;
        mean -= half;
    }
    double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = 1.0;
    for (;;) {
        prod *= next_double();
        if (prod < limit) break;
        ++k;
    }
    return total + k;
}

RandomStream derive_stream(const StreamKey& key) { return RandomStream(key); }

}  // namespace coxlab
