#include "mplex/random.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace mplex {

namespace {

inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) noexcept {
    return mix64(h + 0x9E3779B97F4A7C15ull * (v + 1));
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

CounterStream::CounterStream(Philox4x32::Key key, std::uint32_t k, std::uint32_t t) noexcept
    : key_(key), k_(k), t_(t) {}

void CounterStream::refill() noexcept {
    // Structure-of-arrays Philox over kBatch consecutive counters; the loop
    // body has no cross-lane dependence and vectorizes.
    std::uint32_t c0[kBatch], c1[kBatch], c2[kBatch], c3[kBatch];
    for (int b = 0; b < kBatch; ++b) {
        const std::uint64_t idx = block_ + static_cast<std::uint64_t>(b);
        c0[b] = static_cast<std::uint32_t>(idx);
        c1[b] = static_cast<std::uint32_t>(idx >> 32);
        c2[b] = k_;
        c3[b] = t_;
    }
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        for (int b = 0; b < kBatch; ++b) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0[b];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2[b];
            const auto n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[b] ^ k0;
            const auto n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[b] ^ k1;
            c1[b] = static_cast<std::uint32_t>(p1);
            c3[b] = static_cast<std::uint32_t>(p0);
            c0[b] = n0;
            c2[b] = n2;
        }
    }
    for (int b = 0; b < kBatch; ++b) {
        buffer_[4 * b] = c0[b];
        buffer_[4 * b + 1] = c1[b];
        buffer_[4 * b + 2] = c2[b];
        buffer_[4 * b + 3] = c3[b];
    }
    block_ += kBatch;
    lane_ = 0;
}

void CounterStream::seek(std::uint64_t index) noexcept {
    block_ = index / 4;
    refill();
    lane_ = static_cast<int>(index % 4);
}

double CounterStream::next_uniform() noexcept {
    const std::uint64_t hi = next_u32() >> 5;  // 27 bits
    const std::uint64_t lo = next_u32() >> 6;  // 26 bits
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
}

double CounterStream::next_normal() noexcept {
    double u1 = next_uniform();
    const double u2 = next_uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t bernoulli_threshold(double p) noexcept {
    if (!(p > 0.0)) return 0;
    if (p >= 1.0) return std::uint64_t{1} << 32;
    return static_cast<std::uint64_t>(std::ldexp(p, 32));
}

SeedSpec SeedSpec::child(Purpose p, std::uint64_t index) const noexcept {
    std::uint64_t h = combine(mix64(root), static_cast<std::uint64_t>(purpose));
    h = combine(combine(combine(h, replicate), static_cast<std::uint64_t>(p)), index);
    return SeedSpec{h};
}

CounterStream SeedSpec::stream(std::uint32_t k, std::uint32_t t) const noexcept {
    std::uint64_t h = combine(root, 0xD0A5Eull);
    h = combine(combine(h, static_cast<std::uint64_t>(purpose)), replicate);
    return CounterStream({static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)}, k, t);
}

std::string SeedSpec::fingerprint() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "0x%016llx/%u/%llu", static_cast<unsigned long long>(root),
                  static_cast<unsigned>(purpose), static_cast<unsigned long long>(replicate));
    return buf;
}

}  // namespace mplex
