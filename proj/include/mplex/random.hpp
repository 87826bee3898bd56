#ifndef MPLEX_RANDOM_HPP
#define MPLEX_RANDOM_HPP

#include <array>
#include <cstdint>
#include <string>

namespace mplex {

// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: maps a
// 128-bit counter and 64-bit key to 128 random bits.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key) noexcept {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }
};

// Stream purposes. The numeric values are part of the seed derivation and
// therefore of every reproducible output; never renumber.
enum class Purpose : std::uint32_t {
    observed = 1,     // the observed graph of a simulation replicate
    bootstrap = 2,    // bootstrap graphs inside a test
    monte_carlo = 3,  // per-replicate child roots in experiment harnesses
    pairwise = 4,     // per-pair child roots in pairwise testing
    svd_start = 5,    // starting blocks for iterative SVD
    workflow = 6,     // replicate workflow stages
    sweep = 7,        // consistency sweep cells
    cell = 8,         // (n, epsilon) cells of the power table
};

// A sequential reader over one counter-based stream. Word i of the stream is
// lane (i mod 4) of Philox(counter = {i/4 low, i/4 high, k, t}, key).
class CounterStream {
public:
    CounterStream(Philox4x32::Key key, std::uint32_t k, std::uint32_t t) noexcept;

    std::uint32_t next_u32() noexcept {
        if (lane_ == kWords) refill();
        return buffer_[lane_++];
    }
    // Uniform on [0, 1) with 53 random bits.
    double next_uniform() noexcept;
    // Standard normal via Box-Muller (consumes four words).
    double next_normal() noexcept;

    // Jump to word `index` of the stream.
    void seek(std::uint64_t index) noexcept;
    std::uint64_t position() const noexcept { return block_ * 4 - static_cast<std::uint64_t>(kWords - lane_); }

private:
    // Blocks are generated in batches of independent counters so the rounds
    // of different blocks can overlap.
    static constexpr int kBatch = 16;
    static constexpr int kWords = 4 * kBatch;

    void refill() noexcept;

    Philox4x32::Key key_;
    std::uint32_t k_;
    std::uint32_t t_;
    std::uint64_t block_ = 0;  // next block to generate
    std::array<std::uint32_t, kWords> buffer_{};
    int lane_ = kWords;
};

// Threshold for a Bernoulli(p) draw from one 32-bit word: success iff
// word < threshold. p is taken as already clamped to [0, 1].
std::uint64_t bernoulli_threshold(double p) noexcept;

// Address of a reproducible random stream family: a 64-bit root plus the
// (purpose, replicate) labels. Samplers add the (k, t) block labels. Equal
// addresses give equal streams regardless of thread or call order.
struct SeedSpec {
    std::uint64_t root = 0;
    Purpose purpose = Purpose::observed;
    std::uint64_t replicate = 0;

    // Same root, different labels.
    SeedSpec with(Purpose p, std::uint64_t r) const noexcept { return {root, p, r}; }
    // A fresh root derived from this address, for nested families (one Monte
    // Carlo replicate, one pairwise test). Labels of the result are reset.
    SeedSpec child(Purpose p, std::uint64_t index) const noexcept;
    CounterStream stream(std::uint32_t k = 0, std::uint32_t t = 0) const noexcept;
    // Hex rendering of root and labels, used in result records.
    std::string fingerprint() const;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace mplex

#endif  // MPLEX_RANDOM_HPP
