#include "doctest.h"

#include "mplex/random.hpp"

#include <cmath>
#include <set>

using namespace mplex;

TEST_CASE("philox known-answer vectors") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::apply({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::apply({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::apply({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream words follow the counter layout") {
    const Philox4x32::Key key{0x12345678, 0x9abcdef0};
    CounterStream s(key, 3, 5);
    for (std::uint64_t block = 0; block < 40; ++block) {
        const auto expect = Philox4x32::apply(
            {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), 3, 5}, key);
        for (int lane = 0; lane < 4; ++lane) CHECK(s.next_u32() == expect[static_cast<std::size_t>(lane)]);
    }
    CHECK(s.position() == 160);
}

TEST_CASE("seek matches sequential reads") {
    const SeedSpec seed{99};
    for (std::uint64_t target : {0ull, 1ull, 3ull, 4ull, 63ull, 64ull, 65ull, 1001ull}) {
        CounterStream a = seed.stream(1, 2);
        for (std::uint64_t i = 0; i < target; ++i) a.next_u32();
        CounterStream b = seed.stream(1, 2);
        b.seek(target);
        CHECK(b.position() == target);
        for (int i = 0; i < 70; ++i) CHECK(a.next_u32() == b.next_u32());
    }
}

TEST_CASE("seed addresses") {
    const SeedSpec root{2024};
    CHECK(root.with(Purpose::bootstrap, 3) == root.with(Purpose::bootstrap, 3));
    CHECK_FALSE(root.with(Purpose::bootstrap, 3) == root.with(Purpose::bootstrap, 4));

    std::set<std::uint32_t> first;
    first.insert(root.stream().next_u32());
    first.insert(root.with(Purpose::bootstrap, 0).stream().next_u32());
    first.insert(root.with(Purpose::bootstrap, 1).stream().next_u32());
    first.insert(root.stream(1, 0).next_u32());
    first.insert(root.stream(0, 1).next_u32());
    first.insert(root.child(Purpose::monte_carlo, 0).stream().next_u32());
    first.insert(root.child(Purpose::monte_carlo, 1).stream().next_u32());
    CHECK(first.size() == 7);

    CHECK(root.child(Purpose::pairwise, 7).root == root.child(Purpose::pairwise, 7).root);
    CHECK(root.child(Purpose::pairwise, 7).root != root.with(Purpose::bootstrap, 1).child(Purpose::pairwise, 7).root);
    CHECK(SeedSpec{255, Purpose::bootstrap, 12}.fingerprint() == "0x00000000000000ff/2/12");
}

TEST_CASE("bernoulli thresholds") {
    CHECK(bernoulli_threshold(0.0) == 0);
    CHECK(bernoulli_threshold(-0.5) == 0);
    CHECK(bernoulli_threshold(1.0) == (std::uint64_t{1} << 32));
    CHECK(bernoulli_threshold(0.5) == (std::uint64_t{1} << 31));
    CHECK(bernoulli_threshold(0.25) == (std::uint64_t{1} << 30));
    // Every word is below the threshold for p = 1.
    CHECK(0xffffffffull < bernoulli_threshold(1.0));
}

TEST_CASE("uniform and normal draws") {
    CounterStream s = SeedSpec{5}.stream();
    const int m = 200000;
    double sum = 0.0, sum2 = 0.0, lo = 1.0, hi = 0.0;
    for (int i = 0; i < m; ++i) {
        const double u = s.next_uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(sum / m - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / m));
    sum = 0.0;
    for (int i = 0; i < m; ++i) {
        const double z = s.next_normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / m) < 4.0 / std::sqrt(m));
    CHECK(std::abs(sum2 / m - 1.0) < 4.0 * std::sqrt(2.0 / m));
}
