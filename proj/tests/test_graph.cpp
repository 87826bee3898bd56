#include "doctest.h"

#include "mplex/error.hpp"
#include "mplex/graph.hpp"
#include "support.hpp"

#include <string>

using namespace mplex;

namespace {

// Entry-by-entry oracle for the unfolding, independent of `unfold`.
double unfolded_entry(const MultiplexGraph& g, Eigen::Index row, Eigen::Index col) {
    const auto n = static_cast<Eigen::Index>(g.n());
    return g.at(static_cast<std::size_t>(row / n), static_cast<std::size_t>(col / n), static_cast<std::size_t>(row % n),
                static_cast<std::size_t>(col % n));
}

}  // namespace

TEST_CASE("unfold of a single block is the block") {
    const Matrix a = testing::random_binary(6, 1);
    const MultiplexGraph g({6, 1, 1}, {Block(a)});
    const UnfoldedMatrix u = unfold(g);
    CHECK(u.data == a);
}

TEST_CASE("unfold of scalar blocks") {
    // n = 1: blocks are 1 x 1, the unfolding is [[a, b], [c, d]].
    std::vector<Block> blocks;
    for (double v : {0.1, 0.2, 0.3, 0.4}) blocks.emplace_back(Matrix::Constant(1, 1, v));
    const MultiplexGraph g({1, 2, 2}, std::move(blocks), true, EntryKind::averaged);
    Matrix expect(2, 2);
    expect << 0.1, 0.2, 0.3, 0.4;
    CHECK(unfold(g).data == expect);
}

TEST_CASE("block (k, t) sits at rows k n and columns t n") {
    const MultiplexGraph g = testing::random_graph(2, 2, 3, 11, 0.5);
    const Matrix u = unfold(g).data;
    REQUIRE(u.rows() == 4);
    REQUIRE(u.cols() == 6);
    CHECK(u.block(2, 4, 2, 2) == g.block(1, 2).dense());
    for (Eigen::Index r = 0; r < u.rows(); ++r)
        for (Eigen::Index c = 0; c < u.cols(); ++c) CHECK(u(r, c) == unfolded_entry(g, r, c));
}

TEST_CASE("refold inverts unfold") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const std::size_t n = 2 + s % 7, K = 1 + s % 4, T = 1 + (s / 4) % 3;
        const MultiplexGraph g = testing::random_graph(n, K, T, 100 + s);
        const MultiplexGraph back = refold(unfold(g));
        CHECK(back.same_values(g));
        CHECK(back.kind() == EntryKind::binary);
    }
    const UnfoldedMatrix zero{Matrix::Zero(6, 9), {3, 2, 3}};
    const MultiplexGraph z = refold(zero);
    CHECK(unfold(z).data == zero.data);
}

TEST_CASE("refold rejects a mismatched shape") {
    CHECK_THROWS_AS(refold(UnfoldedMatrix{Matrix::Zero(6, 8), {3, 2, 3}}), StructuralError);
}

TEST_CASE("unfolding is linear") {
    const MultiplexGraph a = testing::random_graph(5, 2, 3, 7);
    const MultiplexGraph b = testing::random_graph(5, 2, 3, 8);
    const MultiplexGraph mean = average_replicates({a, b});
    CHECK((unfold(mean).data - 0.5 * (unfold(a).data + unfold(b).data)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("missing blocks are named") {
    std::map<std::pair<std::size_t, std::size_t>, Matrix> blocks;
    blocks[{0, 0}] = Matrix::Zero(3, 3);
    blocks[{0, 1}] = Matrix::Zero(3, 3);
    blocks[{1, 0}] = Matrix::Zero(3, 3);
    try {
        MultiplexGraph::from_map({3, 2, 2}, blocks);
        FAIL("expected a StructuralError");
    } catch (const StructuralError& e) {
        CHECK(std::string(e.what()).find("k=2, t=2") != std::string::npos);
    }
    blocks[{1, 1}] = Matrix::Zero(3, 3);
    CHECK_NOTHROW(MultiplexGraph::from_map({3, 2, 2}, blocks));
}

TEST_CASE("graph invariants") {
    Matrix bad = Matrix::Zero(3, 3);
    bad(0, 1) = 0.5;
    CHECK_THROWS_AS(MultiplexGraph({3, 1, 1}, {Block(bad)}), DomainError);
    CHECK_NOTHROW(MultiplexGraph({3, 1, 1}, {Block(bad)}, true, EntryKind::averaged));
    CHECK_THROWS_AS(MultiplexGraph({3, 1, 1}, {Block(bad)}, false, EntryKind::averaged), DomainError);
    bad(0, 1) = 1.5;
    CHECK_THROWS_AS(MultiplexGraph({3, 1, 1}, {Block(bad)}, true, EntryKind::averaged), DomainError);
    CHECK_THROWS_AS(MultiplexGraph({3, 1, 2}, {Block(Matrix::Zero(3, 3))}), StructuralError);
    CHECK_THROWS_AS(MultiplexGraph({3, 1, 1}, {Block(Matrix::Zero(3, 2))}), StructuralError);
    CHECK_THROWS_AS(MultiplexGraph({0, 1, 1}, {}), StructuralError);
}

TEST_CASE("sparse and dense storage expose the same values") {
    const MultiplexGraph g = testing::random_graph(30, 2, 2, 3, 0.05);
    const MultiplexGraph sparse = g.compacted(0.5);
    CHECK(sparse.block(0, 0).is_sparse());
    CHECK(sparse.same_values(g));
    CHECK(unfold(sparse).data == unfold(g).data);
    CHECK_FALSE(sparse.densified().block(1, 1).is_sparse());
    CHECK(sparse.block(1, 0).nonzeros() == g.block(1, 0).nonzeros());
}

TEST_CASE("averaging replicates") {
    const MultiplexGraph g = testing::random_graph(8, 2, 2, 21);
    const MultiplexGraph single = average_replicates({g});
    CHECK(single.kind() == EntryKind::averaged);
    CHECK(unfold(single).data == unfold(g).data);

    // A graph and its complement (off the diagonal) average to 1/2.
    std::vector<Block> complement;
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t t = 0; t < 2; ++t) {
            Matrix c = Matrix::Ones(8, 8) - g.block(k, t).dense();
            c.diagonal().setZero();
            complement.emplace_back(c);
        }
    const MultiplexGraph half = average_replicates({g, MultiplexGraph({8, 2, 2}, std::move(complement))});
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) CHECK(half.at(1, 0, i, j) == (i == j ? 0.0 : 0.5));

    std::vector<MultiplexGraph> reps;
    Matrix sum = Matrix::Zero(16, 16);
    for (std::uint64_t r = 0; r < 11; ++r) {
        reps.push_back(testing::random_graph(8, 2, 2, 300 + r));
        sum += unfold(reps.back()).data;
    }
    CHECK((unfold(average_replicates(reps)).data - sum / 11.0).cwiseAbs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(average_replicates({}), ValidationError);
    CHECK_THROWS_AS(average_replicates({g, testing::random_graph(8, 2, 1, 5)}), StructuralError);
}

TEST_CASE("layer selection and stacking") {
    const MultiplexGraph g = testing::random_graph(5, 4, 2, 31);
    const MultiplexGraph sub = g.select_layers({3, 0});
    CHECK(sub.layers() == 2);
    CHECK(sub.block(0, 1).dense() == g.block(3, 1).dense());
    CHECK(sub.block(1, 0).dense() == g.block(0, 0).dense());
    CHECK_THROWS_AS(g.select_layers({4}), ValidationError);

    const MultiplexGraph stacked = stack_layers({g.select_layers({2}), g.select_layers({1})});
    CHECK(stacked.same_values(g.select_layers({2, 1})));
    CHECK_THROWS_AS(stack_layers({g, testing::random_graph(6, 1, 2, 1)}), StructuralError);
}
