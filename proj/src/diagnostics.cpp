#include "mplex/diagnostics.hpp"

#include "mplex/embedding.hpp"
#include "mplex/error.hpp"
#include "mplex/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace mplex {

namespace {

using Index = Eigen::Index;

struct CellResult {
    double two_to_inf = 0.0;
    double frobenius = 0.0;
    Vector gram;
};

MultiplexGraph probability_graph(const LatentPair& latents) {
    const Geometry& g = latents.geometry;
    std::vector<Block> blocks;
    blocks.reserve(g.layers * g.times);
    for (std::size_t k = 0; k < g.layers; ++k)
        for (std::size_t t = 0; t < g.times; ++t)
            blocks.emplace_back(Matrix(latents.probabilities(k, t).cwiseMax(0.0).cwiseMin(1.0)));
    return MultiplexGraph(g, std::move(blocks), true, EntryKind::averaged);
}

}  // namespace

Matrix align_least_squares(const Matrix& xhat, const Matrix& x) {
    if (xhat.rows() != x.rows() || xhat.cols() != x.cols())
        throw StructuralError("alignment needs matrices of equal shape");
    const Matrix gram = xhat.transpose() * xhat;
    Eigen::LDLT<Matrix> ldlt(gram);
    const double scale = gram.diagonal().cwiseAbs().maxCoeff();
    const Vector pivots = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || !(scale > 0.0) || pivots.minCoeff() <= 1e-12 * scale)
        throw DegenerateInputError("alignment input is not of full column rank");
    return ldlt.solve(xhat.transpose() * x);
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ConsistencyCurve consistency_sweep(const SpecFamily& family, const std::vector<std::size_t>& n_list,
                                   std::size_t seeds, const SeedSpec& seed, const SweepOptions& options) {
    if (n_list.empty()) throw ValidationError("consistency sweep needs at least one n");
    if (seeds < 1) throw ValidationError("consistency sweep needs at least one seed");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 2) throw ValidationError("consistency sweep needs n >= 2");
        if (i > 0 && n_list[i] <= n_list[i - 1]) throw ValidationError("n values must be strictly increasing");
    }

    std::vector<LatentPair> latents;
    latents.reserve(n_list.size());
    std::vector<BlockModelSpec> specs;
    for (std::size_t n : n_list) {
        specs.push_back(family(n));
        if (specs.back().n() != n)
            throw ValidationError("spec family returned " + std::to_string(specs.back().n()) +
                                  " nodes for n = " + std::to_string(n));
        latents.push_back(sbm_to_latents(specs.back()));
    }

    std::vector<CellResult> cells(n_list.size() * seeds);
    parallel_for(cells.size(), options.threads, [&](std::size_t idx) {
        const std::size_t i = idx / seeds;
        const std::size_t s = idx % seeds;
        const std::size_t n = n_list[i];
        const LatentPair& truth = latents[i];
        const MultiplexGraph graph =
            options.noise_free
                ? probability_graph(truth)
                : sample_dmpsbm(specs[i], n, seed.child(Purpose::sweep, n).with(Purpose::observed, s));
        const DuaseEmbedding e = duase(graph, truth.dimension(), options.svd);
        const Matrix q = align_least_squares(e.Xhat, truth.X);
        const Matrix residual = e.Xhat * q - truth.X;
        const double nd = static_cast<double>(n);
        cells[idx].two_to_inf = std::sqrt(nd / std::log(nd)) * two_to_infinity_norm(residual);
        cells[idx].frobenius = residual.norm() / std::sqrt(static_cast<double>(residual.rows()));
        cells[idx].gram = e.singular_values / nd;
    });

    ConsistencyCurve curve;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        ConsistencyPoint p;
        p.n = n_list[i];
        p.seeds = seeds;
        std::vector<double> frob;
        p.gram = Vector::Zero(latents[i].dimension());
        for (std::size_t s = 0; s < seeds; ++s) {
            const CellResult& c = cells[i * seeds + s];
            p.errors.push_back(c.two_to_inf);
            frob.push_back(c.frobenius);
            p.gram += c.gram;
        }
        p.gram /= static_cast<double>(seeds);
        p.median = quantile(p.errors, 0.5);
        p.q05 = quantile(p.errors, 0.05);
        p.q25 = quantile(p.errors, 0.25);
        p.q75 = quantile(p.errors, 0.75);
        p.q95 = quantile(p.errors, 0.95);
        p.frobenius_median = quantile(frob, 0.5);
        curve.points.push_back(std::move(p));
    }
    return curve;
}

void write_consistency_csv(std::ostream& out, const ConsistencyCurve& curve) {
    Index d = 0;
    for (const auto& p : curve.points) d = std::max(d, p.gram.size());
    out << "n,seeds,median,q05,q25,q75,q95,frobenius_median";
    for (Index j = 0; j < d; ++j) out << ",gram_" << j + 1;
    out << '\n';
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    };
    for (const auto& p : curve.points) {
        out << p.n << ',' << p.seeds << ',' << num(p.median) << ',' << num(p.q05) << ',' << num(p.q25) << ','
            << num(p.q75) << ',' << num(p.q95) << ',' << num(p.frobenius_median);
        for (Index j = 0; j < d; ++j) out << ',' << (j < p.gram.size() ? num(p.gram(j)) : "");
        out << '\n';
    }
}

}  // namespace mplex
