#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qmt/models.hpp"

using namespace qmt;

namespace {

MatrixXcd pauli_z() {
    MatrixXcd s(2, 2);
    s << 1, 0, 0, -1;
    return s;
}

double max_offdiag(const MatrixXcd& a) {
    double worst = 0.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (r != c) worst = std::max(worst, std::abs(a(r, c)));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("free couplings induce normalized trace slices at every level") {
    std::mt19937_64 rng(601);

    IsingParams flat;
    flat.beta = 0.7;
    flat.j = 0.0;
    flat.jp = 0.0;
    flat.k = 2;
    const IsingModel pair_tree = ising_competing_model(flat, 1);
    for (const auto& level : pair_tree.spec.levels) {
        for (const auto& site : level.per_site) {
            for (int t = 0; t < 3; ++t) {
                const MatrixXcd a = random_hermitian(rng, 8);
                const MatrixXcd sliced = trace_out_legs(a, {2, 2, 2}, {1, 2}) / 4.0;
                CHECK(max_abs(site.map.apply(a) - sliced) <= 1e-10);
            }
        }
    }
    const MatrixXcd rho = density_matrix(pair_tree.spec, 1).rho.matrix();
    CHECK(max_abs(rho - MatrixXcd::Identity(8, 8) / 8.0) <= 1e-12);

    flat.k = 1;
    const IsingModel line = ising_competing_model(flat, 1);
    for (const auto& level : line.spec.levels) {
        for (const auto& site : level.per_site) {
            const MatrixXcd a = random_hermitian(rng, 4);
            const MatrixXcd sliced = trace_out_legs(a, {2, 2}, {1}) / 2.0;
            CHECK(max_abs(site.map.apply(a) - sliced) <= 1e-10);
        }
    }
}

TEST_CASE("one-dimensional chains match transfer-matrix marginals") {
    IsingParams params;
    params.beta = 0.8;
    params.j = 0.6;
    params.jp = 0.0;
    params.k = 1;
    const IsingModel model = ising_competing_model(params, 2);

    // Free chain on four sites; compare the three-site marginal computed by
    // transfer-matrix contraction against the diagonal chain weights.
    const double b = params.beta * params.j;
    Eigen::Matrix2d t;
    t << std::exp(b), std::exp(-b), std::exp(-b), std::exp(b);
    const Eigen::Vector2d tail = t * Eigen::Vector2d::Ones();
    const double z = (t * t * tail).sum();

    const MatrixXcd rho = density_matrix(model.spec, 2).rho.matrix();
    CHECK(max_offdiag(rho) <= 1e-12);
    for (int s0 = 0; s0 < 2; ++s0) {
        for (int s1 = 0; s1 < 2; ++s1) {
            for (int s2 = 0; s2 < 2; ++s2) {
                const double want = t(s0, s1) * t(s1, s2) * tail(s2) / z;
                const double got = rho(4 * s0 + 2 * s1 + s2, 4 * s0 + 2 * s1 + s2).real();
                CHECK(std::abs(got - want) <= 1e-10);
            }
        }
    }
}

TEST_CASE("root magnetization matches the exhaustive classical average") {
    IsingParams params;
    params.beta = 0.5;
    params.j = 1.0;
    params.jp = 0.3;
    params.k = 2;
    const IsingModel model = ising_competing_model(params, 2);

    const std::vector<double> mu = oracle::ising_gibbs_exhaustive(2, 3, 0.5, 1.0, 0.3);
    const int sites = static_cast<int>(lambda_size(2, 3));
    double classical = 0.0;
    for (std::size_t r = 0; r < mu.size(); ++r) {
        const int bit = static_cast<int>((r >> (sites - 1)) & 1u);
        classical += mu[r] * (1.0 - 2.0 * bit);
    }
    const MatrixXcd rho0 = density_matrix(model.spec, 0).rho.matrix();
    const double quantum = (rho0 * pauli_z()).trace().real();
    CHECK(std::abs(quantum - classical) <= 1e-9);

    // The whole diagonal of the two-ball state is the classical marginal.
    const std::vector<double> marginal = oracle::marginal_to_ball(mu, 2, 3, 2);
    const MatrixXcd rho2 = density_matrix(model.spec, 2).rho.matrix();
    CHECK(max_offdiag(rho2) <= 1e-12);
    for (std::size_t r = 0; r < marginal.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        CHECK(std::abs(rho2(i, i).real() - marginal[r]) <= 1e-9);
    }
}

TEST_CASE("the same seed reproduces the chain bit for bit") {
    const QmsSpec first = random_localized_qms(77, 2, 2, 2, 1);
    const QmsSpec second = random_localized_qms(77, 2, 2, 2, 1);
    REQUIRE(first.levels.size() == second.levels.size());

    CHECK(max_abs(first.rho0.matrix() - second.rho0.matrix()) == 0.0);
    for (std::size_t l = 0; l < first.levels.size(); ++l) {
        REQUIRE(first.levels[l].per_site.size() == second.levels[l].per_site.size());
        for (std::size_t s = 0; s < first.levels[l].per_site.size(); ++s) {
            const auto& a = first.levels[l].per_site[s];
            const auto& b = second.levels[l].per_site[s];
            REQUIRE(a.blocks.size() == b.blocks.size());
            for (std::size_t w = 0; w < a.blocks.size(); ++w) {
                CHECK(max_abs(a.blocks[w].v - b.blocks[w].v) == 0.0);
                CHECK(max_abs(a.blocks[w].phi - b.blocks[w].phi) == 0.0);
            }
        }
    }

    const QmsSpec other = random_localized_qms(78, 2, 2, 2, 1);
    CHECK(max_abs(first.rho0.matrix() - other.rho0.matrix()) > 0.0);
}

TEST_CASE("generated chains are stationary faithful markov states") {
    struct Shape {
        std::uint64_t seed;
        int k, d, q, n;
        std::vector<LabelSplit> splits;
    };
    const std::vector<Shape> shapes = {
        {501, 2, 2, 2, 1, {}},
        {502, 1, 4, 2, 2, {{2, 1}, {1, 2}}},
        {503, 3, 2, 1, 1, {}},
    };

    for (const auto& shape : shapes) {
        const QmsSpec spec =
            random_localized_qms(shape.seed, shape.k, shape.d, shape.q, shape.n, shape.splits);
        REQUIRE(spec.n_max() == shape.n);

        for (const auto& level : spec.levels) {
            for (const auto& site : level.per_site) {
                const CpReport report = positivity_report(site.map);
                CHECK(report.completely_positive);
                CHECK(report.unital_residual <= 1e-10);
                MatrixXcd cover = MatrixXcd::Zero(shape.d, shape.d);
                for (const auto& blk : site.blocks) cover += blk.p;
                CHECK(max_abs(cover - MatrixXcd::Identity(shape.d, shape.d)) <= 1e-12);
            }
        }

        for (int j = 0; j < spec.n_max(); ++j) CHECK(markov_check(spec, j) <= 1e-9);
        CHECK(local_faithfulness(density_matrix(spec, 1)).faithful);

        // The root state is the marginal of the one-ball state.
        const MatrixXcd rho1 = density_matrix(spec, 1).rho.matrix();
        std::vector<int> dims(1 + static_cast<std::size_t>(shape.k), shape.d);
        std::vector<int> drop;
        for (int y = 0; y < shape.k; ++y) drop.push_back(1 + y);
        const MatrixXcd root = trace_out_legs(rho1, dims, drop);
        CHECK(max_abs(root - density_matrix(spec, 0).rho.matrix()) <= 1e-11);
    }
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(random_localized_qms(1, 2, 2, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(random_localized_qms(1, 2, 4, 2, 1, {{2, 1}, {1, 1}}), std::invalid_argument);

    IsingParams bad;
    bad.beta = 0.0;
    CHECK_THROWS_AS(ising_competing_model(bad, 1), std::invalid_argument);
    bad.beta = 1.0;
    bad.k = 0;
    CHECK_THROWS_AS(ising_competing_model(bad, 1), std::invalid_argument);
    bad.k = 2;
    CHECK_THROWS_AS(ising_competing_model(bad, -1), std::invalid_argument);
}
