#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "qmt/hermitian.hpp"
#include "qmt/models.hpp"
#include "qmt/qms.hpp"

using namespace qmt;

namespace {

LabeledOperator ball_operator(const QmsSpec& spec, int n, const MatrixXcd& m) {
    const auto sites = lambda_sites(spec.k, n);
    return LabeledOperator(sites, std::vector<int>(sites.size(), spec.d), m);
}

} // namespace

TEST_CASE("nested evaluation is a state") {
    const QmsSpec spec = random_localized_qms(2024, 2, 2, 2, 2);
    std::mt19937_64 rng(163);

    // Unit value on the identity of every ball.
    for (int n = 0; n <= 2; ++n) {
        const std::size_t dim = std::size_t{1} << lambda_size(2, n);
        const LabeledOperator one =
            ball_operator(spec, n, MatrixXcd::Identity(static_cast<Eigen::Index>(dim),
                                                       static_cast<Eigen::Index>(dim)));
        CHECK(std::abs(evaluate_nested(spec, one) - complexd(1.0)) < 1e-11);
    }

    // Real nonnegative on positive elements, bounded by the operator norm.
    for (int trial = 0; trial < 5; ++trial) {
        const MatrixXcd g = random_matrix(rng, 8, 8);
        const MatrixXcd pos = g.adjoint() * g;
        const complexd val = evaluate_nested(spec, ball_operator(spec, 1, pos));
        CHECK(std::abs(val.imag()) < 1e-11);
        CHECK(val.real() > -1e-11);
        const MatrixXcd h = random_hermitian(rng, 8);
        CHECK(std::abs(evaluate_nested(spec, ball_operator(spec, 1, h))) <=
              operator_norm(h) + 1e-10);
    }

    // Linearity.
    const MatrixXcd a = random_matrix(rng, 8, 8);
    const MatrixXcd b = random_matrix(rng, 8, 8);
    const complexd alpha(0.3, -1.1);
    const complexd lhs = evaluate_nested(spec, ball_operator(spec, 1, a + alpha * b));
    const complexd rhs = evaluate_nested(spec, ball_operator(spec, 1, a)) +
                         alpha * evaluate_nested(spec, ball_operator(spec, 1, b));
    CHECK(std::abs(lhs - rhs) < 1e-12);

    // Support deeper than the spec provides is refused.
    const auto deep = lambda_sites(2, 4);
    CHECK_THROWS_AS(evaluate_nested(spec, LabeledOperator({deep.back()}, {2},
                                                          MatrixXcd::Identity(2, 2))),
                    std::exception);
}

TEST_CASE("pushed densities represent the nested functional") {
    const QmsSpec spec = random_localized_qms(77, 2, 2, 2, 2);
    std::mt19937_64 rng(167);

    // Depth zero returns the root density itself.
    const FiniteVolumeState s0 = density_matrix(spec, 0);
    CHECK(max_abs(s0.rho.matrix() - spec.rho0.matrix()) < 1e-13);

    for (int n = 1; n <= 2; ++n) {
        const FiniteVolumeState sn = density_matrix(spec, n);
        CHECK(std::abs(sn.rho.matrix().trace() - 1.0) < 1e-12);
        const int dim = static_cast<int>(sn.rho.op.total_dim());
        for (int trial = 0; trial < 25; ++trial) {
            const MatrixXcd h = random_hermitian(rng, dim);
            const complexd via_density = (sn.rho.matrix() * h).trace();
            const complexd nested = evaluate_nested(spec, ball_operator(spec, n, h));
            CHECK(std::abs(via_density - nested) < 1e-11);
        }
    }

    // Product observables at depth one, evaluated both ways.
    const FiniteVolumeState s1 = density_matrix(spec, 1);
    const auto sites = lambda_sites(2, 1);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<MatrixXcd> factors{random_matrix(rng, 2, 2), random_matrix(rng, 2, 2),
                                       random_matrix(rng, 2, 2)};
        const LabeledOperator prod = product_operator(sites, {2, 2, 2}, factors);
        CHECK(std::abs((s1.rho.matrix() * prod.mat).trace() - evaluate_nested(spec, prod)) <
              1e-11);
    }
}

TEST_CASE("generated chains pass the invariance check at every level") {
    QmsSpec spec = random_localized_qms(5150, 2, 2, 2, 2);
    for (int j = 0; j + 1 <= spec.n_max(); ++j) {
        CHECK(markov_check(spec, j) <= 1e-9);
    }

    // Boundary marginals of an invariant chain coincide with the densities.
    for (int m = 0; m <= 2; ++m) {
        CHECK(max_abs(boundary_marginal(spec, m).mat - density_matrix(spec, m).rho.matrix()) <
              1e-9);
    }
}

namespace {

// A single-successor site map with two one-dimensional blocks and the given
// successor-leg states.
SiteTransitionExpectation scalar_site(const SiteCoord& site, int level, const MatrixXcd& phi0,
                                      const MatrixXcd& phi1) {
    SiteTransitionExpectation e;
    e.site = site;
    e.level = level;
    e.d = 2;
    e.k = 1;
    for (int w = 0; w < 2; ++w) {
        TransitionBlock b;
        b.label = w;
        b.n_dim = 1;
        b.m_dim = 1;
        b.v = MatrixXcd::Zero(2, 1);
        b.v(w, 0) = 1.0;
        b.p = b.v * b.v.adjoint();
        b.phi = (w == 0) ? phi0 : phi1;
        e.blocks.push_back(std::move(b));
    }
    e.map = pinched_superop(2, 1, e.blocks);
    return e;
}

} // namespace

TEST_CASE("invariance holds only for roots avoiding a misaligned block") {
    // The second block's successor state has coherences the next level's
    // blocks cannot carry, so the chain is Markov exactly when the root puts
    // no weight there.  Replacing the root by a generic state exposes the
    // defect.
    MatrixXcd diag_phi(2, 2), offdiag_phi(2, 2), half(2, 2);
    diag_phi << 0.6, 0.0, 0.0, 0.4;
    offdiag_phi << 0.5, 0.3, 0.3, 0.5;
    half << 0.5, 0.0, 0.0, 0.5;

    MatrixXcd rho = MatrixXcd::Zero(2, 2);
    rho(0, 0) = 1.0;
    QmsSpec spec{1, 2, DensityState(LabeledOperator({root_site(1)}, {2}, rho)), {}};
    LevelTransitionExpectation l0, l1;
    l0.level = 0;
    l0.per_site = {scalar_site(enumerate_level(1, 0).vertices[0], 0, diag_phi, offdiag_phi)};
    l1.level = 1;
    l1.per_site = {scalar_site(enumerate_level(1, 1).vertices[0], 1, half, half)};
    spec.levels = {l0, l1};
    spec.validate();
    CHECK(markov_check(spec, 0) <= 1e-12);

    std::mt19937_64 rng(7);
    QmsSpec perturbed = spec;
    perturbed.rho0 =
        DensityState(LabeledOperator({root_site(1)}, {2}, random_density(rng, 2)));
    CHECK(markov_check(perturbed, 0) > 1e-3);
}

TEST_CASE("densities of an invariant chain are compatible under restriction") {
    const QmsSpec spec = random_localized_qms(31337, 2, 2, 2, 2);
    for (int n = 0; n + 1 <= 2; ++n) {
        const FiniteVolumeState small = density_matrix(spec, n);
        const FiniteVolumeState big = density_matrix(spec, n + 1);
        const LabeledOperator reduced = partial_trace(big.rho.op, lambda_sites(2, n));
        CHECK(max_abs(reduced.mat - small.rho.matrix()) < 1e-10);
    }
}

TEST_CASE("faithfulness classifies densities correctly") {
    // The normalized identity is faithful.
    const MatrixXcd uniform = MatrixXcd::Identity(4, 4) / 4.0;
    const FiniteVolumeState s{0, DensityState(LabeledOperator({root_site(2)}, {4}, uniform))};
    const FaithfulnessReport ru = local_faithfulness(s);
    CHECK(ru.faithful);
    CHECK(ru.min_eigenvalue == doctest::Approx(0.25).epsilon(1e-12));

    // A pure state is not.
    MatrixXcd pure = MatrixXcd::Zero(2, 2);
    pure(0, 0) = 1.0;
    const FiniteVolumeState sp{0, DensityState(LabeledOperator({root_site(2)}, {2}, pure))};
    CHECK_FALSE(local_faithfulness(sp).faithful);

    // The competing-interaction chain at moderate temperature is faithful.
    IsingParams params;
    params.beta = 0.5;
    params.j = 1.0;
    params.jp = 0.3;
    const IsingModel model = ising_competing_model(params, 1);
    const FaithfulnessReport ri = local_faithfulness(density_matrix(model.spec, 1));
    CHECK(ri.faithful);
    CHECK(ri.min_eigenvalue > 0.0);

    // Random chains are locally faithful by construction.
    const QmsSpec spec = random_localized_qms(11, 2, 2, 2, 1);
    CHECK(local_faithfulness(density_matrix(spec, 1)).faithful);
}

TEST_CASE("ergodic projections of the extended maps leave the residuals unchanged") {
    // Small chain (k = 1) where the extended level maps fit as square
    // superoperators.  They are idempotent, so the ergodic projection must
    // reproduce them, and every invariance residual computed through the
    // projection agrees with the direct one.
    const QmsSpec spec = random_localized_qms(4242, 1, 2, 2, 2);
    for (int j = 0; j + 1 <= spec.n_max(); ++j) {
        const Superop sq = qce_square_superop(spec.levels[static_cast<std::size_t>(j)]);
        const Superop proj = cesaro_limit(sq);
        CHECK(max_abs(proj.m - sq.m) < 1e-10);

        const FiniteVolumeState st = density_matrix(spec, j + 1);
        const int dim = static_cast<int>(st.rho.op.total_dim());
        double direct = 0.0, via_projection = 0.0;
        for (int r = 0; r < dim; ++r) {
            for (int c = 0; c < dim; ++c) {
                const MatrixXcd u = matrix_unit(dim, r, c);
                const complexd base = (st.rho.matrix() * u).trace();
                direct = std::max(direct,
                                  std::abs((st.rho.matrix() * sq.apply(u)).trace() - base));
                via_projection =
                    std::max(via_projection,
                             std::abs((st.rho.matrix() * proj.apply(u)).trace() - base));
            }
        }
        CHECK(std::abs(direct - via_projection) < 1e-10);
        CHECK(std::abs(direct - markov_check(spec, j)) < 1e-9);
    }
}
