#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qmt/hamiltonian.hpp"
#include "qmt/hermitian.hpp"
#include "qmt/models.hpp"

using namespace qmt;

namespace {

MatrixXcd pauli_x() {
    MatrixXcd s(2, 2);
    s << 0, 1, 1, 0;
    return s;
}

MatrixXcd pauli_z() {
    MatrixXcd s(2, 2);
    s << 1, 0, 0, -1;
    return s;
}

FiniteVolumeState state_on_ball(int k, int n, int d, MatrixXcd rho) {
    const std::vector<SiteCoord> sites = lambda_sites(k, n);
    LabeledOperator op(sites, std::vector<int>(sites.size(), d), std::move(rho));
    return FiniteVolumeState{n, DensityState(std::move(op))};
}

} // namespace

TEST_CASE("potentials are spectral logarithms of faithful densities") {
    std::mt19937_64 rng(401);

    // Uniform density: the potential is the flat level shift.
    const FiniteVolumeState uniform =
        state_on_ball(1, 1, 2, MatrixXcd::Identity(4, 4) / 4.0);
    const LabeledOperator flat = potential_from_state(uniform);
    CHECK(max_abs(flat.mat - std::log(4.0) * MatrixXcd::Identity(4, 4)) <= 1e-12);

    // Exponentiating the potential recovers the state exactly.
    const MatrixXcd rho = random_density(rng, 8);
    const FiniteVolumeState state = state_on_ball(1, 2, 2, rho);
    const LabeledOperator h = potential_from_state(state);
    CHECK(max_abs(h.mat - h.mat.adjoint()) <= 1e-12);
    CHECK(std::abs(herm_exp(-h.mat).trace().real() - 1.0) <= 1e-11);
    CHECK(max_abs(herm_exp(-h.mat) - rho) <= 1e-10);
    for (int t = 0; t < 5; ++t) {
        const MatrixXcd a = random_hermitian(rng, 8);
        const complexd lhs = (herm_exp(-h.mat) * a).trace();
        const complexd rhs = (rho * a).trace();
        CHECK(std::abs(lhs - rhs) <= 1e-10);
    }

    // A pure state has no logarithm.
    MatrixXcd pure = MatrixXcd::Zero(2, 2);
    pure(0, 0) = 1.0;
    CHECK_THROWS_AS(potential_from_state(state_on_ball(1, 0, 2, pure)), std::runtime_error);
}

TEST_CASE("potential families are normalized and compatible under restriction") {
    const QmsSpec spec = random_localized_qms(901, 2, 2, 2, 2);
    const PotentialFamily family = potential_family(spec, 2);
    REQUIRE(family.h.size() == 3);

    for (const auto& h : family.h) {
        CHECK(std::abs(herm_exp(-h.mat).trace().real() - 1.0) <= 1e-11);
    }

    // Tracing the deepest generation out of one exponential gives the next.
    for (int n = 0; n <= 1; ++n) {
        const auto inner = static_cast<int>(lambda_size(2, n));
        const auto outer = static_cast<int>(lambda_size(2, n + 1));
        std::vector<int> keep;
        for (int i = 0; i < inner; ++i) keep.push_back(i);
        const MatrixXcd sliced = oracle::partial_trace_loops(
            herm_exp(-family.h[static_cast<std::size_t>(n) + 1].mat),
            std::vector<int>(static_cast<std::size_t>(outer), 2), keep);
        CHECK(max_abs(sliced - herm_exp(-family.h[static_cast<std::size_t>(n)].mat)) <= 1e-9);
    }
}

TEST_CASE("product chains decompose into one-site logarithms") {
    std::mt19937_64 rng(402);

    // One label, trivial second factor, chain factors that split per child.
    ClassicalData data;
    data.k = 2;
    data.q = 1;
    data.n_dims = {2};
    data.m_dims = {1};
    data.pi0 = Eigen::VectorXd::Ones(1);
    data.pi.assign(4, Eigen::MatrixXd::Ones(1, 1));
    const MatrixXcd rho_a = random_density(rng, 2);
    const MatrixXcd rho_b = random_density(rng, 2);
    FactorStates fs;
    fs.eta0.push_back(random_density(rng, 2));
    fs.eta.assign(4, {kron(rho_a, rho_b)});
    const BlockStructure bs = BlockStructure::standard(data.n_dims, data.m_dims);

    const QmsSpec spec = spec_from_classical(data, fs, bs);
    const InteractionDecomposition dec = decompose(spec, 2, 1e-11);

    // Bond terms are sums of one-site logarithms on the children.
    const MatrixXcd ha = -herm_log(rho_a);
    const MatrixXcd hb = -herm_log(rho_b);
    const MatrixXcd eye = MatrixXcd::Identity(2, 2);
    const MatrixXcd want = kron(eye, kron(ha, eye)) + kron(eye, kron(eye, hb));
    for (const auto& level : dec.h_bond) {
        for (const auto& term : level) CHECK(max_abs(term - want) <= 1e-11);
    }
    // The root term is the logarithm of the root factor, and the trivial
    // second factors leave no boundary field.
    CHECK(max_abs(dec.h_root - (-herm_log(fs.eta0[0]))) <= 1e-11);
    for (const auto& level : dec.h_hat) {
        for (const auto& term : level) CHECK(max_abs(term) <= 1e-12);
    }
}

TEST_CASE("diagonal competing-interaction terms commute exactly") {
    IsingParams params;
    params.beta = 0.5;
    params.j = 1.0;
    params.jp = 0.3;
    params.k = 2;
    const IsingModel model = ising_competing_model(params, 2);

    const CommutatorResiduals res = commutation_residuals(model.ham);
    CHECK(res.root_bond <= 1e-12);
    CHECK(res.bond_boundary <= 1e-12);
    CHECK(res.root_boundary <= 1e-12);
    CHECK(res.bond_bond <= 1e-12);
}

TEST_CASE("random chains decompose into commuting terms reassembling the potential") {
    const QmsSpec spec = random_localized_qms(902, 2, 2, 2, 2);
    const InteractionDecomposition dec = decompose(spec, 2);

    const LabeledOperator assembled = assemble_potential(dec, 2);
    const LabeledOperator direct = potential_from_state(density_matrix(spec, 2));
    CHECK(max_abs(assembled.mat - direct.mat) <= 1e-9);
    CHECK(commutation_residuals(dec).max() <= 1e-10);

    // Non-scalar blocks with asymmetric splits.
    const QmsSpec rich = random_localized_qms(903, 1, 4, 2, 2, {{2, 1}, {1, 2}});
    const InteractionDecomposition rich_dec = decompose(rich, 2);
    const LabeledOperator rich_assembled = assemble_potential(rich_dec, 2);
    const LabeledOperator rich_direct = potential_from_state(density_matrix(rich, 2));
    CHECK(max_abs(rich_assembled.mat - rich_direct.mat) <= 1e-9);
    CHECK(commutation_residuals(rich_dec).max() <= 1e-10);

    CHECK_THROWS_AS(decompose(spec, 3), std::invalid_argument);
}

TEST_CASE("conflicting hand-built terms report their commutator") {
    InteractionDecomposition dec;
    dec.k = 1;
    dec.d = 2;
    dec.h_root = pauli_x();
    dec.h_bond = {{kron(pauli_z(), MatrixXcd::Identity(2, 2))}};
    dec.h_hat = {{MatrixXcd::Zero(2, 2)}, {MatrixXcd::Zero(2, 2)}};
    dec.validate();

    const CommutatorResiduals res = commutation_residuals(dec);
    CHECK(std::abs(res.root_bond - 2.0) <= 1e-12);
    CHECK(res.bond_boundary <= 1e-12);
    CHECK(res.root_boundary <= 1e-12);
    CHECK(res.bond_bond <= 1e-12);

    InteractionDecomposition skewed = dec;
    skewed.h_root = MatrixXcd::Zero(2, 2);
    skewed.h_root(0, 1) = 1.0;  // not hermitian
    CHECK_THROWS_AS(skewed.validate(), std::invalid_argument);

    InteractionDecomposition thin = dec;
    thin.h_bond[0].push_back(thin.h_bond[0][0]);  // too many terms for the level
    CHECK_THROWS_AS(thin.validate(), std::invalid_argument);
}

TEST_CASE("free interaction terms induce normalized trace slices") {
    std::mt19937_64 rng(403);
    const double shift = std::log(4.0);

    InteractionDecomposition dec;
    dec.k = 2;
    dec.d = 2;
    dec.h_root = -std::log(2.0) * MatrixXcd::Identity(2, 2);
    dec.h_bond = {{MatrixXcd::Zero(8, 8)}};
    dec.h_hat = {{shift * MatrixXcd::Identity(2, 2)},
                 {shift * MatrixXcd::Identity(2, 2), shift * MatrixXcd::Identity(2, 2)}};
    dec.validate();

    const LevelTransitionExpectation lev = transition_from_hamiltonian(dec, 0);
    REQUIRE(lev.per_site.size() == 1);
    const Superop& map = lev.per_site[0].map;
    CHECK(max_abs(map.apply(MatrixXcd::Identity(8, 8)) - MatrixXcd::Identity(2, 2)) <= 1e-10);
    for (int t = 0; t < 10; ++t) {
        const MatrixXcd a = random_hermitian(rng, 8);
        const MatrixXcd sliced = trace_out_legs(a, {2, 2, 2}, {1, 2}) / 4.0;
        CHECK(max_abs(map.apply(a) - sliced) <= 1e-10);
    }

    // The induced chain is the uniform product state.
    const QmsSpec spec = qms_from_hamiltonian(dec);
    const MatrixXcd rho1 = density_matrix(spec, 1).rho.matrix();
    CHECK(max_abs(rho1 - MatrixXcd::Identity(8, 8) / 8.0) <= 1e-10);

    // A bond clashing with the boundary field below it is rejected.
    InteractionDecomposition clash;
    clash.k = 1;
    clash.d = 2;
    clash.h_root = MatrixXcd::Zero(2, 2);
    clash.h_bond = {{kron(MatrixXcd::Identity(2, 2), pauli_x())}};
    clash.h_hat = {{MatrixXcd::Zero(2, 2)}, {pauli_z()}};
    CHECK_THROWS_AS(transition_from_hamiltonian(clash, 0), std::runtime_error);
}

TEST_CASE("interaction terms rebuild the chain they came from") {
    const QmsSpec spec = random_localized_qms(904, 2, 2, 2, 2);
    const InteractionDecomposition dec = decompose(spec, 2);
    const QmsSpec rebuilt = qms_from_hamiltonian(dec);
    REQUIRE(rebuilt.levels.size() == 2);

    for (int n = 0; n <= 2; ++n) {
        const MatrixXcd a = density_matrix(spec, n).rho.matrix();
        const MatrixXcd b = density_matrix(rebuilt, n).rho.matrix();
        CHECK(max_abs(a - b) <= 1e-9);
    }
    CHECK(markov_check(rebuilt, 0) <= 1e-9);
}
