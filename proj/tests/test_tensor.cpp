#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "qmt/hermitian.hpp"
#include "qmt/superop.hpp"
#include "qmt/tensor.hpp"

#include "oracles.hpp"

using namespace qmt;

namespace {

SiteCoord site(std::vector<int> path) { return SiteCoord(std::move(path), 2); }

} // namespace

TEST_CASE("kronecker product keeps the left factor slowest") {
    MatrixXcd a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 0, 1, 1, 0;
    const MatrixXcd ab = kron(a, b);
    REQUIRE(ab.rows() == 4);
    // Entry ((i,r),(j,s)) = a(i,j) b(r,s) with the first leg slowest.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s)
                    CHECK(ab(2 * i + r, 2 * j + s) == a(i, j) * b(r, s));

    const MatrixXcd triple = kron_list({a, b, a});
    CHECK(max_abs(triple - kron(a, kron(b, a))) == 0.0);
}

TEST_CASE("leg permutation moves factors without mixing them") {
    std::mt19937_64 rng(11);
    const MatrixXcd a = random_matrix(rng, 2, 2);
    const MatrixXcd b = random_matrix(rng, 3, 3);
    const MatrixXcd c = random_matrix(rng, 2, 2);
    const MatrixXcd abc = kron(a, kron(b, c));
    // Output leg i carries input leg order[i].
    const MatrixXcd swapped = permute_legs(abc, {2, 3, 2}, {2, 0, 1});
    CHECK(max_abs(swapped - kron(c, kron(a, b))) < 1e-14);

    const MatrixXcd perm = leg_permutation_matrix({2, 3, 2}, {2, 0, 1});
    CHECK(max_abs(perm * abc * perm.adjoint() - swapped) < 1e-14);
}

TEST_CASE("tracing legs agrees with the loop oracle") {
    std::mt19937_64 rng(7);
    const MatrixXcd x = random_matrix(rng, 12, 12);
    const std::vector<int> dims{2, 3, 2};
    CHECK(max_abs(trace_out_legs(x, dims, {1}) - oracle::partial_trace_loops(x, dims, {0, 2})) <
          1e-12);
    CHECK(max_abs(trace_out_legs(x, dims, {0, 2}) - oracle::partial_trace_loops(x, dims, {1})) <
          1e-12);
    // Tracing everything gives the scalar trace.
    const MatrixXcd full = trace_out_legs(x, dims, {0, 1, 2});
    CHECK(std::abs(full(0, 0) - x.trace()) < 1e-12);
}

TEST_CASE("two-qubit partial trace agrees with element-wise summation") {
    std::mt19937_64 rng(21);
    const MatrixXcd x = random_matrix(rng, 4, 4);
    const LabeledOperator a({site({}), site({1})}, {2, 2}, x);

    const LabeledOperator left = partial_trace(a, {site({})});
    const LabeledOperator right = partial_trace(a, {site({1})});
    CHECK(max_abs(left.mat - oracle::partial_trace_loops(x, {2, 2}, {0})) < 1e-12);
    CHECK(max_abs(right.mat - oracle::partial_trace_loops(x, {2, 2}, {1})) < 1e-12);
    CHECK(std::abs(left.mat.trace() - x.trace()) < 1e-12);
}

TEST_CASE("embedding inserts identity factors and scales the trace") {
    std::mt19937_64 rng(3);
    const MatrixXcd x = random_matrix(rng, 2, 2);
    const LabeledOperator a({site({1})}, {2}, x);
    const std::vector<SiteCoord> target{site({}), site({1}), site({2})};
    const LabeledOperator big = embed(a, target, 2);
    REQUIRE(big.total_dim() == 8);
    // Trace picks up one dimension factor per inserted identity leg.
    CHECK(std::abs(big.trace() - x.trace() * 4.0) < 1e-12);
    // Reducing back recovers the original up to the same factor.
    const LabeledOperator back = partial_trace(big, {site({1})});
    CHECK(max_abs(back.mat - 4.0 * x) < 1e-12);
    // Explicit kron against the sorted support order (root, (1), (2)).
    const MatrixXcd expected = kron(MatrixXcd::Identity(2, 2), kron(x, MatrixXcd::Identity(2, 2)));
    CHECK(max_abs(big.mat - expected) == 0.0);
}

TEST_CASE("embedding rejects missing sites and guards dimensions") {
    const LabeledOperator a({site({1})}, {2}, MatrixXcd::Identity(2, 2));
    CHECK_THROWS_AS(embed(a, {site({}), site({2})}, 2), std::exception);
    // 15 qubit legs exceed the default guard of 2^14.
    std::vector<SiteCoord> big = lambda_sites(2, 3);
    CHECK(big.size() == 15);
    CHECK_THROWS_AS(embed(a, big, 2), dimension_guard_error);
}

TEST_CASE("labeled operators insist on sorted support") {
    std::mt19937_64 rng(5);
    const MatrixXcd x = random_matrix(rng, 4, 4);
    CHECK_THROWS_AS(LabeledOperator({site({1}), site({})}, {2, 2}, x), std::invalid_argument);
    CHECK_THROWS_AS(LabeledOperator({site({})}, {2}, x), std::invalid_argument);

    const LabeledOperator a({site({}), site({1})}, {2, 2}, x);
    CHECK(a.site_index(site({})) == 0);
    CHECK(a.site_index(site({1})) == 1);
    CHECK(a.site_index(site({2})) == -1);
    CHECK(a.total_dim() == 4);
}

TEST_CASE("product operators fill omitted slots with identities") {
    std::mt19937_64 rng(9);
    const MatrixXcd x = random_matrix(rng, 2, 2);
    const LabeledOperator p =
        product_operator({site({}), site({1})}, {2, 2}, {x, MatrixXcd::Identity(2, 2)});
    CHECK(max_abs(p.mat - kron(x, MatrixXcd::Identity(2, 2))) == 0.0);
}

TEST_CASE("applying a map to selected legs matches direct conjugation") {
    std::mt19937_64 rng(13);
    const MatrixXcd x = random_matrix(rng, 8, 8);
    const LabeledOperator a({site({}), site({1}), site({2})}, {2, 2, 2}, x);
    // Trace out the middle leg via a superoperator acting on that leg alone.
    const Superop tr = Superop::from_action(2, 1, [](const MatrixXcd& m) {
        MatrixXcd out(1, 1);
        out(0, 0) = m.trace();
        return out;
    });
    const LabeledOperator reduced = apply_map_to_sites(a, {site({1})}, tr, site({1}), 1);
    const LabeledOperator direct = partial_trace(a, {site({}), site({2})});
    CHECK(max_abs(reduced.mat - direct.mat) < 1e-12);
}

TEST_CASE("density bookkeeping accepts states and rejects junk") {
    std::mt19937_64 rng(17);
    const MatrixXcd rho = random_density(rng, 4);
    CHECK_NOTHROW(DensityState(LabeledOperator({site({})}, {4}, rho)));
    // Wrong trace.
    CHECK_THROWS_AS(DensityState(LabeledOperator({site({})}, {4}, 2.0 * rho)), std::exception);
    // Not hermitian.
    MatrixXcd bad = rho;
    bad(0, 1) += complexd(0.0, 0.5);
    CHECK_THROWS_AS(DensityState(LabeledOperator({site({})}, {4}, bad)), std::exception);
    // Negative direction.
    MatrixXcd neg = MatrixXcd::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityState(LabeledOperator({site({})}, {2}, neg)), std::exception);
}

TEST_CASE("matrix units and the hermitian spanning set") {
    const MatrixXcd e01 = matrix_unit(2, 0, 1);
    CHECK(e01(0, 1) == complexd(1.0, 0.0));
    CHECK(e01.cwiseAbs().sum() == 1.0);

    const auto basis = hermitian_basis(3);
    CHECK(basis.size() == 9);
    for (const auto& b : basis) CHECK(max_abs(b - b.adjoint()) < 1e-14);
    // Orthogonality in the Hilbert-Schmidt inner product.
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (std::size_t j = i + 1; j < basis.size(); ++j) {
            CHECK(std::abs((basis[i].adjoint() * basis[j]).trace()) < 1e-12);
        }
    }
}

TEST_CASE("seeded random draws are reproducible and well formed") {
    std::mt19937_64 a(42), b(42);
    CHECK(max_abs(random_matrix(a, 3, 3) - random_matrix(b, 3, 3)) == 0.0);
    const MatrixXcd h = random_hermitian(a, 4);
    CHECK(max_abs(h - h.adjoint()) < 1e-14);
    const MatrixXcd rho = random_density(a, 4);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
    CHECK(min_eigenvalue(rho) > 0.0);
    const MatrixXcd u = random_unitary(a, 4);
    CHECK(max_abs(u.adjoint() * u - MatrixXcd::Identity(4, 4)) < 1e-12);
}

TEST_CASE("hermitian calculus: exp, log, and their round trip") {
    CHECK(max_abs(herm_exp(MatrixXcd::Zero(3, 3)) - MatrixXcd::Identity(3, 3)) < 1e-14);
    CHECK(max_abs(herm_log(MatrixXcd::Identity(3, 3))) < 1e-14);

    std::mt19937_64 rng(23);
    const MatrixXcd rho = random_density(rng, 6);
    CHECK(max_abs(herm_exp(herm_log(rho)) - rho) < 1e-10);

    const MatrixXcd h = random_hermitian(rng, 5);
    CHECK(max_abs(herm_log(herm_exp(h)) - h) < 1e-9);

    // Logarithm refuses a singular positive matrix.
    MatrixXcd sing = MatrixXcd::Zero(2, 2);
    sing(0, 0) = 1.0;
    CHECK_THROWS_AS(herm_log(sing), std::exception);

    // Operator norm is the largest singular value.
    MatrixXcd n(2, 2);
    n << 0, 2, 0, 0;
    CHECK(operator_norm(n) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(min_eigenvalue(MatrixXcd::Identity(2, 2)) == doctest::Approx(1.0));
}

TEST_CASE("block folding round trip") {
    std::mt19937_64 rng(29);
    const MatrixXcd a = random_matrix(rng, 6, 6);
    const MatrixXcd folded = fold_leading_block(a, 2, 3);
    CHECK(max_abs(unfold_leading_block(folded, 2, 3) - a) == 0.0);
}
