#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qmt/gibbs.hpp"
#include "qmt/models.hpp"

using namespace qmt;

namespace {

// Two-label chain on the k = 1 tree with hand-picked numbers, small enough
// to multiply out on paper.
GibbsTable hand_chain(int levels) {
    GibbsTable t;
    t.q = 2;
    t.k = 1;
    t.initial = Eigen::VectorXd(2);
    t.initial << 0.3, 0.7;
    Eigen::MatrixXd pi(2, 2);
    pi << 0.2, 0.8, 0.6, 0.4;
    for (int j = 0; j < levels; ++j) t.weights.push_back(pi);
    return t;
}

} // namespace

TEST_CASE("configuration ranks enumerate labels with the first site slowest") {
    const int k = 2, q = 2, n = 2;
    const std::size_t count = configuration_count(k, q, n);
    CHECK(count == 128);  // 2^7 sites in the radius-2 ball
    for (std::size_t r = 0; r < count; ++r) {
        const Configuration c = configuration_from_rank(k, q, n, r);
        CHECK(c.domain.size() == 7);
        CHECK(rank_of(c, q) == r);
        // Truncating to the inner ball keeps the leading digits.
        Configuration trunc;
        trunc.domain.assign(c.domain.begin(), c.domain.begin() + 3);
        trunc.labels.assign(c.labels.begin(), c.labels.begin() + 3);
        CHECK(rank_of(trunc, q) == r / 16);
    }
    // label_at addresses sites by coordinate.
    const Configuration c = configuration_from_rank(k, q, 1, 5);  // digits 1,0,1
    CHECK(c.label_at(root_site(k)) == 1);
    CHECK(c.label_at(c.domain[1]) == 0);
    CHECK(c.label_at(c.domain[2]) == 1);
    CHECK_THROWS_AS(c.label_at(lambda_sites(k, 2).back()), std::exception);

    const Configuration c3 = configuration_from_rank(3, 3, 1, 0);
    CHECK(c3.domain.size() == 4);
    CHECK(configuration_count(3, 3, 1) == 81);
}

TEST_CASE("table validation enforces stochastic rows") {
    GibbsTable good = hand_chain(2);
    good.validate();

    GibbsTable bad_row = hand_chain(2);
    bad_row.weights[1](0, 0) = 0.5;  // row now sums to 1.3
    CHECK_THROWS_AS(bad_row.validate(), std::exception);

    GibbsTable negative = hand_chain(2);
    negative.weights[0](1, 0) = -0.1;
    negative.weights[0](1, 1) = 1.1;
    CHECK_THROWS_AS(negative.validate(), std::exception);

    GibbsTable bad_initial = hand_chain(2);
    bad_initial.initial(0) = 0.4;
    CHECK_THROWS_AS(bad_initial.validate(), std::exception);
}

TEST_CASE("the measure recursion multiplies parent-to-children weights") {
    const GibbsTable t = hand_chain(2);

    // Depth zero returns the initial distribution.
    const std::vector<double> mu0 = measure(t, 0);
    REQUIRE(mu0.size() == 2);
    CHECK(mu0[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(mu0[1] == doctest::Approx(0.7).epsilon(1e-14));

    // Depth one on the single-successor chain: mass of (a, b) is
    // initial(a) * pi(a, b).
    const std::vector<double> mu1 = measure(t, 1);
    REQUIRE(mu1.size() == 4);
    CHECK(mu1[0] == doctest::Approx(0.3 * 0.2).epsilon(1e-14));
    CHECK(mu1[1] == doctest::Approx(0.3 * 0.8).epsilon(1e-14));
    CHECK(mu1[2] == doctest::Approx(0.7 * 0.6).epsilon(1e-14));
    CHECK(mu1[3] == doctest::Approx(0.7 * 0.4).epsilon(1e-14));

    // One-label tables concentrate on their single configuration.
    GibbsTable trivial;
    trivial.q = 1;
    trivial.k = 2;
    trivial.initial = Eigen::VectorXd::Ones(1);
    trivial.weights = {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)};
    const std::vector<double> mu_trivial = measure(trivial, 2);
    REQUIRE(mu_trivial.size() == 1);
    CHECK(mu_trivial[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("measures are probability vectors at branching two") {
    GibbsTable t;
    t.q = 2;
    t.k = 2;
    t.initial = Eigen::VectorXd(2);
    t.initial << 0.45, 0.55;
    Eigen::MatrixXd pi(2, 4);
    pi << 0.1, 0.2, 0.3, 0.4, 0.25, 0.25, 0.35, 0.15;
    t.weights = {pi, pi, pi};
    t.validate();

    for (int n = 0; n <= 2; ++n) {
        const std::vector<double> mu = measure(t, n);
        CHECK(mu.size() == configuration_count(2, 2, n));
        double total = 0.0;
        for (double v : mu) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
    }

    // The exhaustive cap refuses volumes with more than 2^20 configurations.
    GibbsTable deep = t;
    deep.weights = {pi, pi, pi, pi, pi};
    CHECK_THROWS_AS(measure(deep, 4), std::exception);
}

TEST_CASE("consecutive volumes are compatible, broken rows are detected") {
    // One-label chains are exactly compatible.
    GibbsTable trivial;
    trivial.q = 1;
    trivial.k = 2;
    trivial.initial = Eigen::VectorXd::Ones(1);
    trivial.weights = {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)};
    const CompatibilityReport r0 = compatibility_check(trivial, 0);
    CHECK(r0.marginal_defect == 0.0);
    CHECK(r0.normalization_defect == 0.0);
    CHECK(r0.exhaustive);

    GibbsTable t;
    t.q = 2;
    t.k = 2;
    t.initial = Eigen::VectorXd(2);
    t.initial << 0.45, 0.55;
    Eigen::MatrixXd pi(2, 4);
    pi << 0.1, 0.2, 0.3, 0.4, 0.25, 0.25, 0.35, 0.15;
    t.weights = {pi, pi};
    const CompatibilityReport r1 = compatibility_check(t, 1);
    CHECK(r1.marginal_defect <= 1e-12);
    CHECK(r1.normalization_defect <= 1e-12);
    CHECK(r1.exhaustive);

    // Scaling one weight row breaks the marginal property by a computable
    // amount: summing the children of the root multiplies the mass of label 0
    // by the broken row sum.
    GibbsTable broken = t;
    broken.weights[0].row(0) *= 1.2;
    const CompatibilityReport rb = compatibility_check(broken, 0);
    CHECK(rb.marginal_defect == doctest::Approx(0.2 * 0.45).epsilon(1e-12));
    CHECK(rb.normalization_defect == doctest::Approx(0.2 * 0.45).epsilon(1e-12));
}

TEST_CASE("the energy function is the exact log of the measure") {
    GibbsTable t;
    t.q = 2;
    t.k = 2;
    t.initial = Eigen::VectorXd(2);
    t.initial << 0.45, 0.55;
    Eigen::MatrixXd pi(2, 4);
    pi << 0.1, 0.2, 0.3, 0.4, 0.25, 0.25, 0.35, 0.15;
    t.weights = {pi, pi};

    const std::vector<double> mu = measure(t, 2);
    const std::vector<double> h = classical_hamiltonian(t, 2);
    REQUIRE(mu.size() == h.size());
    double z = 0.0;
    for (std::size_t r = 0; r < mu.size(); ++r) {
        CHECK(std::abs(std::exp(h[r]) - mu[r]) <= 1e-13);
        z += std::exp(h[r]);
    }
    // The normalization is baked into the energies themselves.
    CHECK(std::abs(z - 1.0) <= 1e-11);

    // One-label chains have identically zero energy.
    GibbsTable trivial;
    trivial.q = 1;
    trivial.k = 2;
    trivial.initial = Eigen::VectorXd::Ones(1);
    trivial.weights = {Eigen::MatrixXd::Ones(1, 1)};
    const std::vector<double> h0 = classical_hamiltonian(trivial, 1);
    REQUIRE(h0.size() == 1);
    CHECK(h0[0] == 0.0);

    // A reachable zero weight leaves the energy undefined.
    GibbsTable dead = hand_chain(1);
    dead.weights[0](0, 0) = 0.0;
    dead.weights[0](0, 1) = 1.0;
    CHECK_THROWS_AS(classical_hamiltonian(dead, 1), std::exception);
}

TEST_CASE("csv export lists configurations, probabilities, and energies") {
    const GibbsTable t = hand_chain(1);
    const std::string path = "gibbs_measure_test.csv";
    write_measure_csv(t, 1, path);

    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) lines.push_back(line);
    }
    in.close();
    std::remove(path.c_str());

    REQUIRE(lines.size() == 5);  // header + 4 configurations
    CHECK(lines[0] == "configuration,probability,energy");
    // Row for labels (1, 0): probability 0.7 * 0.6.
    std::stringstream row(lines[3]);
    std::string config, prob, energy;
    std::getline(row, config, ',');
    std::getline(row, prob, ',');
    std::getline(row, energy, ',');
    CHECK(config == "10");
    CHECK(std::abs(std::stod(prob) - 0.42) < 1e-15);
    CHECK(std::abs(std::stod(energy) - std::log(0.42)) < 1e-13);
}

TEST_CASE("label chains extracted from quantum specs carry the block masses") {
    const QmsSpec spec = random_localized_qms(404, 2, 2, 2, 2);
    const BlockAlignment al = align_blocks(spec);
    CHECK(al.q == 2);
    REQUIRE(al.reference.size() == 2);

    const GibbsTable t = weights_from_qms(spec);
    t.validate();
    CHECK(t.q == 2);
    CHECK(t.k == 2);
    CHECK(t.levels() == static_cast<int>(spec.levels.size()));

    // Initial masses are the central-projection weights of the root state.
    for (int w = 0; w < 2; ++w) {
        const double direct = (spec.rho0.matrix() * al.reference[static_cast<std::size_t>(w)].p)
                                  .trace()
                                  .real();
        CHECK(std::abs(t.initial(w) - direct) < 1e-12);
    }

    // Level weights are the block-state masses of the children's projections,
    // with the first child slowest in the column index.
    for (int j = 0; j < t.levels(); ++j) {
        const auto& site0 = spec.levels[static_cast<std::size_t>(j)].per_site[0];
        const int w_idx0 = al.index[static_cast<std::size_t>(j)][0][0];
        const int w_idx1 = al.index[static_cast<std::size_t>(j)][0][1];
        for (int w = 0; w < 2; ++w) {
            const auto& blk =
                site0.blocks[static_cast<std::size_t>(w == 0 ? w_idx0 : w_idx1)];
            for (int c0 = 0; c0 < 2; ++c0) {
                for (int c1 = 0; c1 < 2; ++c1) {
                    const MatrixXcd probe =
                        kron(MatrixXcd::Identity(blk.m_dim, blk.m_dim),
                             kron(al.reference[static_cast<std::size_t>(c0)].p,
                                  al.reference[static_cast<std::size_t>(c1)].p));
                    const double direct = (blk.phi * probe).trace().real();
                    CHECK(std::abs(t.weights[static_cast<std::size_t>(j)](w, c0 * 2 + c1) -
                                   direct) < 1e-12);
                }
            }
        }
        // Faithful sources give strictly positive weights.
        CHECK(t.weights[static_cast<std::size_t>(j)].minCoeff() > 0.0);
    }

    // Single-block specs collapse to the trivial chain.
    const GibbsTable t1 = weights_from_qms(random_localized_qms(405, 2, 2, 1, 1));
    CHECK(t1.q == 1);
    CHECK(t1.initial(0) == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& w : t1.weights) {
        CHECK(w.rows() == 1);
        CHECK(w.cols() == 1);
        CHECK(w(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}
