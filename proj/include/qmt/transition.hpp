#ifndef QMT_TRANSITION_HPP
#define QMT_TRANSITION_HPP

#include "qmt/star_algebra.hpp"
#include "qmt/superop.hpp"
#include "qmt/tensor.hpp"

namespace qmt {

// One block of the canonical form at a site: a minimal central projection P
// of the range inside M_d, an isometry V onto range(P) splitting it into
// H_0 (x) H_1, and the block state on B(H_1) (x) B_{S(x)} as a density.
struct TransitionBlock {
    int label = 0;
    MatrixXcd p;
    int n_dim = 0;  // dim H_0
    int m_dim = 0;  // dim H_1
    MatrixXcd v;    // d x (n_dim * m_dim)
    MatrixXcd phi;  // density on H_1 (x) successor space, (m_dim * d^k) square
};

// Unital completely positive map B_x (x) B_{S(x)} -> B_x of pinched product
// form: E(a) = sum_w P_w Phi_w(P_w a P_w) P_w where
// Phi_w(a0 (x) a1 (x) b) = phi_w(a1 (x) b) * (a0 (x) 1).
struct SiteTransitionExpectation {
    SiteCoord site;
    int level = 0;
    int d = 0;
    int k = 0;
    Superop map;  // d^{k+1} -> d
    std::vector<TransitionBlock> blocks;

    int successor_dim() const;
    CentralDecomposition block_structure() const;

    // Compression onto the range along the successors: c -> E(c (x) 1).
    Superop boundary_map() const;

    // Apply to an operator; missing legs among the site and its successors
    // are treated as identity factors.  The successor legs disappear.
    LabeledOperator apply(const LabeledOperator& a,
                          std::size_t dim_cap = tol::max_dimension) const;
};

// Assemble the superoperator of the pinched product form from block data.
Superop pinched_superop(int d, int k, const std::vector<TransitionBlock>& blocks);

// Recover the canonical form of a raw superoperator.  Throws when the map is
// not unital, not completely positive, not idempotent over its range, or
// when the pinched form fails to reproduce it within fit_tol.
SiteTransitionExpectation canonical_form(const Superop& e, const SiteCoord& site, int level,
                                         int d, int k, std::mt19937_64& rng,
                                         double fit_tol = 1e-10);

// All sites of one generation acting together as a tensor product map from
// the two-generation algebra onto the upper generation.
struct LevelTransitionExpectation {
    int level = 0;
    std::vector<SiteTransitionExpectation> per_site;  // generation site order

    int site_dim() const;
    int branching() const;

    // Strict level action: support must lie within the two generations.
    LabeledOperator apply(const LabeledOperator& a,
                          std::size_t dim_cap = tol::max_dimension) const;

    // Dual (state-side) action: every generation site of the support expands
    // into the site together with its successors.
    LabeledOperator apply_dual(const LabeledOperator& rho,
                               std::size_t dim_cap = tol::max_dimension) const;

    // Dual of the sitewise boundary compression c -> E(c (x) 1).
    LabeledOperator apply_boundary_dual(const LabeledOperator& rho,
                                        std::size_t dim_cap = tol::max_dimension) const;
};

// Level map extended by the identity on everything above it: acts on
// operators supported in the ball of radius level+1, leaving lower
// generations untouched (bimodule property over them).
struct QuasiConditionalExpectation {
    LevelTransitionExpectation level_map;
    std::size_t dim_cap = tol::max_dimension;

    LabeledOperator operator()(const LabeledOperator& a) const;
};
QuasiConditionalExpectation quasi_conditional_expectation(LevelTransitionExpectation e,
                                                          std::size_t dim_cap = tol::max_dimension);

// One extended-level application without constructing the callable object.
LabeledOperator qce_apply(const LevelTransitionExpectation& e, const LabeledOperator& a,
                          std::size_t dim_cap = tol::max_dimension);

// Materialized square superoperator of the extended level map on the ball of
// radius level+1 (small volumes only; guarded).
Superop qce_square_superop(const LevelTransitionExpectation& e,
                           std::size_t dim_cap = tol::max_dimension);

// Block structure of the range of the level map over the generation algebra:
// one block per label tuple (first site slowest), projections and isometries
// are tensor products of the per-site data with legs regrouped as
// (all H_0 factors) (x) (all H_1 factors).
CentralDecomposition range_decomposition(const LevelTransitionExpectation& e,
                                         std::size_t dim_cap = tol::max_dimension);

// Density of the product block state for one label tuple, with legs grouped
// as [H_1 factors in site order, successor factors in site order].
MatrixXcd level_block_state_density(const LevelTransitionExpectation& e,
                                    const std::vector<int>& labels,
                                    std::size_t dim_cap = tol::max_dimension);

// Spectral projection onto the fixed space of a square superoperator; equals
// the limit of the averages (1/m) sum_{h<m} t^h when they converge.  Throws
// when the fixed space is defective (the averages diverge).
Superop cesaro_limit(const Superop& t, double rank_tol = 1e-10);

} // namespace qmt

#endif
