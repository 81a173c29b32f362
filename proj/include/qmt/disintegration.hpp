#pragma once

#include <vector>

#include "qmt/gibbs.hpp"
#include "qmt/qms.hpp"
#include "qmt/superop.hpp"
#include "qmt/tensor.hpp"

namespace qmt {

// Splitting of a localized quantum Markov state into a classical mixture of
// product states: every label configuration selects one factor block per
// site, and the state restricted to those blocks is a chain product of the
// extracted factor densities.

// Compress an observable onto the blocks selected by a configuration: each
// support site x is conjugated by the isometry of block sigma(x), so the leg
// dimension drops from d to n*m of that block.  The support must lie inside
// the configuration domain.
LabeledOperator compression(const QmsSpec& spec, const BlockAlignment& al,
                            const Configuration& sigma, const LabeledOperator& a,
                            std::size_t dim_cap = tol::max_dimension);

// Product density on the compressed volume from chain factors: one root
// factor on H_0, one factor per interior site coupling its H_1 leg to the
// children's H_0 legs, and one boundary factor per deepest site on H_1.
// Factor vectors follow canonical site order; the result's legs are grouped
// per site as [(x,0),(x,1)], sites in canonical order.
MatrixXcd chain_product_density(int k, int n, const std::vector<int>& n_dims,
                                const std::vector<int>& m_dims, const MatrixXcd& eta0,
                                const std::vector<MatrixXcd>& eta,
                                const std::vector<MatrixXcd>& eta_hat,
                                std::size_t dim_cap = tol::max_dimension);

// One component of the disintegration: the chain factors extracted from the
// block states along a configuration, the assembled product density, the
// selecting isometries, and the classical weight of the configuration.
struct ComponentState {
    Configuration sigma;
    int n = 0;
    std::vector<int> n_dims;             // per site, canonical order
    std::vector<int> m_dims;
    std::vector<MatrixXcd> isometries;   // per site: d x (n*m) block isometry
    MatrixXcd eta0;                      // root factor on H_0
    std::vector<MatrixXcd> eta;          // per site of levels 0..n-1
    std::vector<MatrixXcd> eta_hat;      // per site of level n
    MatrixXcd block;                     // chain product density
    double weight = 0.0;                 // classical weight of sigma
};

// Extract the component for a configuration on Lambda_n (n at most the
// deepest level of the spec).  Throws when the configuration has vanishing
// weight, since the factors are then undefined.
ComponentState component_state(const QmsSpec& spec, const Configuration& sigma,
                               std::size_t dim_cap = tol::max_dimension);
ComponentState component_state(const QmsSpec& spec, const BlockAlignment& al,
                               const Configuration& sigma, std::size_t dim_cap = tol::max_dimension);

// Value of the component functional on an observable: compress onto the
// blocks of the configuration and integrate against the chain product.
complexd component_value(const ComponentState& cs, const LabeledOperator& a,
                         std::size_t dim_cap = tol::max_dimension);

// Transition maps of one level compressed onto the blocks of a configuration:
// per site, pair the legs past the leading H_0 leg against the site's chain
// factor and the successor marginals of its children, and complete the scaled
// H_0 output by the identity on H_1.  Each map is unital and leaves the
// component functional invariant.
struct ComponentTransition {
    int level = 0;
    std::vector<Superop> maps;   // per site of W_level
    std::vector<int> out_dims;   // per site: n*m at x
};
ComponentTransition component_transition(const QmsSpec& spec, const BlockAlignment& al,
                                         const Configuration& sigma, int level);

// Invariance defect of the component functional under the compressed level-j
// maps, swept over a matrix-unit basis on one site and its successors.
double component_markov_residual(const QmsSpec& spec, const Configuration& sigma, int j,
                                 std::size_t dim_cap = tol::max_dimension);

// Rebuild the depth-n density as the weight-averaged mixture of component
// products and compare with the pushed density.
struct DisintegrationReport {
    double density_residual = 0.0;    // mixture vs pushed density, entrywise
    double weight_mass_defect = 0.0;  // |total classical weight - 1|
};
DisintegrationReport disintegration_check(const QmsSpec& spec, int n,
                                          std::size_t dim_cap = tol::max_dimension);

} // namespace qmt
