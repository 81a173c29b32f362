#pragma once

#include <vector>

#include "qmt/qms.hpp"
#include "qmt/reconstruction.hpp"
#include "qmt/tensor.hpp"

namespace qmt {

// Statistical-mechanics side of the theory: potentials of finite-volume
// densities, their splitting into commuting interaction terms pinched along
// the block structure, and the converse construction of transition
// expectations from commuting Hamiltonians.

// h = -log(rho): hermitian with Tr(e^{-h}) = 1.  Throws when the state is
// not faithful.
LabeledOperator potential_from_state(const FiniteVolumeState& state);

// Potentials of all volumes up to a depth.
struct PotentialFamily {
    std::vector<LabeledOperator> h;  // index = volume depth
};
PotentialFamily potential_family(const QmsSpec& spec, int max_depth,
                                 std::size_t dim_cap = tol::max_dimension);

// Interaction terms of a volume: one root term, per-vertex bond terms
// coupling a site to its successors, and per-vertex boundary fields.  Bond
// terms carry their legs in the order [x, children of x]; root and boundary
// terms live on a single site.
struct InteractionDecomposition {
    int k = 0;
    int d = 0;
    MatrixXcd h_root;                            // on the root site
    std::vector<std::vector<MatrixXcd>> h_bond;  // [level][site in W_level]
    std::vector<std::vector<MatrixXcd>> h_hat;   // [level][site in W_level]

    int bond_levels() const { return static_cast<int>(h_bond.size()); }
    int hat_levels() const { return static_cast<int>(h_hat.size()); }
    void validate() const;  // shapes, hermiticity, level population
};

// Split the potentials of a locally faithful spec into interaction terms:
// block logarithms of the chain factors, pinched back into the site
// algebras.  Builds bond terms for levels below n and boundary fields for
// levels up to n, then verifies that root + bonds + boundary reassembles the
// depth-n potential within verify_tol.
InteractionDecomposition decompose(const QmsSpec& spec, int n,
                                   double verify_tol = 1e-9,
                                   std::size_t dim_cap = tol::max_dimension);

// Sum of root, bond, and boundary terms embedded on Lambda_n.
LabeledOperator assemble_potential(const InteractionDecomposition& dec, int n,
                                   std::size_t dim_cap = tol::max_dimension);

// Largest operator norms of the four commutator families: root against its
// bond, bonds against the boundary fields below them, root against its own
// boundary field, and bonds of consecutive levels.  Each commutator is
// evaluated after embedding both terms on their common support; when an
// assembled level operator would exceed the dimension cap, the family falls
// back to the worst per-vertex pair.
struct CommutatorResiduals {
    double root_bond = 0.0;
    double bond_boundary = 0.0;
    double root_boundary = 0.0;
    double bond_bond = 0.0;

    double max() const;
};
CommutatorResiduals commutation_residuals(const InteractionDecomposition& dec,
                                          std::size_t dim_cap = tol::max_dimension);

// Transition expectation of one level from commuting interaction terms:
// per site, a -> (Tr_{S(x)} (x) 1)(A* a A) with
// A = e^{-H_{x,S(x)}/2} e^{-sum_y Hhat_y/2} e^{+Hhat_x/2}.
// Requires the bond to commute with the boundary fields below it within
// commute_tol (hard error otherwise), verifies unitality and complete
// positivity, and attaches canonical block data.
LevelTransitionExpectation transition_from_hamiltonian(const InteractionDecomposition& dec,
                                                       int level,
                                                       double commute_tol = 1e-8);

// Spec with all levels that the decomposition supports and the root density
// e^{-(root + boundary field at the root)}.
QmsSpec qms_from_hamiltonian(const InteractionDecomposition& dec,
                             double commute_tol = 1e-8);

} // namespace qmt
