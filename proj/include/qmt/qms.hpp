#ifndef QMT_QMS_HPP
#define QMT_QMS_HPP

#include "qmt/transition.hpp"

namespace qmt {

// A finite-volume quantum Markov state candidate: a root state together
// with one localized level map per generation.  Whether the data actually
// satisfies the Markov property is what markov_check measures.
struct QmsSpec {
    int k = 0;
    int d = 0;
    DensityState rho0;                               // on the root algebra
    std::vector<LevelTransitionExpectation> levels;  // generations 0..n_max

    int n_max() const { return static_cast<int>(levels.size()) - 1; }
    void validate(std::size_t dim_cap = tol::max_dimension) const;
};

struct FiniteVolumeState {
    int n = 0;
    DensityState rho;
};

// Nested evaluation: the deepest generation of the support is consumed
// first, then each level map in turn, and finally the root state.
complexd evaluate_nested(const QmsSpec& spec, const LabeledOperator& a,
                         std::size_t dim_cap = tol::max_dimension);

// Density of the volume-n functional: the adjoints of the level maps pushed
// onto the root state, so that Tr(rho a) = evaluate_nested(spec, a) for
// every a supported within radius n.
FiniteVolumeState density_matrix(const QmsSpec& spec, int n,
                                 std::size_t dim_cap = tol::max_dimension);

// Volume-m marginal of the identity-at-the-boundary state: the pushed
// density at depth m with the sitewise compression c -> E(c (x) 1) dualized
// on its top generation (the trace over generation m+1 taken without ever
// materializing it).
LabeledOperator boundary_marginal(const QmsSpec& spec, int m,
                                  std::size_t dim_cap = tol::max_dimension);

// Markov defect at generation j: the largest matrix entry of
// E_j^*(M_j) - M_{j+1} over the radius-(j+1) ball, where M_m is the
// boundary marginal.  Equals the sweep of |phi(E_j(a)) - phi(a)| over the
// matrix-unit basis of the ball algebra.
double markov_check(const QmsSpec& spec, int j, std::size_t dim_cap = tol::max_dimension);

struct FaithfulnessReport {
    bool faithful = false;
    double min_eigenvalue = 0.0;
};

// A state is locally faithful when its density is positive definite.
FaithfulnessReport local_faithfulness(const FiniteVolumeState& state);

} // namespace qmt

#endif
