#pragma once

#include <cstdint>
#include <vector>

#include "qmt/hamiltonian.hpp"
#include "qmt/qms.hpp"
#include "qmt/reconstruction.hpp"
#include "qmt/transition.hpp"

namespace qmt {

// Ready-made inputs for the rest of the library: a competing-interaction
// Ising chain built from diagonal Hamiltonians, and seeded random specs.

// Dimension split of one block label.
struct LabelSplit {
    int n_dim = 1;
    int m_dim = 1;
};

// Preset splits for the supported (d, q) pairs, with a generic fallback.
std::vector<LabelSplit> default_splits(int d, int q);

// Competing-interaction Ising chain on the tree (d = 2): per-vertex bond
// terms
//   -beta (J sum_y z_x z_y + Jp sum_{u<v among S(x)} z_u z_v)
// over spins z = +-1, boundary fields from the downward normalization
// recursion with zero terminal field, and a constant root term absorbing
// the overall normalization.
struct IsingParams {
    double beta = 1.0;
    double j = 1.0;
    double jp = 0.0;
    int k = 2;

    void validate() const;
};

struct IsingModel {
    QmsSpec spec;
    InteractionDecomposition ham;
};

// Interaction terms for bond levels 0..n and boundary levels 0..n+1, plus
// the spec they induce (levels 0..n).
IsingModel ising_competing_model(const IsingParams& params, int n);

// Seeded random spec with localized transition expectations: one rotated
// block structure shared by all sites, strictly positive chain weights,
// faithful chain factors, and a root density fixed under the dual of the
// level-0 boundary restriction.  Same seed, same spec.  Passing no splits
// picks default_splits(d, q).
QmsSpec random_localized_qms(std::uint64_t seed, int k, int d, int q, int n,
                             std::vector<LabelSplit> splits = {});

// Seeded random single-site transition expectation in pinched form, for
// round trips through the canonical decomposition.
SiteTransitionExpectation random_transition_expectation(std::uint64_t seed, int k, int d,
                                                        int q,
                                                        std::vector<LabelSplit> splits = {});

} // namespace qmt
