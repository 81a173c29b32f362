#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmt/qms.hpp"
#include "qmt/tree.hpp"

namespace qmt {

// Classical layer induced by a localized quantum Markov state: block labels
// play the role of spin values and the block states supply the transition
// weights of a tree-indexed Markov measure.

// An assignment of labels to a finite set of sites.  The domain is kept in
// canonical site order so configurations can be ranked and enumerated.
struct Configuration {
    std::vector<SiteCoord> domain;
    std::vector<int> labels;

    // Label at a site; throws if the site is not in the domain.
    int label_at(const SiteCoord& site) const;
};

// Label-process data for a homogeneous-per-level chain on the tree.
// weights[j] has one row per parent label and one column per tuple of child
// labels (first child slowest); rows sum to one for a probability chain.
struct GibbsTable {
    int q = 0;   // number of labels
    int k = 0;   // branching of the tree
    Eigen::VectorXd initial;              // label distribution at the root
    std::vector<Eigen::MatrixXd> weights; // one q x q^k matrix per level

    int levels() const { return static_cast<int>(weights.size()); }
    void validate() const;
};

// Rank of a configuration on the first n+1 levels: site-order digits with the
// first site slowest, so the rank of a truncation is a prefix of the rank of
// any extension.
std::size_t rank_of(const Configuration& c, int q);
Configuration configuration_from_rank(int k, int q, int n, std::size_t rank);
std::size_t configuration_count(int k, int q, int n);

// Correspondence between one reference block family (taken from the root
// site's map) and the blocks of every per-site map in the spec.  Entry
// index[j][s][w] is the position, among the blocks of site s at level j, of
// the block whose central projection matches reference label w.
struct BlockAlignment {
    int q = 0;
    std::vector<TransitionBlock> reference;
    std::vector<std::vector<std::vector<int>>> index;
};

// Match every per-site block family against the root site's projections.
// Throws when some site's blocks are not a relabeling of the reference.
BlockAlignment align_blocks(const QmsSpec& spec, double match_tol = 1e-8);

// Extract the label chain of a quantum Markov spec: initial weights are the
// central-projection masses of rho0 and the level weights are the block-state
// masses of the child projections.  Requires the per-site maps of each level
// to share one family of block states and to give identical weights across
// the sites of a level; throws otherwise.
GibbsTable weights_from_qms(const QmsSpec& spec);

// Probability vector over all configurations on Lambda_n, indexed by rank.
// Throws when q^|Lambda_n| exceeds the exhaustive cap.
std::vector<double> measure(const GibbsTable& table, int n);

// log of the measure as the additive energy function; requires every factor
// touched by some configuration to be positive.
std::vector<double> classical_hamiltonian(const GibbsTable& table, int n);

// Worst-case defect between the depth-n measure and the marginal of the
// depth-(n+1) measure, plus the normalization defect |sum - 1| of the larger
// volume.  Exhaustive when both volumes fit under the cap; otherwise the
// marginal is estimated on sampled configurations.
struct CompatibilityReport {
    double marginal_defect = 0.0;
    double normalization_defect = 0.0;
    bool exhaustive = true;
};
CompatibilityReport compatibility_check(const GibbsTable& table, int n,
                                        std::uint64_t sample_seed = 0,
                                        int sample_count = 100000);

// Write the depth-n measure as CSV rows (configuration, probability, energy).
// The configuration column concatenates the label digits in site order.  The
// energy column is left blank for configurations of zero probability.
void write_measure_csv(const GibbsTable& table, int n, const std::string& path);

} // namespace qmt
