#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmt/disintegration.hpp"
#include "qmt/gibbs.hpp"
#include "qmt/qms.hpp"

namespace qmt {

// Building a localized quantum Markov state from classical data: a label
// chain, a dimension split per label, and factor densities attached to the
// chain.  The inverse direction extracts those ingredients from a spec.

// Block coordinates of the site algebra: per label a split (n, m) and an
// isometry embedding C^n (x) C^m as the corresponding block of C^d.
struct BlockStructure {
    int d = 0;
    std::vector<int> n_dims;
    std::vector<int> m_dims;
    std::vector<MatrixXcd> v;  // per label: d x (n*m), orthogonal ranges

    int q() const { return static_cast<int>(v.size()); }
    MatrixXcd projection(int label) const;  // v_w v_w^*
    void validate(double tol = 1e-9) const;

    // Coordinate blocks: label w occupies a contiguous index range.
    static BlockStructure standard(const std::vector<int>& n_dims,
                                   const std::vector<int>& m_dims);
    // Conjugate every block by one global unitary.
    BlockStructure rotated(const MatrixXcd& u) const;
};

// Classical side: strictly positive initial weights and per-level transition
// weights over labels, together with the dimension split each label selects.
struct ClassicalData {
    int k = 0;
    int q = 0;
    std::vector<int> n_dims;
    std::vector<int> m_dims;
    Eigen::VectorXd pi0;
    std::vector<Eigen::MatrixXd> pi;  // per level: q x q^k, rows sum to one

    int levels() const { return static_cast<int>(pi.size()); }
    int d() const;
    void validate(double tol = 1e-10) const;
};

// Quantum side: one root density per label on the H_0 factor, and per level
// and label pair (parent w, child tuple c) a density coupling the parent's
// H_1 factor to the children's H_0 factors.
struct FactorStates {
    std::vector<MatrixXcd> eta0;              // per label: density on n_w
    std::vector<std::vector<MatrixXcd>> eta;  // [level][w*q^k + c]

    void validate(const ClassicalData& data, double tol = 1e-9) const;
};

// Product measure of the label chain on Lambda_n, indexed by configuration
// rank.  Validates the data first.
std::vector<double> markov_measure(const ClassicalData& data, int n);

// Averaged boundary factor of level j, label w: the H_1 density left after
// summing the level's factors against the transition weights and tracing out
// the children's H_0 legs.
MatrixXcd eta_hat_density(const ClassicalData& data, const FactorStates& fs, int j,
                          int label);

// Block states of level j assembled from the chain factors: per parent label
// the density on H_1 (x) successors whose compression onto child tuple c is
// pi^j(w,c) times the product of eta^j_{w,c} with the children's averaged
// boundary factors.  Needs the data one level past j.
std::vector<MatrixXcd> derive_transition_states(const ClassicalData& data,
                                                const FactorStates& fs,
                                                const BlockStructure& bs, int j);

// Full spec from classical data: homogeneous per-site transition
// expectations for levels 0..levels()-2 and the root density closing the
// chain at the top.
QmsSpec spec_from_classical(const ClassicalData& data, const FactorStates& fs,
                            const BlockStructure& bs);

// Depth-n density of the mixture of chain products, without going through
// transition expectations.
FiniteVolumeState assemble_state(const ClassicalData& data, const FactorStates& fs,
                                 const BlockStructure& bs, int n,
                                 std::size_t dim_cap = tol::max_dimension);

// Inverse direction: read the classical data, factor states, and block
// structure back off a spec.  Requires one shared block family and identical
// per-site data across each level; throws otherwise.
struct ExtractedClassical {
    ClassicalData data;
    FactorStates factors;
    BlockStructure structure;
};
ExtractedClassical extract_classical(const QmsSpec& spec, double match_tol = 1e-8);

// End-to-end verification: validate the data, build the spec, check the
// Markov property below depth n, compare the assembled mixture with the
// pushed density, and check the defining identity of the derived block
// states slice by slice.
struct ReconstructionReport {
    bool precheck_ok = true;
    std::string precheck_message;
    double max_markov_residual = 0.0;
    double density_residual = 0.0;
    double transition_identity_residual = 0.0;
};
ReconstructionReport verify_reconstruction(const ClassicalData& data, const FactorStates& fs,
                                           const BlockStructure& bs, int n,
                                           std::size_t dim_cap = tol::max_dimension);

} // namespace qmt
