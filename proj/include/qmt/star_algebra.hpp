#ifndef QMT_STAR_ALGEBRA_HPP
#define QMT_STAR_ALGEBRA_HPP

#include "qmt/superop.hpp"
#include "qmt/tensor.hpp"

namespace qmt {

// Orthonormal basis (Hilbert-Schmidt inner product) of a unital *-subalgebra
// of M_D.  Construction closes the generators under adjoints and products
// until the linear span stabilizes.
struct SubalgebraBasis {
    int ambient_dim = 0;
    std::vector<MatrixXcd> onb;

    std::size_t dim() const { return onb.size(); }
    static SubalgebraBasis from_generators(int ambient_dim, const std::vector<MatrixXcd>& gens,
                                           double tol = 1e-9);
    // Least-squares projection of x onto the span; returns the residual norm.
    double span_residual(const MatrixXcd& x) const;
};

// One central block of a subalgebra S of M_D: P is the minimal central
// projection, V an isometry from C^n (x) C^m onto range(P) carrying
// P S P onto M_n (x) 1_m and P S' P onto 1_n (x) M_m.
struct FactorBlock {
    MatrixXcd p;
    int n_dim = 0;
    int m_dim = 0;
    MatrixXcd v;  // D x (n*m)
};

struct CentralDecomposition {
    int ambient_dim = 0;
    std::vector<FactorBlock> blocks;
    int block_of_rank(int label) const { return label; }
};

// Decompose M_D along the center of S.  The random source drives the generic
// elements used to split spectra; results are deterministic given the seed.
CentralDecomposition central_decompose(const SubalgebraBasis& s, std::mt19937_64& rng);

// Orthonormal basis of the center of S (hermitian-closed span).
std::vector<MatrixXcd> center_basis(const SubalgebraBasis& s, double tol = 1e-9);

// Conditional expectation of B(C^D (x) C^ext) onto the block algebra of the
// decomposition (tensored against the identity on the extension):
//   E(P_i (a (x) abar) P_i) = state_i(abar) * P_i (a (x) 1) P_i
// extended by x -> sum_i E(P_i x P_i).  Each state is given by its density on
// H_{i,1} (x) C^ext (dimension m_i * ext).
Superop umegaki_from_block_states(const CentralDecomposition& d,
                                  const std::vector<MatrixXcd>& block_state_densities,
                                  int ext_dim = 1);

} // namespace qmt

#endif
