#ifndef QMT_TENSOR_HPP
#define QMT_TENSOR_HPP

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "qmt/tolerances.hpp"
#include "qmt/tree.hpp"

namespace qmt {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using complexd = std::complex<double>;

// Thrown when an operation would materialize a matrix larger than the guard.
struct dimension_guard_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check_dimension_guard(std::size_t dim, std::size_t cap = tol::max_dimension);

// ---------------------------------------------------------------------------
// raw tensor-leg utilities
//
// A matrix on a tensor product carries one leg per factor; the leftmost
// factor varies slowest in the row/column index (standard Kronecker order).
// ---------------------------------------------------------------------------

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b);
MatrixXcd kron_list(const std::vector<MatrixXcd>& factors);

// Reorder tensor legs: the output's i-th leg is the input leg order[i].
MatrixXcd permute_legs(const MatrixXcd& a, const std::vector<int>& dims,
                       const std::vector<int>& order);

// Trace out the legs listed in `traced`; remaining legs keep their relative
// order.  The trace is not normalized.
MatrixXcd trace_out_legs(const MatrixXcd& a, const std::vector<int>& dims,
                         const std::vector<int>& traced);

// Permutation matrix on a tensor-product vector space: column e_r maps to
// e_{r'} where the output's i-th leg carries the input leg order[i].
// Conjugation by it realizes permute_legs.
MatrixXcd leg_permutation_matrix(const std::vector<int>& in_dims,
                                 const std::vector<int>& order);

// View the leading `lead` legs as one block system: returns M with
// M[(i,i'), (r,r')] = a[i*dr + r, i'*dr + r'] where i runs over the block
// index, r over the rest, and (i,i') / (r,r') are column-major pair indices.
// `unfold_leading_block` inverts it.
MatrixXcd fold_leading_block(const MatrixXcd& a, int dlead, int drest);
MatrixXcd unfold_leading_block(const MatrixXcd& m, int dlead, int drest);

// ---------------------------------------------------------------------------
// operators labeled by tree sites
// ---------------------------------------------------------------------------

// Operator on a tensor product of site spaces.  The support is kept sorted
// (level ascending, lexicographic within a level) and the matrix legs follow
// that order, leftmost slowest.  Site dimensions may differ per site (block
// coordinates use the compressed per-site dimensions).
struct LabeledOperator {
    std::vector<SiteCoord> support;
    std::vector<int> site_dims;
    MatrixXcd mat;

    LabeledOperator() = default;
    LabeledOperator(std::vector<SiteCoord> sites, std::vector<int> dims, MatrixXcd m);

    std::size_t total_dim() const { return static_cast<std::size_t>(mat.rows()); }
    int site_index(const SiteCoord& x) const;  // -1 when absent
    complexd trace() const { return mat.trace(); }
};

// Operator made from per-site factors (identity where a factor is omitted).
LabeledOperator product_operator(const std::vector<SiteCoord>& sites,
                                 const std::vector<int>& dims,
                                 const std::vector<MatrixXcd>& factors);

// Extend by identity factors onto a larger support.  Every site of `a` must
// appear in `target` with the same dimension.
LabeledOperator embed(const LabeledOperator& a, const std::vector<SiteCoord>& target,
                      const std::vector<int>& target_dims,
                      std::size_t dim_cap = tol::max_dimension);
// Convenience: all target sites share one dimension.
LabeledOperator embed(const LabeledOperator& a, const std::vector<SiteCoord>& target,
                      int uniform_dim, std::size_t dim_cap = tol::max_dimension);

// Unnormalized partial trace onto `keep` (a subset of the support).
LabeledOperator partial_trace(const LabeledOperator& a, const std::vector<SiteCoord>& keep);

// Apply a linear map T (given by its action on column-major vectorizations,
// see superop.hpp) to the legs `site_sel` of `a`, replacing them by a single
// leg at site `out_site` of dimension `out_dim`.  The selected legs are fed
// to T in the order given by `site_sel`.
struct Superop;
LabeledOperator apply_map_to_sites(const LabeledOperator& a,
                                   const std::vector<SiteCoord>& site_sel,
                                   const Superop& t, const SiteCoord& out_site, int out_dim,
                                   std::size_t dim_cap = tol::max_dimension);

// Same, but T's output system is split across several legs (in the order of
// `out_sites`, leftmost slowest).  Output sites must be disjoint from the
// untouched part of the support.
LabeledOperator apply_map_to_sites(const LabeledOperator& a,
                                   const std::vector<SiteCoord>& site_sel,
                                   const Superop& t, const std::vector<SiteCoord>& out_sites,
                                   const std::vector<int>& out_site_dims,
                                   std::size_t dim_cap = tol::max_dimension);

// Density matrix with bookkeeping: hermitian, unit trace, positive within
// tolerance (validated on construction).
struct DensityState {
    LabeledOperator op;
    explicit DensityState(LabeledOperator o);
    const MatrixXcd& matrix() const { return op.mat; }
};

// ---------------------------------------------------------------------------
// small constructors
// ---------------------------------------------------------------------------

MatrixXcd matrix_unit(int dim, int row, int col);
std::vector<MatrixXcd> hermitian_basis(int dim);  // orthogonal hermitian spanning set

MatrixXcd random_matrix(std::mt19937_64& rng, int rows, int cols);  // complex Gaussian
MatrixXcd random_hermitian(std::mt19937_64& rng, int dim);
MatrixXcd random_density(std::mt19937_64& rng, int dim);   // faithful (Wishart-style)
MatrixXcd random_unitary(std::mt19937_64& rng, int dim);   // QR of a Gaussian

double max_abs(const MatrixXcd& a);

} // namespace qmt

#endif
