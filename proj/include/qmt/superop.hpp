#ifndef QMT_SUPEROP_HPP
#define QMT_SUPEROP_HPP

#include <functional>

#include "qmt/tensor.hpp"

namespace qmt {

// Linear map between matrix spaces, stored as its matrix with respect to
// column-major vectorization: vec(T(X)) = m * vec(X).
struct Superop {
    int dim_in = 0;
    int dim_out = 0;
    MatrixXcd m;  // (dim_out^2) x (dim_in^2)

    Superop() = default;
    Superop(int din, int dout, MatrixXcd mat);

    MatrixXcd apply(const MatrixXcd& x) const;

    // Hilbert-Schmidt adjoint: Tr(T(x)^* y) = Tr(x^* adjoint(y)).
    Superop hs_adjoint() const { return Superop(dim_out, dim_in, m.adjoint()); }

    // Composition (*this) after inner.
    Superop after(const Superop& inner) const;

    static Superop identity(int d);
    static Superop from_action(int din, int dout,
                               const std::function<MatrixXcd(const MatrixXcd&)>& f);
    // x -> a x b
    static Superop sandwich(const MatrixXcd& a, const MatrixXcd& b);
    // x -> v^* x v (compression by an isometry v, dim_in = rows(v))
    static Superop compress(const MatrixXcd& v);
    // x -> v x v^* (embedding by an isometry v, dim_in = cols(v))
    static Superop dilate(const MatrixXcd& v);
};

MatrixXcd vec_col(const MatrixXcd& x);
MatrixXcd unvec_col(const MatrixXcd& v, int dim);

// Block matrix C = sum_{ij} E_ij (x) T(E_ij) over matrix units of the input
// space; T is completely positive exactly when C >= 0.
MatrixXcd choi_matrix(const Superop& t);

struct CpReport {
    bool completely_positive = false;
    double min_choi_eigenvalue = 0.0;
    double unital_residual = 0.0;
    double hermiticity_residual = 0.0;  // of the Choi matrix
};
CpReport positivity_report(const Superop& t, double eig_tol = tol::positive);

} // namespace qmt

#endif
