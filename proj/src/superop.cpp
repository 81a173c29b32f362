#include "qmt/superop.hpp"

#include <Eigen/Eigenvalues>

namespace qmt {

Superop::Superop(int din, int dout, MatrixXcd mat) : dim_in(din), dim_out(dout), m(std::move(mat)) {
    if (m.rows() != Eigen::Index(dout) * dout || m.cols() != Eigen::Index(din) * din)
        throw std::invalid_argument("superoperator matrix has wrong shape");
}

MatrixXcd vec_col(const MatrixXcd& x) {
    return Eigen::Map<const MatrixXcd>(x.data(), x.size(), 1);
}

MatrixXcd unvec_col(const MatrixXcd& v, int dim) {
    if (v.size() != Eigen::Index(dim) * dim)
        throw std::invalid_argument("vector does not match the matrix dimension");
    return Eigen::Map<const MatrixXcd>(v.data(), dim, dim);
}

MatrixXcd Superop::apply(const MatrixXcd& x) const {
    if (x.rows() != dim_in || x.cols() != dim_in)
        throw std::invalid_argument("superoperator applied to a matrix of wrong size");
    return unvec_col(m * vec_col(x), dim_out);
}

Superop Superop::after(const Superop& inner) const {
    if (inner.dim_out != dim_in) throw std::invalid_argument("composition dimension mismatch");
    return Superop(inner.dim_in, dim_out, m * inner.m);
}

Superop Superop::identity(int d) {
    return Superop(d, d, MatrixXcd::Identity(Eigen::Index(d) * d, Eigen::Index(d) * d));
}

Superop Superop::from_action(int din, int dout,
                             const std::function<MatrixXcd(const MatrixXcd&)>& f) {
    MatrixXcd m(Eigen::Index(dout) * dout, Eigen::Index(din) * din);
    for (int j = 0; j < din; ++j)
        for (int i = 0; i < din; ++i) {
            MatrixXcd y = f(matrix_unit(din, i, j));
            if (y.rows() != dout || y.cols() != dout)
                throw std::invalid_argument("action returned a matrix of wrong size");
            m.col(i + Eigen::Index(din) * j) = vec_col(y);
        }
    return Superop(din, dout, m);
}

// vec(a x b) = (b^T (x) a) vec(x) for column-major vec
Superop Superop::sandwich(const MatrixXcd& a, const MatrixXcd& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("sandwich dimension mismatch");
    if (a.rows() != b.cols()) throw std::invalid_argument("sandwich output is not square");
    return Superop(static_cast<int>(a.cols()), static_cast<int>(a.rows()),
                   kron(b.transpose(), a));
}

Superop Superop::compress(const MatrixXcd& v) { return sandwich(v.adjoint(), v); }
Superop Superop::dilate(const MatrixXcd& v) { return sandwich(v, v.adjoint()); }

MatrixXcd choi_matrix(const Superop& t) {
    const int din = t.dim_in, dout = t.dim_out;
    MatrixXcd c = MatrixXcd::Zero(Eigen::Index(din) * dout, Eigen::Index(din) * dout);
    for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j) {
            MatrixXcd tij = t.apply(matrix_unit(din, i, j));
            c.block(Eigen::Index(i) * dout, Eigen::Index(j) * dout, dout, dout) = tij;
        }
    return c;
}

CpReport positivity_report(const Superop& t, double eig_tol) {
    CpReport rep;
    MatrixXcd c = choi_matrix(t);
    rep.hermiticity_residual = max_abs(c - c.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
    rep.min_choi_eigenvalue = es.eigenvalues().minCoeff();
    MatrixXcd one_out = t.apply(MatrixXcd::Identity(t.dim_in, t.dim_in));
    rep.unital_residual = max_abs(one_out - MatrixXcd::Identity(t.dim_out, t.dim_out));
    rep.completely_positive =
        rep.min_choi_eigenvalue >= -eig_tol && rep.hermiticity_residual <= tol::hermitian;
    return rep;
}

} // namespace qmt
