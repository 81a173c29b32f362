#include "qmt/hermitian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qmt {

namespace {
Eigen::SelfAdjointEigenSolver<MatrixXcd> checked_eigen(const MatrixXcd& a, double herm_tol) {
    if (a.rows() != a.cols()) throw std::invalid_argument("matrix is not square");
    if (max_abs(a - a.adjoint()) > herm_tol)
        throw std::invalid_argument("matrix is not hermitian within tolerance");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (a + a.adjoint()));
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    return es;
}
} // namespace

MatrixXcd herm_exp(const MatrixXcd& a, double herm_tol) {
    auto es = checked_eigen(a, herm_tol);
    VectorXd lam = es.eigenvalues();
    VectorXd elam(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) elam[i] = std::exp(lam[i]);
    return es.eigenvectors() * elam.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXcd herm_log(const MatrixXcd& a, double herm_tol, double floor) {
    auto es = checked_eigen(a, herm_tol);
    VectorXd lam = es.eigenvalues();
    if (lam.minCoeff() < floor)
        throw std::invalid_argument("logarithm of a matrix with spectrum below the floor");
    VectorXd llam(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) llam[i] = std::log(lam[i]);
    return es.eigenvectors() * llam.asDiagonal() * es.eigenvectors().adjoint();
}

double operator_norm(const MatrixXcd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
    double top = es.eigenvalues().maxCoeff();
    return std::sqrt(std::max(0.0, top));
}

double min_eigenvalue(const MatrixXcd& hermitian_a) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (hermitian_a + hermitian_a.adjoint()),
                                                Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

} // namespace qmt
