#ifndef QMT_HERMITIAN_HPP
#define QMT_HERMITIAN_HPP

#include "qmt/tensor.hpp"

namespace qmt {

// Spectral calculus for hermitian matrices.  Inputs are validated to be
// hermitian within the given tolerance; herm_log additionally requires the
// spectrum to stay above the faithfulness floor.
MatrixXcd herm_exp(const MatrixXcd& a, double herm_tol = tol::hermitian);
MatrixXcd herm_log(const MatrixXcd& a, double herm_tol = tol::hermitian,
                   double floor = tol::definite);

// Largest singular value, computed through the spectrum of a^* a.
double operator_norm(const MatrixXcd& a);

double min_eigenvalue(const MatrixXcd& hermitian_a);

} // namespace qmt

#endif
