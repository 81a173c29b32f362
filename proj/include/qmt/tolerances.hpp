#ifndef QMT_TOLERANCES_HPP
#define QMT_TOLERANCES_HPP

#include <cstddef>

namespace qmt::tol {

// Default numerical tolerances shared across the library.
inline constexpr double hermitian  = 1e-10;  // allowed anti-hermitian residual
inline constexpr double trace_norm = 1e-10;  // allowed |trace - 1| for states
inline constexpr double positive   = 1e-10;  // allowed negative eigenvalue magnitude
inline constexpr double definite   = 1e-12;  // smallest eigenvalue accepted as "faithful"
inline constexpr double roundtrip  = 1e-10;  // reassembly / serialization round trips
inline constexpr double spectral_gap = 1e-8; // eigenvalue grouping threshold

// Largest total matrix dimension an operation may materialize.
inline constexpr std::size_t max_dimension = std::size_t{1} << 14;

} // namespace qmt::tol

#endif
