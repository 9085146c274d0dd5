#pragma once

#include <cstdint>
#include <vector>

#include "rmlab/matrix.hpp"

namespace rmlab {

/// Outcome of the iterative spectral norm estimate. `residual` is the
/// relative eigen-residual ||G v - rho v|| / rho of the final Gram-operator
/// iterate; converged implies residual <= the requested tolerance.
struct SpectralResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

/// Largest singular value by power iteration on the Gram operator of the
/// smaller side, started from a seeded random unit vector. Converges when
/// the Rayleigh quotient's relative change over one step falls below tol and
/// the eigen-residual is within tol. A non-converged run restarts once from
/// a second seed and reports the larger estimate, still flagged
/// non-converged. The zero matrix returns value 0, converged, 1 iteration.
SpectralResult spectral_norm(const Matrix& m, double tol = 1e-10,
                             int max_iter = 10000,
                             std::uint64_t seed = 0x5eedULL);

/// All min(rows, cols) singular values, descending, via cyclic Jacobi on the
/// Gram matrix of the smaller side. Terminates when the off-diagonal
/// Frobenius mass falls below 1e-12 times the Gram Frobenius norm. Guarded
/// to min(rows, cols) <= 2000.
std::vector<double> singular_values_full(const Matrix& m);

/// Smallest singular value of a tall matrix (rows >= cols required).
double smallest_singular_value(const Matrix& m);

/// Norm bracket from an eps-net: lower = max over net points x of ||m x||,
/// upper = lower / (1 - eps). Every net point must be unit within 1e-9.
struct NetNormBounds {
  double lower = 0.0;
  double upper = 0.0;
};

NetNormBounds net_norm_bounds(const Matrix& m, double eps,
                              const std::vector<std::vector<double>>& net);

}  // namespace rmlab
