#pragma once

#include <cstdint>
#include <vector>

#include "rmlab/matrix.hpp"

namespace rmlab {

/// Finite eps-covering of the unit sphere S^{n-1}. Points are unit vectors
/// within 1e-12 and the cardinality respects (1 + 2/eps)^n.
struct SphereNet {
  std::size_t dimension = 0;
  double eps = 0.0;
  std::vector<std::vector<double>> points;
};

/// Greedy farthest-point net on S^{n-1}: packs a seeded point cloud at a
/// radius slightly inside eps, then certifies coverage by Monte Carlo (1000
/// seeded test vectors within eps + 1e-9), densifying the cloud and
/// retrying on failure. Guarded to n <= 14.
SphereNet build_sphere_net(std::size_t n, double eps,
                           std::uint64_t seed = 0x0e75ULL);

/// Max over `trials` seeded random unit vectors of the distance to the
/// nearest net point: the Monte Carlo coverage certificate.
double coverage_gap(const SphereNet& net, std::size_t trials,
                    std::uint64_t seed = 0xc0feULL);

/// Lattice vectors with entries in {-h, 0, +h}, h = 2^level / sqrt(n), and
/// support size between 1 and min(floor(h^-2), n). All vectors satisfy
/// ||x||_2 <= 1.
struct LevelNet {
  double level = 0.0;
  double grid_value = 0.0;
  std::size_t support_bound = 0;
  std::vector<std::vector<double>> points;
  /// C with |net| == exp(C * support_bound * log(M)).
  double cardinality_constant = 0.0;
};

/// Enumerates the full level net. The level index may be fractional; the
/// grid value must not exceed 1. Guarded to 1e6 vectors, computed before
/// allocation. big_m >= 2 so the reported cardinality constant is defined.
LevelNet enumerate_level_net(std::size_t n, double level, double big_m);

/// Coordinate split of a unit-ball vector x at threshold M / sqrt(n):
/// `spiky` keeps the coordinates strictly above it (at most n / M^2 of
/// them), `spread` the rest. x == spiky + spread holds bit-exactly.
struct ClassifiedVector {
  std::vector<double> spiky;
  std::vector<double> spread;
  double threshold = 0.0;
};

ClassifiedVector classify_vector(const std::vector<double>& x, double big_m);

/// floor(c * n * p / log(e / p)): the support budget of the sparse ball.
std::size_t sparse_support_budget(std::size_t n, double p, double c = 0.25);

bool in_sparse_ball(const std::vector<double>& x, std::size_t budget);
bool in_spread_ball(const std::vector<double>& x, double big_m);

/// One net point per row, ready for the plain-text matrix format.
Matrix points_to_matrix(const std::vector<std::vector<double>>& points);

}  // namespace rmlab
