#include "rmlab/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "rmlab/errors.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct PowerRun {
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

// One power iteration run on the Gram operator of the smaller side.
PowerRun run_power(const Matrix& m, double tol, int max_iter,
                   std::uint64_t seed) {
  const bool tall = m.rows() >= m.cols();
  const std::size_t dim = tall ? m.cols() : m.rows();
  auto apply_gram = [&](const std::vector<double>& v) {
    return tall ? mat_t_vec(m, mat_vec(m, v)) : mat_vec(m, mat_t_vec(m, v));
  };

  Rng rng(seed);
  auto random_unit = [&]() {
    std::vector<double> v(dim);
    double n = 0.0;
    while (n == 0.0) {
      for (double& x : v) x = rng.next_normal();
      n = norm2(v);
    }
    for (double& x : v) x /= n;
    return v;
  };

  std::vector<double> v = random_unit();
  PowerRun run;
  double rho_prev = -1.0;
  while (run.iterations < max_iter) {
    ++run.iterations;
    std::vector<double> w = apply_gram(v);
    const double rho = dot(v, w);
    if (rho <= 0.0) {
      // The start vector landed in the kernel; try a fresh direction.
      v = random_unit();
      rho_prev = -1.0;
      continue;
    }
    double res_sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double r = w[i] - rho * v[i];
      res_sq += r * r;
    }
    run.rho = rho;
    run.residual = std::sqrt(res_sq) / rho;
    const double change = std::abs(rho - rho_prev) / rho;
    if (rho_prev >= 0.0 && change < tol && run.residual <= tol) {
      run.converged = true;
      return run;
    }
    rho_prev = rho;
    const double wn = norm2(w);
    if (wn == 0.0) {
      v = random_unit();
      rho_prev = -1.0;
      continue;
    }
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / wn;
  }
  return run;
}

}  // namespace

SpectralResult spectral_norm(const Matrix& m, double tol, int max_iter,
                             std::uint64_t seed) {
  if (!(tol > 0.0))
    throw ConfigError("spectral_norm: tol must be positive");
  if (max_iter < 1)
    throw ConfigError("spectral_norm: max_iter must be >= 1");

  SpectralResult result;
  if (hilbert_schmidt_norm(m) == 0.0) {
    result.converged = true;
    result.iterations = 1;
    return result;
  }

  PowerRun first = run_power(m, tol, max_iter, seed);
  if (first.converged) {
    result.value = std::sqrt(first.rho);
    result.iterations = first.iterations;
    result.converged = true;
    result.residual = first.residual;
    return result;
  }
  // Restart once from a second seed and report the larger estimate, still
  // flagged as non-converged.
  PowerRun second = run_power(m, tol, max_iter, mix_seed(seed, 1));
  const PowerRun& best = second.rho > first.rho ? second : first;
  result.value = std::sqrt(std::max(best.rho, 0.0));
  result.iterations = first.iterations + second.iterations;
  result.converged = second.converged && second.rho >= first.rho;
  result.residual = best.residual;
  return result;
}

std::vector<double> singular_values_full(const Matrix& m) {
  const std::size_t d = std::min(m.rows(), m.cols());
  if (d > 2000)
    throw GuardError("singular_values_full: min(rows, cols) = " +
                     std::to_string(d) + " exceeds the guard of 2000");

  Matrix g = m.rows() >= m.cols() ? gram(m) : gram(transpose(m));
  std::vector<double> a(g.entries());
  const double fro = hilbert_schmidt_norm(g);
  std::vector<double> values(d, 0.0);
  if (fro == 0.0) return values;

  const double threshold = 1e-12 * fro;
  const double skip = threshold / (10.0 * static_cast<double>(d));
  auto at = [&](std::size_t p, std::size_t q) -> double& {
    return a[p * d + q];
  };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off_sq = 0.0;
    for (std::size_t p = 0; p + 1 < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off_sq += at(p, q) * at(p, q);
    if (std::sqrt(2.0 * off_sq) < threshold) {
      for (std::size_t i = 0; i < d; ++i)
        values[i] = std::sqrt(std::max(at(i, i), 0.0));
      std::sort(values.begin(), values.end(), std::greater<>());
      return values;
    }
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) <= skip) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        at(p, p) -= t * apq;
        at(q, q) += t * apq;
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
          if (r == p || r == q) continue;
          const double arp = at(r, p);
          const double arq = at(r, q);
          at(r, p) = arp - s * (arq + tau * arp);
          at(p, r) = at(r, p);
          at(r, q) = arq + s * (arp - tau * arq);
          at(q, r) = at(r, q);
        }
      }
    }
  }
  throw Error("singular_values_full: Jacobi sweeps failed to converge");
}

double smallest_singular_value(const Matrix& m) {
  if (m.rows() < m.cols())
    throw DimensionError("smallest_singular_value: needs rows >= cols, got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  return singular_values_full(m).back();
}

NetNormBounds net_norm_bounds(const Matrix& m, double eps,
                              const std::vector<std::vector<double>>& net) {
  if (!(eps > 0.0 && eps < 1.0))
    throw ConfigError("net_norm_bounds: eps must lie in (0, 1), got " +
                      format_double(eps));
  if (net.empty()) throw ConfigError("net_norm_bounds: empty net");

  NetNormBounds bounds;
  for (const auto& x : net) {
    if (x.size() != m.cols())
      throw DimensionError("net_norm_bounds: net vector length " +
                           std::to_string(x.size()) + " does not match " +
                           std::to_string(m.cols()) + " columns");
    double len_sq = 0.0;
    for (double c : x) len_sq += c * c;
    if (std::abs(std::sqrt(len_sq) - 1.0) > 1e-9)
      throw InvariantError("net_norm_bounds: non-unit net vector (norm " +
                           format_double(std::sqrt(len_sq)) + ")");
    const double image = norm2(mat_vec(m, x));
    bounds.lower = std::max(bounds.lower, image);
  }
  bounds.upper = bounds.lower / (1.0 - eps);
  return bounds;
}

}  // namespace rmlab
