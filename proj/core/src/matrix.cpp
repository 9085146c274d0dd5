#include "rmlab/matrix.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace rmlab {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

[[noreturn]] void throw_shape_mismatch(const char* op, const Matrix& a,
                                       const Matrix& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       shape_str(a.rows(), a.cols()) + " and " +
                       shape_str(b.rows(), b.cols()));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw DimensionError("Matrix: entry count " +
                         std::to_string(entries_.size()) +
                         " does not match shape " + shape_str(rows_, cols_));
  }
  for (std::size_t idx = 0; idx < entries_.size(); ++idx) {
    if (!std::isfinite(entries_[idx])) {
      throw InvariantError("Matrix: non-finite entry at (" +
                           std::to_string(idx / cols_) + ", " +
                           std::to_string(idx % cols_) + ")");
    }
  }
}

Matrix Matrix::zero(std::size_t rows, std::size_t cols) {
  return Matrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

Matrix Matrix::identity(std::size_t n) {
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  return Matrix(n, n, std::move(e));
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw_shape_mismatch("multiply", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  const double* pa = a.data();
  const double* pb = b.data();
  // i-k-j loop order keeps both streams sequential in memory.
  for (std::size_t i = 0; i < m; ++i) {
    double* row_out = out.data() + i * n;
    const double* row_a = pa + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const double alv = row_a[l];
      if (alv == 0.0) continue;
      const double* row_b = pb + l * n;
      for (std::size_t j = 0; j < n; ++j) row_out[j] += alv * row_b[j];
    }
  }
  return Matrix(m, n, std::move(out));
}

std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& v) {
  if (v.size() != m.cols())
    throw DimensionError("mat_vec: vector length " + std::to_string(v.size()) +
                         " does not match " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.data() + i * m.cols();
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return out;
}

std::vector<double> mat_t_vec(const Matrix& m, const std::vector<double>& v) {
  if (v.size() != m.rows())
    throw DimensionError("mat_t_vec: vector length " +
                         std::to_string(v.size()) + " does not match " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.data() + i * m.cols();
    const double vi = v[i];
    if (vi == 0.0) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += vi * row[j];
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  std::vector<double> out(m.rows() * m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out[j * m.rows() + i] = m(i, j);
  return Matrix(m.cols(), m.rows(), std::move(out));
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw_shape_mismatch("add", a, b);
  std::vector<double> out(a.entries());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.entries()[i];
  return Matrix(a.rows(), a.cols(), std::move(out));
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw_shape_mismatch("subtract", a, b);
  std::vector<double> out(a.entries());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.entries()[i];
  return Matrix(a.rows(), a.cols(), std::move(out));
}

Matrix scale(const Matrix& m, double s) {
  std::vector<double> out(m.entries());
  for (double& v : out) v *= s;
  return Matrix(m.rows(), m.cols(), std::move(out));
}

Matrix gram(const Matrix& m) {
  const std::size_t n = m.cols();
  std::vector<double> out(n * n, 0.0);
  // Accumulate row outer products of m^T m; symmetric, fill both halves.
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.data() + i * n;
    for (std::size_t p = 0; p < n; ++p) {
      const double rp = row[p];
      if (rp == 0.0) continue;
      double* out_row = out.data() + p * n;
      for (std::size_t q = p; q < n; ++q) out_row[q] += rp * row[q];
    }
  }
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < p; ++q) out[p * n + q] = out[q * n + p];
  return Matrix(n, n, std::move(out));
}

double hilbert_schmidt_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.entries()) s += v * v;
  return std::sqrt(s);
}

double column_norm(const Matrix& m, std::size_t j) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

std::vector<double> column_norms(const Matrix& m) {
  std::vector<double> s(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.data() + i * m.cols();
    for (std::size_t j = 0; j < m.cols(); ++j) s[j] += row[j] * row[j];
  }
  for (double& v : s) v = std::sqrt(v);
  return s;
}

ColumnProfile column_profile(const Matrix& m, double operator_norm_upper) {
  ColumnProfile profile;
  profile.norms = column_norms(m);
  profile.operator_norm_upper = operator_norm_upper;
  profile.hs_norm = hilbert_schmidt_norm(m);

  double sum_sq = 0.0;
  double max_norm = 0.0;
  for (double v : profile.norms) {
    sum_sq += v * v;
    max_norm = std::max(max_norm, v);
  }
  const double hs_sq = profile.hs_norm * profile.hs_norm;
  // Same sum in a different accumulation order; allow rounding slack.
  if (std::abs(sum_sq - hs_sq) > 1e-12 * std::max(1.0, hs_sq)) {
    throw InvariantError(
        "column_profile: sum of squared column norms == hs_norm^2 violated");
  }
  if (max_norm > operator_norm_upper * (1.0 + 1e-12)) {
    throw InvariantError(
        "column_profile: max column norm <= operator_norm violated (" +
        format_double(max_norm) + " > " + format_double(operator_norm_upper) +
        ")");
  }
  return profile;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in) {
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols)) {
    throw ConfigError("read_matrix: missing or malformed header line");
  }
  std::vector<double> entries(rows * cols);
  for (std::size_t idx = 0; idx < entries.size(); ++idx) {
    if (!(in >> entries[idx])) {
      throw ConfigError("read_matrix: expected " +
                        std::to_string(entries.size()) + " entries, got " +
                        std::to_string(idx));
    }
  }
  return Matrix(rows, cols, std::move(entries));
}

void save_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_matrix: cannot open " + path);
  write_matrix(out, m);
  if (!out) throw ConfigError("save_matrix: write failed for " + path);
}

Matrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_matrix: cannot open " + path);
  return read_matrix(in);
}

}  // namespace rmlab
