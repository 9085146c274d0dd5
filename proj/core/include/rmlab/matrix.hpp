#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rmlab/errors.hpp"

namespace rmlab {

/// Dense row-major matrix of doubles. Construction validates that every
/// entry is finite; afterwards the object is immutable, so instances can be
/// shared across threads without locks. All operations are pure functions
/// returning new matrices.
class Matrix {
 public:
  /// Takes ownership of `entries` (row-major, size rows*cols). Throws
  /// DimensionError on a size mismatch and InvariantError on a non-finite
  /// entry.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix zero(std::size_t rows, std::size_t cols);
  static Matrix identity(std::size_t n);

  /// Builds a rows x cols matrix with entries fn(i, j).
  template <typename Fn>
  static Matrix from_fn(std::size_t rows, std::size_t cols, Fn&& fn) {
    std::vector<double> entries;
    entries.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) entries.push_back(fn(i, j));
    return Matrix(rows, cols, std::move(entries));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }

  /// Row-major entry storage; row i starts at data() + i*cols().
  const double* data() const { return entries_.data(); }
  const std::vector<double>& entries() const { return entries_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

/// Exact column-norm profile of a factor B together with the norm bounds it
/// must respect: max column norm <= operator_norm_upper and
/// sum of squared column norms == hs_norm^2.
struct ColumnProfile {
  std::vector<double> norms;
  double hs_norm = 0.0;
  double operator_norm_upper = 0.0;
};

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// m * v and m^T * v for a column vector v.
std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& v);
std::vector<double> mat_t_vec(const Matrix& m, const std::vector<double>& v);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);

/// m^T m, the Gram matrix of the columns.
Matrix gram(const Matrix& m);

/// Frobenius norm: sqrt of the sum of squared entries.
double hilbert_schmidt_norm(const Matrix& m);

double column_norm(const Matrix& m, std::size_t j);
std::vector<double> column_norms(const Matrix& m);

/// Builds the column profile of m given an upper bound on its operator norm
/// and verifies the two profile inequalities. Throws InvariantError naming
/// the violated inequality.
ColumnProfile column_profile(const Matrix& m, double operator_norm_upper);

/// Plain-text serialization: first line "rows cols", then one line per row
/// with entries at 17 significant digits (round-trips exactly).
void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);
void save_matrix(const std::string& path, const Matrix& m);
Matrix load_matrix(const std::string& path);

/// Formats a double with 17 significant digits, enough for an exact
/// round-trip through text.
std::string format_double(double v);

}  // namespace rmlab
