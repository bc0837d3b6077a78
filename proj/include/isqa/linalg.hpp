#pragma once

#include <cstddef>
#include <vector>

namespace isqa {

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);
double nrm2(const Vector& a);
double inf_norm(const Vector& a);

// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);
void scal(double alpha, Vector& x);

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double alpha, const Vector& a);

bool all_finite(const Vector& a);
std::size_t count_nonzero(const Vector& a);

/// Small dense row-major matrix used for compact-factor bookkeeping and
/// test oracles. Not meant for large-scale linear algebra.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static DenseMatrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Vector apply(const Vector& v) const;
  Vector apply_transpose(const Vector& v) const;
  DenseMatrix multiply(const DenseMatrix& other) const;
  DenseMatrix transpose() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

/// LU factorization with partial pivoting of a small square matrix.
class LuFactors {
 public:
  explicit LuFactors(DenseMatrix a);

  bool singular() const { return singular_; }
  Vector solve(const Vector& rhs) const;
  DenseMatrix inverse() const;

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
  bool singular_ = false;
};

/// Eigenvalues (ascending) and eigenvectors of a small symmetric matrix,
/// by cyclic Jacobi sweeps. Columns of `vectors` are eigenvectors.
struct SymmetricEigen {
  Vector values;
  DenseMatrix vectors;
};
SymmetricEigen symmetric_eigen(const DenseMatrix& a);

/// Least-squares slope of y against x.
double fit_slope(const Vector& x, const Vector& y);

}  // namespace isqa
