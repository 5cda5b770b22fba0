#pragma once

#include <cstddef>
#include <vector>

namespace flowcast {

// Row-major dense matrix, small dimensions only.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  static Matrix identity(int n);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

Matrix matmul(const Matrix& A, const Matrix& B);
Matrix transpose(const Matrix& A);
std::vector<double> matvec(const Matrix& A, const std::vector<double>& x);

struct OlsFit {
  std::vector<double> beta;
  std::vector<double> se; // classical OLS standard errors
  double sigma2 = 0.0;    // SSE / (n - k)
  double sse = 0.0;
  int n = 0;
  int k = 0;
};

// Least squares via Householder QR. Throws std::runtime_error on
// rank deficiency (|R_jj| below tol relative to column norms).
OlsFit ols(const Matrix& X, const std::vector<double>& y);

// Least squares with an optional per-column ridge penalty
// (adds ridge[j] * beta_j^2 to the objective). No standard errors.
std::vector<double> ridge_ls(const Matrix& X, const std::vector<double>& y,
                             const std::vector<double>& ridge,
                             double* sse = nullptr);

// Lower Cholesky factor of a symmetric matrix; returns false if not
// positive definite.
bool cholesky(const Matrix& A, Matrix& L);
// Solve A x = b given the lower Cholesky factor L of A.
std::vector<double> chol_solve(const Matrix& L, const std::vector<double>& b);
double chol_logdet(const Matrix& L); // log det A = 2 sum log L_ii

// Largest eigenvalue of a symmetric 1x1..3x3 matrix (closed form).
double sym_eig_max(const Matrix& S);
// Spectral norm = sqrt(max eig of A'A).
double spectral_norm(const Matrix& A);

} // namespace flowcast
