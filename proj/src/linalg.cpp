#include "flowcast/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowcast {

Matrix Matrix::identity(int n) {
  Matrix I(n, n);
  for (int i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows(), B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int k = 0; k < A.cols(); ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols(); ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

Matrix transpose(const Matrix& A) {
  Matrix T(A.cols(), A.rows());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) T(j, i) = A(i, j);
  return T;
}

std::vector<double> matvec(const Matrix& A, const std::vector<double>& x) {
  std::vector<double> y(A.rows(), 0.0);
  for (int i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols(); ++j) s += A(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

namespace {

// In-place Householder QR of X (n x k, n >= k); y transformed alongside.
// Returns the R diagonal scale used for the rank check.
void householder_qr(Matrix& X, std::vector<double>& y) {
  const int n = X.rows();
  const int k = X.cols();
  for (int j = 0; j < k; ++j) {
    double norm = 0.0;
    for (int i = j; i < n; ++i) norm += X(i, j) * X(i, j);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = X(j, j) > 0 ? -norm : norm;
    double vjj = X(j, j) - alpha;
    std::vector<double> v(n - j, 0.0);
    v[0] = vjj;
    for (int i = j + 1; i < n; ++i) v[i - j] = X(i, j);
    double vtv = 0.0;
    for (double vi : v) vtv += vi * vi;
    X(j, j) = alpha;
    for (int i = j + 1; i < n; ++i) X(i, j) = 0.0;
    if (vtv == 0.0) continue;
    for (int c = j + 1; c < k; ++c) {
      double dot = 0.0;
      for (int i = j; i < n; ++i) dot += v[i - j] * X(i, c);
      const double f = 2.0 * dot / vtv;
      for (int i = j; i < n; ++i) X(i, c) -= f * v[i - j];
    }
    double doty = 0.0;
    for (int i = j; i < n; ++i) doty += v[i - j] * y[i];
    const double fy = 2.0 * doty / vtv;
    for (int i = j; i < n; ++i) y[i] -= fy * v[i - j];
  }
}

std::vector<double> back_substitute(const Matrix& R, const std::vector<double>& y,
                                    int k) {
  std::vector<double> beta(k, 0.0);
  for (int i = k - 1; i >= 0; --i) {
    double s = y[i];
    for (int j = i + 1; j < k; ++j) s -= R(i, j) * beta[j];
    beta[i] = s / R(i, i);
  }
  return beta;
}

} // namespace

OlsFit ols(const Matrix& X, const std::vector<double>& y) {
  const int n = X.rows();
  const int k = X.cols();
  if (static_cast<int>(y.size()) != n || n < k || k == 0)
    throw std::invalid_argument("ols: bad dimensions");

  double col_scale = 0.0;
  for (int j = 0; j < k; ++j) {
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += X(i, j) * X(i, j);
    col_scale = std::max(col_scale, std::sqrt(norm));
  }

  Matrix Q = X;
  std::vector<double> qy = y;
  householder_qr(Q, qy);
  for (int j = 0; j < k; ++j)
    if (std::abs(Q(j, j)) < 1e-12 * std::max(1.0, col_scale))
      throw std::runtime_error("ols: rank-deficient design matrix");

  OlsFit fit;
  fit.n = n;
  fit.k = k;
  fit.beta = back_substitute(Q, qy, k);
  double sse = 0.0;
  for (int i = k; i < n; ++i) sse += qy[i] * qy[i];
  fit.sse = sse;
  fit.sigma2 = n > k ? sse / (n - k) : 0.0;

  // (X'X)^-1 = R^-1 R^-T; diag gives the coefficient variances.
  Matrix Rinv(k, k);
  for (int col = 0; col < k; ++col) {
    std::vector<double> e(k, 0.0);
    e[col] = 1.0;
    std::vector<double> x = back_substitute(Q, e, k);
    for (int i = 0; i < k; ++i) Rinv(i, col) = x[i];
  }
  fit.se.resize(k);
  for (int i = 0; i < k; ++i) {
    double v = 0.0;
    for (int j = 0; j < k; ++j) v += Rinv(i, j) * Rinv(i, j);
    fit.se[i] = std::sqrt(fit.sigma2 * v);
  }
  return fit;
}

std::vector<double> ridge_ls(const Matrix& X, const std::vector<double>& y,
                             const std::vector<double>& ridge, double* sse) {
  const int n = X.rows();
  const int k = X.cols();
  int extra = 0;
  for (int j = 0; j < k; ++j)
    if (ridge[j] > 0.0) ++extra;

  Matrix Xa(n + extra, k);
  std::vector<double> ya(n + extra, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) Xa(i, j) = X(i, j);
    ya[i] = y[i];
  }
  int row = n;
  for (int j = 0; j < k; ++j)
    if (ridge[j] > 0.0) Xa(row++, j) = std::sqrt(ridge[j]);

  Matrix Q = Xa;
  std::vector<double> qy = ya;
  householder_qr(Q, qy);
  for (int j = 0; j < k; ++j)
    if (Q(j, j) == 0.0) throw std::runtime_error("ridge_ls: singular system");
  std::vector<double> beta = back_substitute(Q, qy, k);
  if (sse) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double fit = 0.0;
      for (int j = 0; j < k; ++j) fit += X(i, j) * beta[j];
      const double e = y[i] - fit;
      s += e * e;
    }
    *sse = s;
  }
  return beta;
}

bool cholesky(const Matrix& A, Matrix& L) {
  const int n = A.rows();
  L = Matrix(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      if (i == j) {
        if (s <= 0.0 || !std::isfinite(s)) return false;
        L(i, i) = std::sqrt(s);
      } else {
        L(i, j) = s / L(j, j);
      }
    }
  }
  return true;
}

std::vector<double> chol_solve(const Matrix& L, const std::vector<double>& b) {
  const int n = L.rows();
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= L(i, j) * z[j];
    z[i] = s / L(i, i);
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = z[i];
    for (int j = i + 1; j < n; ++j) s -= L(j, i) * x[j];
    x[i] = s / L(i, i);
  }
  return x;
}

double chol_logdet(const Matrix& L) {
  double s = 0.0;
  for (int i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

double sym_eig_max(const Matrix& S) {
  const int n = S.rows();
  if (n == 1) return S(0, 0);
  if (n == 2) {
    const double tr = S(0, 0) + S(1, 1);
    const double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return tr / 2.0 + disc;
  }
  if (n == 3) {
    // Trigonometric solution of the symmetric 3x3 eigenproblem.
    const double p1 = S(0, 1) * S(0, 1) + S(0, 2) * S(0, 2) + S(1, 2) * S(1, 2);
    const double q = (S(0, 0) + S(1, 1) + S(2, 2)) / 3.0;
    if (p1 == 0.0) return std::max({S(0, 0), S(1, 1), S(2, 2)});
    const double p2 = (S(0, 0) - q) * (S(0, 0) - q) + (S(1, 1) - q) * (S(1, 1) - q) +
                      (S(2, 2) - q) * (S(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Matrix B(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) B(i, j) = (S(i, j) - (i == j ? q : 0.0)) / p;
    const double detB = B(0, 0) * (B(1, 1) * B(2, 2) - B(1, 2) * B(2, 1)) -
                        B(0, 1) * (B(1, 0) * B(2, 2) - B(1, 2) * B(2, 0)) +
                        B(0, 2) * (B(1, 0) * B(2, 1) - B(1, 1) * B(2, 0));
    double r = detB / 2.0;
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    return q + 2.0 * p * std::cos(phi);
  }
  throw std::invalid_argument("sym_eig_max: dimension > 3");
}

double spectral_norm(const Matrix& A) {
  Matrix S = matmul(transpose(A), A);
  return std::sqrt(std::max(0.0, sym_eig_max(S)));
}

} // namespace flowcast
