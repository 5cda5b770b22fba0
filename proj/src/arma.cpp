#include "flowcast/arma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowcast {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
} // namespace

std::vector<double> pacf_to_ar(std::span<const double> raw) {
  const size_t p = raw.size();
  std::vector<double> a(p, 0.0), work(p, 0.0);
  for (size_t k = 0; k < p; ++k) {
    const double pk = std::tanh(raw[k]);
    for (size_t i = 0; i < k; ++i) work[i] = a[i] - pk * a[k - 1 - i];
    for (size_t i = 0; i < k; ++i) a[i] = work[i];
    a[k] = pk;
  }
  return a;
}

std::vector<double> pacf_to_ma(std::span<const double> raw) {
  std::vector<double> b = pacf_to_ar(raw);
  for (double& v : b) v = -v; // 1 + b L ... invertible iff (-b) stationary
  return b;
}

MaFilter ma_innovations(std::span<const double> u, std::span<const double> b,
                        double sigma2) {
  MaFilter out;
  const int n = static_cast<int>(u.size());
  const int q = static_cast<int>(b.size());
  if (n == 0 || sigma2 <= 0.0) return out;

  // Autocovariance of the MA(q) at unit innovation variance.
  std::vector<double> g(q + 1, 0.0);
  std::vector<double> psi(q + 1, 0.0);
  psi[0] = 1.0;
  for (int j = 0; j < q; ++j) psi[j + 1] = b[j];
  for (int k = 0; k <= q; ++k)
    for (int j = 0; j + k <= q; ++j) g[k] += psi[j] * psi[j + k];

  out.innovations.resize(n);
  out.ratio.resize(n);

  if (q == 0) {
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      out.innovations[i] = u[i];
      out.ratio[i] = 1.0;
      ll += -0.5 * (kLog2Pi + std::log(sigma2) + u[i] * u[i] / sigma2);
    }
    out.loglik = ll;
    out.ok = std::isfinite(ll);
    return out;
  }

  // Banded innovations recursion: only theta_{t,1..q} are nonzero for a
  // pure MA(q).
  std::vector<std::vector<double>> theta(n, std::vector<double>(q, 0.0));
  std::vector<double> r(n, 0.0);
  r[0] = g[0];
  out.innovations[0] = u[0];
  out.ratio[0] = r[0];
  double ll = -0.5 * (kLog2Pi + std::log(sigma2 * r[0]) +
                      u[0] * u[0] / (sigma2 * r[0]));

  for (int t = 1; t < n; ++t) {
    for (int k = std::max(0, t - q); k < t; ++k) {
      double s = g[t - k]; // zero when t - k > q, loop bound prevents that
      for (int j = std::max(0, t - q); j < k; ++j) {
        const double th_k = (k - j <= q) ? theta[k][k - j - 1] : 0.0;
        const double th_t = theta[t][t - j - 1];
        s -= th_k * th_t * r[j];
      }
      theta[t][t - k - 1] = s / r[k];
    }
    double rt = g[0];
    for (int j = std::max(0, t - q); j < t; ++j) {
      const double th = theta[t][t - j - 1];
      rt -= th * th * r[j];
    }
    if (!(rt > 1e-12) || !std::isfinite(rt)) {
      out.loglik = kNegInf;
      return out;
    }
    r[t] = rt;
    double pred = 0.0;
    for (int j = 1; j <= std::min(t, q); ++j)
      pred += theta[t][j - 1] * out.innovations[t - j];
    out.innovations[t] = u[t] - pred;
    out.ratio[t] = rt;
    ll += -0.5 * (kLog2Pi + std::log(sigma2 * rt) +
                  out.innovations[t] * out.innovations[t] / (sigma2 * rt));
  }
  out.loglik = ll;
  out.ok = std::isfinite(ll);
  return out;
}

VecMaFilter vecma1_innovations(const std::vector<std::vector<double>>& u,
                               const Matrix* B, const Matrix& Sigma) {
  VecMaFilter out;
  const int n = static_cast<int>(u.size());
  if (n == 0) return out;
  const int dim = Sigma.rows();

  if (B == nullptr) { // iid Gaussian case
    Matrix L;
    if (!cholesky(Sigma, L)) return out;
    const double logdet = chol_logdet(L);
    double ll = 0.0;
    out.innovations = u;
    for (int t = 0; t < n; ++t) {
      const std::vector<double> z = chol_solve(L, u[t]);
      double quad = 0.0;
      for (int i = 0; i < dim; ++i) quad += z[i] * u[t][i];
      ll += -0.5 * (dim * kLog2Pi + logdet + quad);
    }
    out.loglik = ll;
    out.ok = std::isfinite(ll);
    return out;
  }

  // G0 = Sigma + B Sigma B', G1 = B Sigma.
  const Matrix BS = matmul(*B, Sigma);
  const Matrix G1 = BS;
  Matrix G0 = Sigma;
  const Matrix BSBt = matmul(BS, transpose(*B));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) G0(i, j) += BSBt(i, j);

  Matrix V = G0;
  out.innovations.resize(n);
  out.innovations[0] = u[0];
  double ll = 0.0;
  Matrix L;
  for (int t = 0; t < n; ++t) {
    if (t > 0) {
      // Theta_t = G1 V^-1 via V L-solves on G1 rows; V_t = G0 - Theta V Theta'.
      Matrix Theta(dim, dim);
      for (int i = 0; i < dim; ++i) {
        std::vector<double> row(dim);
        for (int j = 0; j < dim; ++j) row[j] = G1(i, j);
        const std::vector<double> x = chol_solve(L, row);
        for (int j = 0; j < dim; ++j) Theta(i, j) = x[j];
      }
      Matrix Vn = G0;
      const Matrix TV = matmul(Theta, V);
      const Matrix TVTt = matmul(TV, transpose(Theta));
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) Vn(i, j) -= TVTt(i, j);
      std::vector<double>& nu = out.innovations[t];
      nu.assign(dim, 0.0);
      const std::vector<double> pred = matvec(Theta, out.innovations[t - 1]);
      for (int i = 0; i < dim; ++i) nu[i] = u[t][i] - pred[i];
      V = Vn;
    }
    if (!cholesky(V, L)) {
      out.loglik = kNegInf;
      out.ok = false;
      return out;
    }
    const std::vector<double> z = chol_solve(L, out.innovations[t]);
    double quad = 0.0;
    for (int i = 0; i < dim; ++i) quad += z[i] * out.innovations[t][i];
    ll += -0.5 * (dim * kLog2Pi + chol_logdet(L) + quad);
  }
  out.loglik = ll;
  out.ok = std::isfinite(ll);
  return out;
}

Matrix squash_spectral(const Matrix& A) {
  const double s = spectral_norm(A);
  double scale;
  if (s < 1e-8) {
    scale = 1.0 - s * s / 3.0; // tanh(s)/s series
  } else {
    scale = std::tanh(s) / s;
  }
  Matrix out = A;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) out(i, j) = A(i, j) * scale;
  return out;
}

std::vector<double> level_lag_coefficients(std::span<const double> ar, int d) {
  // Polynomial product: (1 - sum gamma_i L^i) * (1 - L)^d.
  std::vector<double> f{1.0};
  {
    std::vector<double> g(ar.size() + 1, 0.0);
    g[0] = 1.0;
    for (size_t i = 0; i < ar.size(); ++i) g[i + 1] = -ar[i];
    f = g;
  }
  for (int k = 0; k < d; ++k) {
    std::vector<double> nf(f.size() + 1, 0.0);
    for (size_t i = 0; i < f.size(); ++i) {
      nf[i] += f[i];
      nf[i + 1] -= f[i];
    }
    f = nf;
  }
  std::vector<double> a(f.size() - 1);
  for (size_t k = 1; k < f.size(); ++k) a[k - 1] = -f[k];
  return a;
}

} // namespace flowcast
