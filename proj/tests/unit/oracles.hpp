#pragma once

// Reference computations written independently of the library: dense
// matrices, plain Gaussian elimination and direct sums.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using C = std::complex<double>;
using Vec = std::vector<C>;
using Mat = std::vector<Vec>;

inline Mat identity(std::size_t n) {
  Mat m(n, Vec(n));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

/// Dense tridiag(1, -2, 1).
inline Mat laplacian(std::size_t n) {
  Mat a(n, Vec(n));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = -2.0;
    if (i > 0) a[i][i - 1] = 1.0;
    if (i + 1 < n) a[i][i + 1] = 1.0;
  }
  return a;
}

/// I + s_a A + s_i I, dense.
inline Mat affine(std::size_t n, C s_a, C s_i) {
  Mat a = laplacian(n);
  Mat out = identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] += s_a * a[i][j] + (i == j ? s_i : C{});
  return out;
}

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec y(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += m[i][j] * x[j];
  return y;
}

/// Gaussian elimination with partial pivoting.
inline Vec solve(Mat m, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    std::swap(m[c], m[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const C f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      b[r] -= f * b[c];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    C s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[i][k] * x[k];
    x[i] = s / m[i][i];
  }
  return x;
}

/// One step of the splitting scheme from the matrix form, dense.
inline Vec scheme_step(const Vec& psi, double h, double tau, double alpha, int lambda, const Vec& g) {
  const std::size_t n = psi.size();
  const C i{0.0, 1.0};
  Vec rotated(n);
  for (std::size_t j = 0; j < n; ++j) {
    rotated[j] = std::exp(-0.5 * alpha * tau) * std::exp(i * (lambda * std::norm(psi[j]) * tau)) * psi[j];
  }
  const Mat plus = affine(n, i * tau / (2 * h * h), -0.25 * alpha * tau);
  const Mat minus = affine(n, -i * tau / (2 * h * h), 0.25 * alpha * tau);
  Vec rhs = matvec(plus, rotated);
  for (std::size_t j = 0; j < n; ++j) rhs[j] += g[j];
  return solve(minus, rhs);
}

inline double norm2(const Vec& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

inline double max_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// eps^2 h / alpha * sum_j sum_k eta_k * 2 sin^2(k pi j h), straight double loop.
inline double charge_limit(int J, int P, double exponent, double alpha, double eps) {
  const double h = 1.0 / (J + 1);
  double s = 0.0;
  for (int j = 1; j <= J; ++j) {
    for (int k = 1; k <= P; ++k) {
      const double e = std::sqrt(2.0) * std::sin(k * std::numbers::pi * j * h);
      s += std::pow(k, -exponent) * e * e;
    }
  }
  return eps * eps * h / alpha * s;
}

inline Vec random_vec(std::mt19937_64& rng, std::size_t n, double amp = 1.0) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (auto& z : v) z = amp * C{d(rng), d(rng)};
  return v;
}

}  // namespace oracle
