#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>

#include "dsii/grid.hpp"

namespace dsii {

/// LU with partial pivoting plus log-domain determinant bookkeeping.
/// The factorization is done in place; the input matrix is consumed.
class LuDet {
 public:
  explicit LuDet(CMat& a) : lu_(a) {}

  /// log det of the factored matrix, accumulated pivot by pivot so the
  /// magnitude never overflows. Imaginary part is the (branch-summed) phase.
  Complex log_det() const {
    const auto& d = lu_.matrixLU().diagonal();
    double log_abs = 0.0, arg = 0.0;
    min_pivot_ = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      double m = std::abs(d[i]);
      min_pivot_ = std::min(min_pivot_, m);
      log_abs += std::log(m);
      arg += std::arg(d[i]);
    }
    if (lu_.permutationP().determinant() < 0) arg += kPi;
    return {log_abs, arg};
  }

  double min_pivot() const {
    if (!std::isfinite(min_pivot_)) log_det();
    return min_pivot_;
  }

  CVec solve(const CVec& rhs) const { return lu_.solve(rhs); }
  CMat solve(const CMat& rhs) const { return lu_.solve(rhs); }

 private:
  Eigen::PartialPivLU<Eigen::Ref<CMat>> lu_;
  mutable double min_pivot_ = std::numeric_limits<double>::infinity();
};

/// Largest singular value by power iteration on A^H A (deterministic seed).
inline double largest_singular_value(const CMat& a, int iters = 60) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss;
  CVec v(a.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(gauss(rng), gauss(rng));
  v.normalize();
  double s = 0.0;
  for (int it = 0; it < iters; ++it) {
    CVec w = a * v;
    v = a.adjoint() * w;
    double n = v.norm();
    if (n == 0) return 0.0;
    v /= n;
    s = std::sqrt(n);
  }
  return s;
}

/// Smallest singular value via inverse iteration on (A^H A)^{-1}, both
/// solves sharing one LU factorization.
inline double smallest_singular_value(const CMat& a, int iters = 40) {
  CMat work = a;
  Eigen::PartialPivLU<Eigen::Ref<CMat>> lu(work);
  std::mt19937_64 rng(98765);
  std::normal_distribution<double> gauss;
  CVec v(a.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(gauss(rng), gauss(rng));
  v.normalize();
  double inv2 = 0.0;
  for (int it = 0; it < iters; ++it) {
    CVec w = lu.adjoint().solve(v);
    CVec u = lu.solve(w);
    double n = u.norm();
    if (!std::isfinite(n) || n == 0) return 0.0;
    v = u / n;
    inv2 = n;
  }
  return 1.0 / std::sqrt(inv2);
}

struct GmresResult {
  CVec x;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Restarted GMRES for I - A style applies; `op` evaluates y = M x.
inline GmresResult gmres(const std::function<CVec(const CVec&)>& op, const CVec& rhs, double tol,
                         int restart = 40, int max_outer = 8) {
  GmresResult out;
  out.x = CVec::Zero(rhs.size());
  double bnorm = rhs.norm();
  if (bnorm == 0) {
    out.converged = true;
    return out;
  }
  for (int outer = 0; outer < max_outer; ++outer) {
    CVec r = rhs - op(out.x);
    double beta = r.norm();
    out.residual = beta / bnorm;
    if (out.residual < tol) {
      out.converged = true;
      return out;
    }
    std::vector<CVec> basis;
    basis.push_back(r / beta);
    CMat H = CMat::Zero(restart + 1, restart);
    std::vector<Complex> cs(restart), sn(restart);
    CVec g = CVec::Zero(restart + 1);
    g[0] = beta;
    int m = 0;
    for (; m < restart; ++m) {
      CVec w = op(basis[m]);
      for (int i = 0; i <= m; ++i) {
        H(i, m) = basis[i].dot(w);  // conjugating inner product
        w -= H(i, m) * basis[i];
      }
      H(m + 1, m) = w.norm();
      // Givens updates
      for (int i = 0; i < m; ++i) {
        Complex t = std::conj(cs[i]) * H(i, m) + std::conj(sn[i]) * H(i + 1, m);
        H(i + 1, m) = -sn[i] * H(i, m) + cs[i] * H(i + 1, m);
        H(i, m) = t;
      }
      double denom = std::sqrt(std::norm(H(m, m)) + std::norm(H(m + 1, m)));
      if (denom == 0) break;
      cs[m] = H(m, m) / denom;
      sn[m] = H(m + 1, m) / denom;
      H(m, m) = std::conj(cs[m]) * H(m, m) + std::conj(sn[m]) * H(m + 1, m);
      H(m + 1, m) = 0;
      g[m + 1] = -sn[m] * g[m];
      g[m] = std::conj(cs[m]) * g[m];
      out.iterations++;
      if (std::abs(g[m + 1]) / bnorm < tol) {
        ++m;
        break;
      }
      if (H(m + 1, m) == Complex(0, 0)) break;
      basis.push_back(w / H(m + 1, m));
    }
    CVec y = CVec::Zero(m);
    for (int i = m - 1; i >= 0; --i) {
      Complex s = g[i];
      for (int j = i + 1; j < m; ++j) s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    for (int i = 0; i < m; ++i) out.x += y[i] * basis[i];
    CVec rr = rhs - op(out.x);
    out.residual = rr.norm() / bnorm;
    if (out.residual < tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace dsii
