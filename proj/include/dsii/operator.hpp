#pragma once

#include <string>
#include <utility>

#include "dsii/linalg.hpp"
#include "dsii/transforms.hpp"

namespace dsii {

/// Dense matrix realization of an integral operator on grid samples,
/// quadrature weights folded in, tagged with its spectral parameter.
struct DenseOperator {
  DomainPtr domain;
  CMat matrix;
  Complex k;
  std::string label;

  CVec apply(const GriddedFunction& f) const {
    if (!f.domain->same_as(*domain)) throw std::invalid_argument("DenseOperator: domain mismatch");
    return matrix * f.values;
  }
};

/// Admissible exponent pair of the determinant theory: p > 2, t in (1,2),
/// 1/2 + 1/p < 1/t and 1/p + 1/t > 1 (both strict).
inline bool is_admissible(double p, double t) {
  if (!(p > 0) || !(t > 0)) return false;
  if (!(p > 2.0) || !(t > 1.0) || !(t < 2.0)) return false;
  return (0.5 + 1.0 / p < 1.0 / t) && (1.0 / p + 1.0 / t > 1.0);
}

struct AdmissiblePair {
  double p, t;
  AdmissiblePair(double p_, double t_) : p(p_), t(t_) {
    if (!is_admissible(p, t)) throw std::invalid_argument("not an admissible pair");
  }
  double p_conj() const { return p / (p - 1.0); }
  double t_conj() const { return t / (t - 1.0); }
};

/// Matrix-free application of S_{k,u} through the convolution kernels; used
/// by the iterative CGO path and by pairing-based reductions.
class ScatteringApply {
 public:
  ScatteringApply(const Transforms& tr, Complex k, CVec u)
      : tr_(&tr),
        k_(k),
        u_(std::move(u)),
        shifted_(tr.domain(), k, true, tr.config().scheme, tr.config().near_field_exact) {}

  Complex k() const { return k_; }
  const ConvKernel& shifted_kernel() const { return shifted_; }

  /// y = S_{k,u} x = -(1/4) C( u * Kbar_k( conj(u) * x ) ). All oscillatory
  /// phases are folded into the shifted kernel, never sampled as diagonals.
  CVec operator()(const CVec& x) const {
    CVec inner = shifted_.apply(u_.conjugate().cwiseProduct(x));
    return -0.25 * tr_->cauchy_kernel().apply(u_.cwiseProduct(inner));
  }

  /// m2 companion map: m2 = -(1/2) e_{-k} Cbar(e_k conj(u) m1), phase-folded.
  CVec m2_from_m1(const CVec& m1) const {
    return -0.5 * shifted_.apply(u_.conjugate().cwiseProduct(m1));
  }

 private:
  const Transforms* tr_;
  Complex k_;
  CVec u_;
  ConvKernel shifted_;
};

/// Assembles the scattering operators densely. A Transforms instance is held
/// for the kernel tables; the dense solid-Cauchy matrix is cached since it is
/// k-independent.
class OperatorAssembler {
 public:
  explicit OperatorAssembler(std::shared_ptr<const Transforms> tr) : tr_(std::move(tr)) {}

  const Transforms& transforms() const { return *tr_; }
  const DomainPtr& domain() const { return tr_->domain(); }

  /// Builds the lazy caches up front so parallel scans hit them read-only.
  void warm_caches() const {
    tr_->cauchy_kernel();
    if (domain()->size() <= kDenseGemmLimit && cauchy_dense_.size() == 0)
      cauchy_dense_ = tr_->cauchy_kernel().dense();
  }

  /// S_{k,u} = -(1/4) C diag(u) Kbar_k diag(conj u). The sign makes
  /// (I - S_{k,u}) m1 = 1 the CGO equation; see the radial positivity
  /// conjugation rho^{-1} S rho = B^* B.
  DenseOperator assemble_s(Complex k, const GriddedFunction& u, std::string label = "S") const {
    check(u);
    ConvKernel shifted(domain(), k, true, tr_->config().scheme, tr_->config().near_field_exact);
    CMat x = shifted.dense();
    scale_rows_cols(x, u.values);
    return DenseOperator{domain(), product_with_cauchy(x), k, std::move(label)};
  }

  /// Factorization S = W * V with W = -(1/2) C diag(u e_{-k}) and
  /// V = (1/2) diag(e_k) Kbar_k diag(conj u); the diagonal phases cancel in
  /// the product so this matches assemble_s entrywise.
  std::pair<CMat, CMat> assemble_w_v(Complex k, const GriddedFunction& u) const {
    check(u);
    const int M = domain()->size();
    CVec phase(M);
    for (int n = 0; n < M; ++n) phase[n] = e_k(k, domain()->node(n));
    ConvKernel shifted(domain(), k, true, tr_->config().scheme, tr_->config().near_field_exact);
    CMat w = tr_->cauchy_kernel().dense();
    for (int m = 0; m < M; ++m)
      w.col(m) *= -0.5 * u.values[m] * std::conj(phase[m]);
    CMat v = shifted.dense();
    for (int m = 0; m < M; ++m) v.col(m) *= 0.5 * std::conj(u.values[m]);
    for (int n = 0; n < M; ++n) v.row(n) *= phase[n];
    return {std::move(w), std::move(v)};
  }

  /// Spec-conformant legacy assembly: midpoint CauchyMatrix products with the
  /// oscillatory phases as diagonal factors. Kept for the conformance tests;
  /// badly aliased for |k| h of order one.
  DenseOperator assemble_s_legacy(Complex k, const GriddedFunction& u) const {
    check(u);
    ConvKernel cm(domain(), Complex(0, 0), false, KernelScheme::midpoint,
                  tr_->config().near_field_exact);
    ConvKernel cbm(domain(), Complex(0, 0), true, KernelScheme::midpoint,
                   tr_->config().near_field_exact);
    const int M = domain()->size();
    CMat a = cm.dense(), b = cbm.dense();
    for (int m = 0; m < M; ++m) {
      Complex ph = e_k(k, domain()->node(m));
      a.col(m) *= u.values[m] * std::conj(ph);
      b.col(m) *= ph * std::conj(u.values[m]);
    }
    return DenseOperator{domain(), CMat(-0.25 * (a * b)), k, "S_legacy"};
  }

 private:
  void check(const GriddedFunction& u) const {
    if (!u.domain->same_as(*domain())) throw std::invalid_argument("assemble: domain mismatch");
  }

  void scale_rows_cols(CMat& x, const CVec& u) const {
    const int M = static_cast<int>(x.rows());
    for (int m = 0; m < M; ++m) x.col(m) *= std::conj(u[m]);
    for (int n = 0; n < M; ++n) x.row(n) *= u[n];
  }

  /// -(1/4) C * X. Uses the cached dense C when it fits in memory, otherwise
  /// streams column convolutions through the FFT kernel.
  CMat product_with_cauchy(CMat& x) const {
    const int M = domain()->size();
    if (M <= kDenseGemmLimit) {
      if (cauchy_dense_.size() == 0) cauchy_dense_ = tr_->cauchy_kernel().dense();
      return CMat(-0.25 * (cauchy_dense_ * x));
    }
    CMat s(M, M);
    for (int m = 0; m < M; ++m) s.col(m) = -0.25 * tr_->cauchy_kernel().apply(x.col(m));
    return s;
  }

  static constexpr int kDenseGemmLimit = 5000;

  std::shared_ptr<const Transforms> tr_;
  mutable CMat cauchy_dense_;
};

/// Discrete mixed norm ||a||_{L^p(L^q)} of the operator's point kernel
/// (quadrature weights unfolded before norming).
inline double mixed_norm(const DenseOperator& op, double outer_p, double inner_q) {
  if (outer_p < 1.0 || inner_q < 1.0) throw std::invalid_argument("mixed_norm: p,q >= 1");
  const double w = op.domain->cell_weight();
  const int M = op.domain->size();
  double outer = 0.0;
  for (int n = 0; n < M; ++n) {
    double inner = 0.0;
    for (int m = 0; m < M; ++m) inner += std::pow(std::abs(op.matrix(n, m)) / w, inner_q) * w;
    outer += std::pow(inner, outer_p / inner_q) * w;
  }
  return std::pow(outer, 1.0 / outer_p);
}

/// Same norm for the conjugate-transposed kernel a*(z,w) = conj(a(w,z)).
inline double mixed_norm_star(const DenseOperator& op, double outer_p, double inner_q) {
  DenseOperator star{op.domain, op.matrix.adjoint(), op.k, op.label + "*"};
  return mixed_norm(star, outer_p, inner_q);
}

}  // namespace dsii
