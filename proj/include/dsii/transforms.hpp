#pragma once

#include <memory>
#include <optional>

#include "dsii/kernels.hpp"

namespace dsii {

struct TransformConfig {
  KernelScheme scheme = KernelScheme::spectral;
  bool near_field_exact = true;
  double boundary_mass_threshold = 1e-2;
};

/// Dense realization of the solid Cauchy transform (or its conjugate) on a
/// grid, quadrature folded in.
struct CauchyMatrix {
  DomainPtr domain;
  CMat matrix;
  bool conjugate;
  KernelScheme scheme;
  bool near_field_exact;
};

/// Cauchy/Beurling/derivative/Fourier transforms bound to one Domain.
///
/// The Cauchy transforms are convolution-table applications (see ConvKernel);
/// the Beurling transform and the complex derivatives act through the
/// periodized Fourier multiplier on the unpadded box and are valid only for
/// samples that are small at the boundary. fourier()/fourier_inv() realize
/// the unitary pair (F f)(k) = (1/pi) int e_{-k} f dm on a cell-centered dual
/// grid with spacing pi/(2L).
class Transforms {
 public:
  explicit Transforms(DomainPtr d, TransformConfig cfg = {}) : d_(std::move(d)), cfg_(cfg) {
    build_derivative_basis();
    build_fourier_basis();
  }

  const DomainPtr& domain() const { return d_; }
  const TransformConfig& config() const { return cfg_; }

  // Kernel tables are built on first use; a Fourier-only instance (large
  // domains for spectral tables of the potential) never pays for them.
  const ConvKernel& cauchy_kernel() const {
    if (!cauchy_)
      cauchy_ = std::make_unique<ConvKernel>(d_, Complex(0, 0), false, cfg_.scheme,
                                             cfg_.near_field_exact);
    return *cauchy_;
  }
  const ConvKernel& cauchy_conj_kernel() const {
    if (!cauchy_conj_)
      cauchy_conj_ = std::make_unique<ConvKernel>(d_, Complex(0, 0), true, cfg_.scheme,
                                                  cfg_.near_field_exact);
    return *cauchy_conj_;
  }

  GriddedFunction cauchy_apply(const GriddedFunction& f) const {
    check(f);
    return GriddedFunction(d_, cauchy_kernel().apply(f.values));
  }

  GriddedFunction cauchy_conj_apply(const GriddedFunction& f) const {
    check(f);
    return GriddedFunction(d_, cauchy_conj_kernel().apply(f.values));
  }

  CauchyMatrix cauchy_matrix(bool conjugate = false) const {
    const ConvKernel& k = conjugate ? cauchy_conj_kernel() : cauchy_kernel();
    return CauchyMatrix{d_, k.dense(), conjugate, cfg_.scheme, cfg_.near_field_exact};
  }

  /// S f with S the Beurling transform: multiplier symbol conj(xi)/xi in the
  /// complexified standard frequency (zero mode nulled), so S(dbar phi) =
  /// d phi for decaying phi.
  GriddedFunction beurling_apply(const GriddedFunction& f) const {
    return multiplier_apply(f, [](Complex xi) {
      double a = std::norm(xi);
      return a == 0.0 ? Complex(0, 0) : std::conj(xi) * std::conj(xi) / a;
    });
  }

  GriddedFunction dbar_apply(const GriddedFunction& f) const {
    return multiplier_apply(f, [](Complex xi) { return Complex(0, 0.5) * xi; });
  }

  GriddedFunction d_apply(const GriddedFunction& f) const {
    return multiplier_apply(f, [](Complex xi) { return Complex(0, 0.5) * std::conj(xi); });
  }

  DomainPtr dual_domain() const { return dual_; }

  /// (F f)(k) on the dual grid. Exactly unitary as a discrete map:
  /// ||F f||_2 (dual quadrature) == ||f||_2 (primal quadrature).
  GriddedFunction fourier(const GriddedFunction& f) const {
    check(f);
    const int N = d_->points_per_side();
    CMat G = unflatten(f.values, N);
    CMat out = (d_->cell_weight() / kPi) * (fx_ * G * fy_.transpose());
    return GriddedFunction(dual_, flatten(out, N));
  }

  GriddedFunction fourier_inv(const GriddedFunction& g) const {
    if (!g.domain->same_as(*dual_)) throw std::invalid_argument("fourier_inv: not on dual grid");
    const int N = d_->points_per_side();
    CMat G = unflatten(g.values, N);
    CMat out = (dual_->cell_weight() / kPi) *
               (fx_.adjoint() * G * fy_.adjoint().transpose());
    return GriddedFunction(d_, flatten(out, N));
  }

  /// True when the most recent multiplier-based transform saw boundary-frame
  /// mass above the configured fraction (aliasing risk).
  bool last_boundary_warning() const { return last_warning_; }

 private:
  void check(const GriddedFunction& f) const {
    if (!f.domain->same_as(*d_)) throw std::invalid_argument("transform: domain mismatch");
  }

  static CMat unflatten(const CVec& v, int N) {
    CMat G(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) G(i, j) = v[i * N + j];
    return G;
  }

  static CVec flatten(const CMat& G, int N) {
    CVec v(N * N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) v[i * N + j] = G(i, j);
    return v;
  }

  void build_derivative_basis() {
    const int N = d_->points_per_side();
    const double L = d_->half_width();
    dx_.resize(N, N);
    xi_.resize(N);
    for (int p = 0; p < N; ++p) xi_[p] = kPi * (p - N / 2) / L;
    for (int p = 0; p < N; ++p)
      for (int a = 0; a < N; ++a) {
        double x = -L + (a + 0.5) * d_->spacing();
        dx_(p, a) = std::polar(1.0, -xi_[p] * x);
      }
  }

  void build_fourier_basis() {
    const int N = d_->points_per_side();
    const double L = d_->half_width();
    const double hk = kPi / (2.0 * L);
    dual_ = make_domain(N * hk / 2.0, N);
    fx_.resize(N, N);
    fy_.resize(N, N);
    for (int p = 0; p < N; ++p) {
      double k1 = -dual_->half_width() + (p + 0.5) * hk;
      for (int a = 0; a < N; ++a) {
        double x = -L + (a + 0.5) * d_->spacing();
        fx_(p, a) = std::polar(1.0, -2.0 * k1 * x);
        fy_(p, a) = std::polar(1.0, +2.0 * k1 * x);  // same node layout in y
      }
    }
  }

  template <typename M>
  GriddedFunction multiplier_apply(const GriddedFunction& f, M&& mult) const {
    check(f);
    last_warning_ = boundary_mass_fraction(f) > cfg_.boundary_mass_threshold;
    const int N = d_->points_per_side();
    CMat coeff = dx_ * unflatten(f.values, N) * dx_.transpose();
    for (int p = 0; p < N; ++p)
      for (int q = 0; q < N; ++q) coeff(p, q) *= mult(Complex(xi_[p], xi_[q]));
    CMat out = (dx_.adjoint() * coeff * dx_.conjugate()) / double(N * N);
    return GriddedFunction(d_, flatten(out, N));
  }

  DomainPtr d_;
  TransformConfig cfg_;
  mutable std::unique_ptr<ConvKernel> cauchy_;
  mutable std::unique_ptr<ConvKernel> cauchy_conj_;
  CMat dx_;
  Eigen::VectorXd xi_;
  DomainPtr dual_;
  CMat fx_, fy_;
  mutable bool last_warning_ = false;
};

}  // namespace dsii
