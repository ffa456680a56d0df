#pragma once

#include <cmath>
#include <complex>

#include "dsii/fft.hpp"
#include "dsii/grid.hpp"

namespace dsii {

enum class KernelScheme { spectral, midpoint };

/// Exact integral of 1/(pi (Delta - s)) over the square |Re s|,|Im s| <= h/2,
/// for Delta outside the closed cell (contour form; each edge integrates to
/// logs whose principal branches are valid off the cell). Delta = 0 returns 0
/// by the odd symmetry of the centered cell.
inline Complex cauchy_cell_integral(Complex delta, double h) {
  if (delta == Complex(0.0, 0.0)) return {0.0, 0.0};
  const Complex i(0.0, 1.0);
  Complex c1 = delta + i * (h / 2);
  Complex bottom = -h + (c1 + i * (h / 2)) * std::log((c1 + h / 2) / (c1 - h / 2));
  Complex c2 = delta - h / 2;
  Complex right = i * h + i * (h / 2 - c2) * (i * std::log((c2 - i * (h / 2)) / (c2 + i * (h / 2))));
  Complex c3 = delta - i * (h / 2);
  Complex top = h - (c3 - i * (h / 2)) * std::log((c3 + h / 2) / (c3 - h / 2));
  Complex c4 = delta + h / 2;
  Complex left = -i * h - (c4 + h / 2) * std::log((c4 - i * (h / 2)) / (c4 + i * (h / 2)));
  return (bottom + right + top + left) / (Complex(0.0, 2.0) * kPi);
}

/// Translation-invariant discretization of a Cauchy-type convolution.
///
/// conjugate=false: kernel e_{-shift}(w)/(pi w), the solid Cauchy transform
/// (inverts dbar) modulated by the folded phase; Fourier symbol
/// 1/(i conj(kappa + shift)).
/// conjugate=true: kernel e_{-shift}(w)/(pi conj(w)) (inverts d); symbol
/// 1/(i (kappa + shift)).
///
/// The spectral scheme builds the effective offset table from the truncated
/// (Vico-Greengard) symbol on a 4N-padded grid, so the table reproduces the
/// free-space convolution for sources and targets inside the box with no
/// periodic-image error. The midpoint scheme is the classical punctured
/// Nystrom table h^2 k(dz) with zero diagonal and, optionally, exact cell
/// integrals within a 2-cell radius; it supports shift = 0 only (phases are
/// applied as diagonal factors by the legacy assembly path).
class ConvKernel {
 public:
  ConvKernel(DomainPtr d, Complex shift, bool conjugate, KernelScheme scheme,
             bool near_field_exact = true)
      : domain_(std::move(d)),
        shift_(shift),
        conjugate_(conjugate),
        scheme_(scheme),
        near_field_exact_(near_field_exact) {
    const int N = domain_->points_per_side();
    pad_ = 4 * N;
    if (scheme_ == KernelScheme::spectral) {
      build_symbol();
      build_table_from_symbol();
    } else {
      if (shift_ != Complex(0.0, 0.0))
        throw std::invalid_argument("midpoint kernel does not support a phase shift");
      build_midpoint_table();
      build_symbol_from_table();
    }
  }

  const DomainPtr& domain() const { return domain_; }
  Complex shift() const { return shift_; }
  bool conjugate() const { return conjugate_; }
  KernelScheme scheme() const { return scheme_; }
  bool near_field_exact() const { return near_field_exact_; }

  /// Offset table entry for target-minus-source offset (di, dj).
  Complex table(int di, int dj) const {
    const int N = domain_->points_per_side();
    return table_(di + N - 1, dj + N - 1);
  }

  /// Fast path: apply the convolution to flat grid samples.
  CVec apply(const CVec& f) const {
    const int N = domain_->points_per_side();
    CMat buf = CMat::Zero(pad_, pad_);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) buf(i, j) = f[i * N + j];
    Fft2D::forward(buf);
    buf.array() *= symbol_.array();
    Fft2D::inverse(buf);
    CVec out(N * N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) out[i * N + j] = buf(i, j);
    return out;
  }

  /// Dense matrix realization; rows index targets, columns sources
  /// (quadrature weights folded in).
  CMat dense() const {
    const int N = domain_->points_per_side();
    const int M = N * N;
    CMat A(M, M);
    for (int im = 0; im < N; ++im)
      for (int jm = 0; jm < N; ++jm) {
        const int m = im * N + jm;
        for (int in = 0; in < N; ++in) {
          const int base = (in - im) + N - 1;
          for (int jn = 0; jn < N; ++jn) A(in * N + jn, m) = table_(base, (jn - jm) + N - 1);
        }
      }
    return A;
  }

 private:
  void build_symbol() {
    const int P = pad_;
    const double h = domain_->spacing();
    const double truncation = 2.0 * std::sqrt(2.0) * domain_->half_width() + 4.0 * h;
    symbol_.resize(P, P);
    auto freq = [&](int p) {
      int q = (p <= P / 2) ? p : p - P;
      return 2.0 * kPi * q / (P * h);
    };
    for (int pi = 0; pi < P; ++pi) {
      for (int pj = 0; pj < P; ++pj) {
        // The Nyquist row has no negative-frequency partner; dropping it keeps
        // the table exactly conjugation-symmetric (Cbar = conj(C)).
        if (pi == P / 2 || pj == P / 2) {
          symbol_(pi, pj) = 0.0;
          continue;
        }
        double xi1 = freq(pi), xi2 = freq(pj);
        // paper-frequency k of the plane wave exp(i(xi1 x + xi2 y))
        Complex kpap(0.5 * xi1, -0.5 * xi2);
        Complex arg = conjugate_ ? (kpap + shift_) : std::conj(kpap + shift_);
        double a = std::abs(arg);
        if (a < 1e-14) {
          symbol_(pi, pj) = 0.0;
        } else {
          symbol_(pi, pj) = (1.0 - std::cyl_bessel_j(0, 2.0 * truncation * a)) /
                            (Complex(0.0, 1.0) * arg);
        }
      }
    }
  }

  void build_table_from_symbol() {
    const int N = domain_->points_per_side();
    CMat buf = CMat::Zero(pad_, pad_);
    buf(0, 0) = 1.0;
    Fft2D::forward(buf);
    buf.array() *= symbol_.array();
    Fft2D::inverse(buf);
    table_.resize(2 * N - 1, 2 * N - 1);
    for (int di = -(N - 1); di <= N - 1; ++di)
      for (int dj = -(N - 1); dj <= N - 1; ++dj)
        table_(di + N - 1, dj + N - 1) = buf((di % pad_ + pad_) % pad_, (dj % pad_ + pad_) % pad_);
  }

  void build_midpoint_table() {
    const int N = domain_->points_per_side();
    const double h = domain_->spacing();
    table_.resize(2 * N - 1, 2 * N - 1);
    for (int di = -(N - 1); di <= N - 1; ++di)
      for (int dj = -(N - 1); dj <= N - 1; ++dj) {
        Complex dz(di * h, dj * h);
        Complex v = (di == 0 && dj == 0) ? Complex(0, 0) : h * h / (kPi * dz);
        if (near_field_exact_ && std::abs(di) <= 2 && std::abs(dj) <= 2)
          v = cauchy_cell_integral(dz, h);
        table_(di + N - 1, dj + N - 1) = conjugate_ ? std::conj(v) : v;
      }
  }

  void build_symbol_from_table() {
    CMat buf = CMat::Zero(pad_, pad_);
    const int N = domain_->points_per_side();
    for (int di = -(N - 1); di <= N - 1; ++di)
      for (int dj = -(N - 1); dj <= N - 1; ++dj)
        buf((di % pad_ + pad_) % pad_, (dj % pad_ + pad_) % pad_) = table_(di + N - 1, dj + N - 1);
    Fft2D::forward(buf);
    symbol_ = buf;
  }

  DomainPtr domain_;
  Complex shift_;
  bool conjugate_;
  KernelScheme scheme_;
  bool near_field_exact_;
  int pad_;
  CMat symbol_;
  CMat table_;
};

}  // namespace dsii
