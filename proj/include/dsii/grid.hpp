#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>

namespace dsii {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

constexpr double kPi = 3.14159265358979323846;

/// Uniform cell-centered grid on the square [-L,L]^2.
///
/// Node (i,j) sits at z = (-L + (i+1/2)h) + i(-L + (j+1/2)h) with h = 2L/N;
/// i indexes the real axis, j the imaginary axis, and the flat index is
/// n = i*N + j. N is even, so no node hits the origin and the node set is
/// symmetric under z -> -z. Every node carries quadrature weight h^2.
class Domain {
 public:
  Domain(double half_width, int points_per_side)
      : half_width_(half_width),
        n_(points_per_side),
        spacing_(2.0 * half_width / points_per_side) {
    if (!(half_width > 0.0)) throw std::invalid_argument("Domain: half_width must be positive");
    if (points_per_side < 2 || points_per_side % 2 != 0)
      throw std::invalid_argument("Domain: points_per_side must be even and >= 2");
    nodes_.resize(size());
    for (int i = 0; i < n_; ++i) {
      double x = -half_width_ + (i + 0.5) * spacing_;
      for (int j = 0; j < n_; ++j) {
        double y = -half_width_ + (j + 0.5) * spacing_;
        nodes_[i * n_ + j] = Complex(x, y);
      }
    }
  }

  double half_width() const { return half_width_; }
  int points_per_side() const { return n_; }
  double spacing() const { return spacing_; }
  double cell_weight() const { return spacing_ * spacing_; }
  int size() const { return n_ * n_; }

  Complex node(int flat) const { return nodes_[flat]; }
  Complex node(int i, int j) const { return nodes_[i * n_ + j]; }
  const CVec& nodes() const { return nodes_; }

  bool same_as(const Domain& other) const {
    return half_width_ == other.half_width_ && n_ == other.n_;
  }

 private:
  double half_width_;
  int n_;
  double spacing_;
  CVec nodes_;
};

using DomainPtr = std::shared_ptr<const Domain>;

inline DomainPtr make_domain(double half_width, int points_per_side) {
  return std::make_shared<const Domain>(half_width, points_per_side);
}

/// Complex samples of a function of z on a Domain, flat-indexed like the grid.
struct GriddedFunction {
  DomainPtr domain;
  CVec values;

  GriddedFunction() = default;
  GriddedFunction(DomainPtr d, CVec v) : domain(std::move(d)), values(std::move(v)) {
    if (values.size() != domain->size())
      throw std::invalid_argument("GriddedFunction: sample count != N^2");
  }

  int size() const { return static_cast<int>(values.size()); }

  bool all_finite() const {
    for (int n = 0; n < values.size(); ++n)
      if (!std::isfinite(values[n].real()) || !std::isfinite(values[n].imag())) return false;
    return true;
  }
};

template <typename F>
GriddedFunction sample(const DomainPtr& d, F&& f) {
  CVec v(d->size());
  for (int n = 0; n < d->size(); ++n) v[n] = f(d->node(n));
  return GriddedFunction(d, std::move(v));
}

/// e_k(z) = exp(i(kz + conj(k) conj(z))); unimodular since the exponent is
/// 2i Re(kz).
inline Complex e_k(Complex k, Complex z) {
  double phase = 2.0 * (k * z).real();
  return Complex(std::cos(phase), std::sin(phase));
}

inline GriddedFunction e_k_sample(Complex k, const DomainPtr& d) {
  return sample(d, [k](Complex z) { return e_k(k, z); });
}

inline double rho(Complex z) { return std::sqrt(1.0 + std::norm(z)); }

inline GriddedFunction rho_sample(const DomainPtr& d) {
  return sample(d, [](Complex z) { return Complex(rho(z), 0.0); });
}

inline Complex integrate(const GriddedFunction& f) {
  return f.values.sum() * f.domain->cell_weight();
}

/// Bilinear dual pairing <f,g> = sum f g h^2 (no conjugation).
inline Complex pair(const GriddedFunction& f, const GriddedFunction& g) {
  if (!f.domain->same_as(*g.domain)) throw std::invalid_argument("pair: domain mismatch");
  return (f.values.array() * g.values.array()).sum() * f.domain->cell_weight();
}

inline double l2_norm(const GriddedFunction& f) {
  return f.values.norm() * f.domain->spacing();
}

/// Relative L2 distance of f from g restricted to |z| <= radius.
inline double interior_rel_error(const GriddedFunction& f, const GriddedFunction& g,
                                 double radius) {
  double num = 0.0, den = 0.0;
  for (int n = 0; n < f.size(); ++n) {
    if (std::abs(f.domain->node(n)) <= radius) {
      num += std::norm(f.values[n] - g.values[n]);
      den += std::norm(g.values[n]);
    }
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// Bilinear pairing completed by the analytic box-complement tail.
///
/// For integrands with a c/|z|^4 far field (every chi_i psi_j product here),
/// fits c on the outermost frame and adds c * int_{R^2 \ box} |z|^-4 dm,
/// which is (1 + pi/2)/L^2 exactly. Removes the O(L^-2) truncation deficit
/// that otherwise floors biorthogonality checks.
inline Complex pair_tail_corrected(const GriddedFunction& f, const GriddedFunction& g) {
  Complex raw = pair(f, g);
  const int N = f.domain->points_per_side();
  Complex c4(0, 0);
  int cnt = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (i == 0 || j == 0 || i == N - 1 || j == N - 1) {
        int n = i * N + j;
        Complex z = f.domain->node(n);
        c4 += f.values[n] * g.values[n] * std::norm(z) * std::norm(z);
        ++cnt;
      }
  c4 /= double(cnt);
  double L = f.domain->half_width();
  return raw + c4 * (1.0 + kPi / 2.0) / (L * L);
}

/// Fraction of |f|^2 mass carried by the outermost cell frame; large values
/// signal that periodized (FFT) transforms will alias.
inline double boundary_mass_fraction(const GriddedFunction& f) {
  const int N = f.domain->points_per_side();
  double frame = 0.0, total = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double m = std::norm(f.values[i * N + j]);
      total += m;
      if (i == 0 || j == 0 || i == N - 1 || j == N - 1) frame += m;
    }
  return total > 0 ? frame / total : 0.0;
}

}  // namespace dsii
