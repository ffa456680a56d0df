#pragma once

#include <array>
#include <vector>

#include "dsii/operator.hpp"

namespace dsii {

/// Parameters of the algebraically decaying one-soliton family
/// u0(z) = 2 conj(nu0) e_{k0}(z) / (|z + mu0|^2 + |nu0|^2).
struct SolitonParams {
  Complex k0{0.0, 0.0};
  Complex mu0{0.0, 0.0};
  Complex nu0{1.0, 0.0};
};

inline GriddedFunction u0_sample(const SolitonParams& p, const DomainPtr& d) {
  if (p.nu0 == Complex(0, 0)) throw std::invalid_argument("u0_sample: nu0 must be nonzero");
  return sample(d, [&](Complex z) {
    return 2.0 * std::conj(p.nu0) * e_k(p.k0, z) / (std::norm(z + p.mu0) + std::norm(p.nu0));
  });
}

/// Exact CGO solutions of the normalized soliton (mu0 = 0, nu0 = 1):
/// m1 = 1 + i conj(z) rho^{-2}/kappa,  m2 = i rho^{-2} e_{-k0}/kappa.
inline std::pair<GriddedFunction, GriddedFunction> exact_m(Complex kappa, const DomainPtr& d,
                                                           Complex k0 = Complex(0, 0)) {
  if (kappa == Complex(0, 0)) throw std::invalid_argument("exact_m: kappa = 0 is the exceptional point");
  const Complex i(0, 1);
  auto m1 = sample(d, [&](Complex z) { return 1.0 + (i / kappa) * std::conj(z) / (1.0 + std::norm(z)); });
  auto m2 = sample(d, [&](Complex z) { return (i / kappa) * e_k(-k0, z) / (1.0 + std::norm(z)); });
  return {std::move(m1), std::move(m2)};
}

inline Complex exact_s(Complex kappa) {
  if (kappa == Complex(0, 0)) throw std::invalid_argument("exact_s: kappa = 0");
  return Complex(0, 2) / kappa;
}

/// Scalar eigenbasis of T(0) and its dual basis under the bilinear pairing:
/// psi1 = conj(z) rho^-2, psi2 = rho^-2, chi1 = (2/pi) z rho^-4,
/// chi2 = (2/pi) rho^-4. Also exposes the L^2-normalized vector pair
/// Psi_i = pi^{-1/2} rho^-3 (conj(z),1)^T / (1,-z)^T for the matrix problem.
struct Eigenbasis {
  GriddedFunction psi1, psi2, chi1, chi2;
  std::array<GriddedFunction, 2> vector_psi1, vector_psi2;
};

inline Eigenbasis eigenbasis(const DomainPtr& d) {
  Eigenbasis b;
  b.psi1 = sample(d, [](Complex z) { return std::conj(z) / (1.0 + std::norm(z)); });
  b.psi2 = sample(d, [](Complex z) { return Complex(1.0, 0) / (1.0 + std::norm(z)); });
  b.chi1 = sample(d, [](Complex z) { return (2.0 / kPi) * z / std::pow(1.0 + std::norm(z), 2); });
  b.chi2 = sample(d, [](Complex z) { return (2.0 / kPi) / std::pow(1.0 + std::norm(z), 2); });
  const double c = 1.0 / std::sqrt(kPi);
  auto r3 = [](Complex z) { return std::pow(1.0 + std::norm(z), -1.5); };
  b.vector_psi1 = {sample(d, [&](Complex z) { return c * r3(z) * std::conj(z); }),
                   sample(d, [&](Complex z) { return Complex(c * r3(z), 0); })};
  b.vector_psi2 = {sample(d, [&](Complex z) { return Complex(c * r3(z), 0); }),
                   sample(d, [&](Complex z) { return -c * r3(z) * z; })};
  return b;
}

/// 2x2 reduced matrix M_ij = <chi_i, T(kappa) psi_j> through the assembled
/// operator applied matrix-free (pairings of smooth functions; no dense
/// matrix needed).
inline Eigen::Matrix2cd reduced_matrix(Complex kappa, const Transforms& tr,
                                       const SolitonParams& p = {}) {
  if (std::abs(kappa) > 1.0) throw std::invalid_argument("reduced_matrix: |kappa| <= 1");
  const DomainPtr& d = tr.domain();
  GriddedFunction u0 = u0_sample(p, d);
  ScatteringApply t(tr, p.k0 + kappa, u0.values);
  Eigenbasis b = eigenbasis(d);
  Eigen::Matrix2cd m;
  GriddedFunction tpsi1(d, t(b.psi1.values)), tpsi2(d, t(b.psi2.values));
  m(0, 0) = pair(b.chi1, tpsi1);
  m(0, 1) = pair(b.chi1, tpsi2);
  m(1, 0) = pair(b.chi2, tpsi1);
  m(1, 1) = pair(b.chi2, tpsi2);
  return m;
}

/// Radial determinant model: Delta(kappa) = H(|kappa|^2) with
/// d/dt log H = 1/t - h(t), H(inf) = 1, h(t) = Re(conj(kappa) gamma(kappa))/t
/// at |kappa|^2 = t, gamma evaluated by the route-A spectral quadrature of
/// c(k) on a dedicated wide Fourier domain.
struct RadialDetModel {
  std::vector<double> t, h, H;
  double c = 0.0;      // leading coefficient of H(t) = c t exp(-int_0^t h)
  double t_min = 0.0;  // smallest reliable t of the quadrature
};

struct RadialModelConfig {
  double fourier_half_width = 160.0;
  int fourier_points = 640;
  double t_min = 4e-4;
};

/// Route-A evaluator: c(k) = (1/4pi) int |Fu(zeta)|^2 / (conj(k - zeta)) dm,
/// with exact cell integrals for the near-singular dual cells.
class CRouteA {
 public:
  CRouteA(const Transforms& tr, const GriddedFunction& u) : fu2_(tr.fourier(u)) {
    for (int n = 0; n < fu2_.size(); ++n) fu2_.values[n] = std::norm(fu2_.values[n]);
  }
  explicit CRouteA(GriddedFunction fu_abs2) : fu2_(std::move(fu_abs2)) {}

  Complex eval(Complex k) const {
    const DomainPtr& dd = fu2_.domain;
    const double hk = dd->spacing();
    Complex acc(0, 0);
    for (int n = 0; n < fu2_.size(); ++n) {
      Complex delta = k - dd->node(n);
      Complex w;
      if (std::abs(delta.real()) <= 2.5 * hk && std::abs(delta.imag()) <= 2.5 * hk)
        w = std::conj(kPi * cauchy_cell_integral(delta, hk));
      else
        w = hk * hk / std::conj(delta);
      acc += fu2_.values[n].real() * w;
    }
    return acc / (4.0 * kPi);
  }

  const GriddedFunction& table() const { return fu2_; }

 private:
  GriddedFunction fu2_;
};

inline RadialDetModel radial_det_model(double t_max, int n_t, const SolitonParams& p = {},
                                       const RadialModelConfig& cfg = {}) {
  if (!(t_max > 1.0)) throw std::invalid_argument("radial_det_model: T_max must exceed 1");
  // |Fu0|^2 on a wide, fine dual grid; spatial resolution stays ~0.5 so the
  // potential is well sampled while the dual spacing pi/(2 L_F) resolves the
  // log^2 peak of |Fu0|^2 down to t_min.
  auto big = make_domain(cfg.fourier_half_width, cfg.fourier_points);
  Transforms ftr(big);
  CRouteA gamma(ftr, u0_sample(p, big));

  RadialDetModel model;
  model.t_min = cfg.t_min;
  model.t.resize(n_t);
  model.h.resize(n_t);
  model.H.resize(n_t);
  const double lg0 = std::log(cfg.t_min), lg1 = std::log(t_max);
  for (int i = 0; i < n_t; ++i) model.t[i] = std::exp(lg0 + (lg1 - lg0) * i / (n_t - 1));
  for (int i = 0; i < n_t; ++i) {
    double t = model.t[i];
    Complex kappa = std::sqrt(t);
    Complex g = gamma.eval(p.k0 + kappa);
    model.h[i] = (std::conj(kappa) * g).real() / t;
    if (!std::isfinite(model.h[i])) throw std::runtime_error("radial_det_model: quadrature failure");
  }
  // integrate d/dt log H = 1/t - h backward from H(T_max) = 1
  model.H[n_t - 1] = 1.0;
  double logH = 0.0;
  for (int i = n_t - 2; i >= 0; --i) {
    double g0 = 1.0 / model.t[i] - model.h[i];
    double g1 = 1.0 / model.t[i + 1] - model.h[i + 1];
    logH -= 0.5 * (g0 + g1) * (model.t[i + 1] - model.t[i]);
    model.H[i] = std::exp(logH);
  }
  // c = exp(int_0^1 h - int_1^inf (1/t - h)); grid part by trapezoid, the
  // [0, t_min) head from a (p - q log t)^2 fit to the smallest samples.
  double head = 0.0;
  {
    double s0 = std::sqrt(model.h[0]), s1 = std::sqrt(model.h[1]);
    double q = -(s1 - s0) / (std::log(model.t[1]) - std::log(model.t[0]));
    double pfit = s0 + q * std::log(model.t[0]);
    double s = cfg.t_min, ls = std::log(s);
    head = pfit * pfit * s - 2.0 * pfit * q * (s * ls - s) + q * q * (s * ls * ls - 2 * s * ls + 2 * s);
  }
  double int_h_01 = head, int_tail = 0.0;
  for (int i = 0; i + 1 < n_t; ++i) {
    double t0 = model.t[i], t1 = model.t[i + 1];
    auto seg = [&](auto f) { return 0.5 * (f(i) + f(i + 1)) * (t1 - t0); };
    if (t1 <= 1.0)
      int_h_01 += seg([&](int j) { return model.h[j]; });
    else if (t0 >= 1.0)
      int_tail += seg([&](int j) { return 1.0 / model.t[j] - model.h[j]; });
    else {
      // split the straddling segment at t = 1
      double f0 = model.h[i], f1 = model.h[i + 1];
      double w = (1.0 - t0) / (t1 - t0);
      double fmid = f0 + (f1 - f0) * w;
      int_h_01 += 0.5 * (f0 + fmid) * (1.0 - t0);
      int_tail += 0.5 * ((1.0 / 1.0 - fmid) + (1.0 / t1 - f1)) * (t1 - 1.0);
    }
  }
  model.c = std::exp(int_h_01 - int_tail);
  return model;
}

}  // namespace dsii
