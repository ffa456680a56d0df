#pragma once

#include <optional>

#include "dsii/determinant.hpp"

namespace dsii {

struct CgoSolution {
  Complex k;
  GriddedFunction m1, m2;
  double residual = 0.0;
  bool direct = true;
  int iterations = 0;
};

struct CgoOptions {
  double residual_tol = 1e-10;      // accepted relative residual
  bool force_iterative = false;     // iterative path is default above this N
  int iterative_above_n = 64;
  double exclusion_radius = 0.0;    // NearExceptional within this of a zero
  std::vector<Complex> known_zeros;
};

/// Solves (I - S_{k,u}) m1 = 1 and recovers m2 = -(1/2) e_{-k} Cbar(e_k conj(u) m1).
/// Dense LU by default; restarted GMRES on the FFT applies for large grids,
/// accepted only when its residual meets the dense tolerance.
inline CgoSolution solve_m(Complex k, const GriddedFunction& u, const OperatorAssembler& assembler,
                           const CgoOptions& opts = {}) {
  for (Complex z : opts.known_zeros)
    if (std::abs(k - z) <= opts.exclusion_radius)
      throw NearExceptional("solve_m: k within exclusion radius of detected zero");

  const DomainPtr& d = u.domain;
  CgoSolution sol;
  sol.k = k;
  CVec ones = CVec::Ones(d->size());
  ScatteringApply ap(assembler.transforms(), k, u.values);

  bool iterative = opts.force_iterative || d->points_per_side() > opts.iterative_above_n;
  CVec m1;
  if (!iterative) {
    DenseOperator s = assembler.assemble_s(k, u);
    CMat work = CMat::Identity(d->size(), d->size()) - s.matrix;
    LuDet lu(work);
    if (lu.min_pivot() < 1e-13)
      throw NearExceptional("solve_m: I - S numerically singular");
    m1 = lu.solve(ones);
    sol.direct = true;
  } else {
    auto op = [&](const CVec& x) -> CVec { return x - ap(x); };
    GmresResult g = gmres(op, ones, opts.residual_tol);
    if (!g.converged) throw NoConvergence("solve_m: GMRES stalled");
    m1 = g.x;
    sol.direct = false;
    sol.iterations = g.iterations;
  }
  CVec resid = (m1 - ap(m1)) - ones;
  sol.residual = resid.norm() / ones.norm();
  sol.m1 = GriddedFunction(d, std::move(m1));
  sol.m2 = GriddedFunction(d, ap.m2_from_m1(sol.m1.values));
  return sol;
}

struct ScatteringDatum {
  Complex k;
  Complex s{0, 0};
  Complex r{0, 0};
  Complex s_limit{0, 0};  // boundary-frame cross-check of s via z C[f] -> (1/pi) int f
};

/// s(k) = (1/pi) int u m2; r(k) = -(1/pi) int e_{-k} u conj(m1) with the
/// Filon-midpoint phase rule; s_limit from the boundary frame of z (m1 - 1).
inline ScatteringDatum scattering_data(Complex k, const GriddedFunction& u,
                                       const CgoSolution& sol) {
  ScatteringDatum out;
  out.k = k;
  const DomainPtr& d = u.domain;
  out.s = (u.values.array() * sol.m2.values.array()).sum() * d->cell_weight() / kPi;

  double h = d->spacing();
  auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; };
  Complex acc(0, 0);
  for (int n = 0; n < d->size(); ++n)
    acc += e_k(-k, d->node(n)) * u.values[n] * std::conj(sol.m1.values[n]);
  out.r = -acc * d->cell_weight() * sinc(k.real() * h) * sinc(k.imag() * h) / kPi;

  const int N = d->points_per_side();
  Complex lim(0, 0);
  int cnt = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (i == 0 || j == 0 || i == N - 1 || j == N - 1) {
        int n = i * N + j;
        lim += 2.0 * d->node(n) * (sol.m1.values[n] - 1.0);
        ++cnt;
      }
  out.s_limit = lim / double(cnt);
  return out;
}

struct COfK {
  Complex route_a{0, 0};  // spectral: (1/4pi) int |Fu|^2 / conj(k - zeta)
  Complex route_b{0, 0};  // direct double integral through the Cauchy kernel
};

inline COfK c_of_k(Complex k, const GriddedFunction& u, const Transforms& tr) {
  COfK out;
  {
    Transforms ftr(u.domain);
    CRouteA ra(ftr, u);
    out.route_a = ra.eval(k);
  }
  {
    // c = -(i/4pi) int conj(u)(z) * [conv of u with e_{k}(w)/(pi w)](z) dm(z);
    // the kernel shift -k folds both oscillatory phases away.
    ConvKernel shifted(u.domain, -k, false, tr.config().scheme, tr.config().near_field_exact);
    CVec inner = shifted.apply(u.values);
    Complex acc = (u.values.conjugate().array() * inner.array()).sum() * u.domain->cell_weight();
    out.route_b = Complex(0, -0.25 / kPi) * acc;
  }
  return out;
}

struct DbarResidual {
  Complex fd_dbar_logD{0, 0};
  Complex rhs{0, 0};       // (i/2) conj(s) - c
  double abs_residual = 0.0;
  double rel_residual = 0.0;  // relative to max(|i s/2|, |c|, |fd|)
};

/// Centered finite-difference check of dbar_k log D(k) = (i/2) conj(s(k)) - c(k).
inline DbarResidual dbar_residual(const GriddedFunction& u, Complex k, double step,
                                  const OperatorAssembler& assembler,
                                  const CgoOptions& opts = {}) {
  auto logD = [&](Complex kk) {
    DetValue dv = renormalized_det(assembler.assemble_s(kk, u).matrix);
    if (!dv.finite) throw NearExceptional("dbar_residual: non-finite determinant");
    return Complex(dv.log_abs, dv.arg);
  };
  Complex de = logD(k + step), dw = logD(k - step);
  Complex dn = logD(k + Complex(0, step)), ds = logD(k - Complex(0, step));
  DbarResidual out;
  out.fd_dbar_logD = 0.5 * ((de - dw) / (2 * step) + Complex(0, 1) * (dn - ds) / (2 * step));

  CgoSolution sol = solve_m(k, u, assembler, opts);
  ScatteringDatum sd = scattering_data(k, u, sol);
  COfK c = c_of_k(k, u, assembler.transforms());
  out.rhs = Complex(0, 0.5) * std::conj(sd.s) - c.route_a;
  out.abs_residual = std::abs(out.fd_dbar_logD - out.rhs);
  double scale = std::max({std::abs(0.5 * sd.s), std::abs(c.route_a), std::abs(out.fd_dbar_logD)});
  out.rel_residual = scale > 0 ? out.abs_residual / scale : out.abs_residual;
  return out;
}

}  // namespace dsii
