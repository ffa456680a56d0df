#include <catch2/catch_amalgamated.hpp>
#include <Eigen/Eigenvalues>

#include "dsii/operator.hpp"
#include "dsii/runtime.hpp"
#include "dsii/soliton.hpp"

using namespace dsii;
using Catch::Approx;

namespace {
struct RuntimeInit {
  RuntimeInit() { init_runtime(1); }
} runtime_init;

std::shared_ptr<OperatorAssembler> assembler_for(double L, int N) {
  auto tr = std::make_shared<Transforms>(make_domain(L, N));
  return std::make_shared<OperatorAssembler>(tr);
}
}  // namespace

TEST_CASE("assemble_s basics") {
  auto as = assembler_for(20.0, 24);
  auto d = as->domain();
  GriddedFunction zero(d, CVec::Zero(d->size()));
  REQUIRE(as->assemble_s(Complex(0.3, 0.1), zero).matrix.norm() == 0.0);

  // bilinearity in u: S(2u) = 4 S(u)
  auto u = u0_sample({}, d);
  GriddedFunction u2(d, 2.0 * u.values);
  CMat s1 = as->assemble_s(Complex(0.2, -0.4), u).matrix;
  CMat s2 = as->assemble_s(Complex(0.2, -0.4), u2).matrix;
  REQUIRE((s2 - 4.0 * s1).norm() / s1.norm() < 1e-12);
}

TEST_CASE("factorization S = W V") {
  auto as = assembler_for(20.0, 16);
  auto d = as->domain();
  auto u = u0_sample({}, d);
  Complex k(0.7, -0.2);
  auto [w, v] = as->assemble_w_v(k, u);
  CMat s = as->assemble_s(k, u).matrix;
  REQUIRE((s - w * v).norm() / s.norm() < 1e-12);
}

TEST_CASE("soliton eigenstructure at production resolution") {
  auto as = assembler_for(20.0, 48);
  auto d = as->domain();
  auto u0 = u0_sample({}, d);
  CMat t0 = as->assemble_s(Complex(0, 0), u0).matrix;

  // Hermitian conjugacy: rho^-1 T(0) rho is Hermitian PSD up to tiny asymmetry
  CVec r(d->size());
  for (int n = 0; n < d->size(); ++n) r[n] = rho(d->node(n));
  CMat tsh = r.cwiseInverse().asDiagonal() * t0 * r.asDiagonal();
  double asym = (tsh - tsh.adjoint()).norm() / tsh.norm();
  REQUIRE(asym < 1e-8);

  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (tsh + tsh.adjoint()),
                                         Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  REQUIRE(ev.minCoeff() > -1e-10);  // positive semidefinite
  int within = 0;
  double third = 0.0;
  std::vector<double> sorted(ev.data(), ev.data() + ev.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (double l : sorted)
    if (std::abs(l - 1.0) < 0.05) ++within;
  REQUIRE(within == 2);
  third = sorted[2];
  REQUIRE(std::abs(third - 1.0) > 0.2);

  // eigenvalue 1 has the psi eigenvectors; spectral-scheme residuals
  Eigenbasis b = eigenbasis(d);
  REQUIRE((t0 * b.psi1.values - b.psi1.values).norm() / b.psi1.values.norm() < 0.02);
  // psi2's residual is dominated by the L = 20 box truncation of C[z rho^-4]
  // (a constant offset of mass (1/pi) int_out rho^-4 ~ 2.05e-3/unit), which
  // no grid refinement removes; see the convergence study in the acceptance
  // report.
  REQUIRE((t0 * b.psi2.values - b.psi2.values).norm() / b.psi2.values.norm() < 0.055);

  // dual eigenbasis of the transpose under the bilinear pairing
  REQUIRE((t0.transpose() * b.chi1.values - b.chi1.values).norm() / b.chi1.values.norm() < 0.08);
  REQUIRE((t0.transpose() * b.chi2.values - b.chi2.values).norm() / b.chi2.values.norm() < 0.03);
}

TEST_CASE("rotation covariance of the spectrum") {
  auto as = assembler_for(16.0, 32);
  auto d = as->domain();
  auto u0 = u0_sample({}, d);
  Complex kap(0.8, 0.3);
  Complex kap_rot = kap * std::polar(1.0, kPi / 3.0);
  Eigen::ComplexEigenSolver<CMat> e1(as->assemble_s(kap, u0).matrix, false);
  Eigen::ComplexEigenSolver<CMat> e2(as->assemble_s(kap_rot, u0).matrix, false);
  std::vector<double> m1, m2;
  for (Eigen::Index i = 0; i < e1.eigenvalues().size(); ++i) {
    m1.push_back(std::abs(e1.eigenvalues()[i]));
    m2.push_back(std::abs(e2.eigenvalues()[i]));
  }
  std::sort(m1.rbegin(), m1.rend());
  std::sort(m2.rbegin(), m2.rend());
  for (int i = 0; i < 8; ++i)
    REQUIRE(m1[i] == Approx(m2[i]).margin(0.04 * m1[0]));
}

TEST_CASE("perturbed operator blocks") {
  auto as = assembler_for(20.0, 24);
  auto d = as->domain();
  SolitonParams params;
  auto u0 = u0_sample(params, d);
  auto phi = sample(d, [](Complex z) { return (1.0 - std::norm(z)) * std::exp(-std::norm(z)); });
  Complex kap(0.1, -0.05);

  // eps = 0 collapses to T(kappa)
  GriddedFunction ue0(d, u0.values + 0.0 * phi.values);
  REQUIRE((as->assemble_s(kap, ue0).matrix - as->assemble_s(kap, u0).matrix).norm() == 0.0);

  // exact three-block split by bilinearity
  double eps = 0.07;
  GriddedFunction ue(d, u0.values + eps * phi.values);
  CMat direct = as->assemble_s(kap, ue).matrix;
  CMat b0 = as->assemble_s(kap, u0).matrix;
  CMat b2 = as->assemble_s(kap, phi).matrix;
  // cross block from polarization: S(u0+phi) - S(u0) - S(phi)
  GriddedFunction usum(d, u0.values + phi.values);
  CMat b1 = as->assemble_s(kap, usum).matrix - b0 - b2;
  CMat recon = b0 + eps * b1 + eps * eps * b2;
  REQUIRE((direct - recon).norm() / direct.norm() < 1e-12);

  // operator-norm deviation ||T(k,eps) - T(k,0)|| <= K eps with stable K
  std::vector<double> ks;
  for (double e : {1e-3, 1e-2, 1e-1}) {
    GriddedFunction uee(d, u0.values + e * phi.values);
    double dev = largest_singular_value(as->assemble_s(kap, uee).matrix - b0);
    ks.push_back(dev / e);
  }
  REQUIRE(ks[1] / ks[0] == Approx(1.0).margin(0.1));
  REQUIRE(ks[2] / ks[0] == Approx(1.0).margin(0.35));

  // boundary-touching phi rejected by the perturbation pipeline
  auto bad = sample(d, [](Complex) { return Complex(1.0, 0.0); });
  REQUIRE(boundary_mass_fraction(bad) > 0.0);
}

TEST_CASE("admissible pairs") {
  REQUIRE(is_admissible(5.0, 20.0 / 17.0));
  REQUIRE_FALSE(is_admissible(3.0, 1.5));
  REQUIRE_FALSE(is_admissible(8.0, 8.0 / 7.0));  // boundary 1/p + 1/t = 1
  REQUIRE_FALSE(is_admissible(2.0, 1.2));
  REQUIRE_FALSE(is_admissible(4.0, 1.0));
  AdmissiblePair ap(4.0, 1.2);
  REQUIRE(ap.t_conj() == Approx(6.0));
  REQUIRE(ap.p_conj() == Approx(4.0 / 3.0));
  REQUIRE_THROWS_AS(AdmissiblePair(3.0, 1.5), std::invalid_argument);
}

TEST_CASE("mixed norms") {
  auto as = assembler_for(10.0, 16);
  auto d = as->domain();
  // separable kernel f(z) g(w): mixed norm factorizes
  auto f = sample(d, [](Complex z) { return std::exp(-0.3 * std::norm(z)) * (1.0 + 0.2 * z); });
  auto g = sample(d, [](Complex z) { return 1.0 / (2.0 + z.real() * z.real() + std::norm(z)); });
  const double w = d->cell_weight();
  CMat kern(d->size(), d->size());
  for (int n = 0; n < d->size(); ++n)
    for (int m = 0; m < d->size(); ++m) kern(n, m) = f.values[n] * g.values[m] * w;  // weights folded
  DenseOperator op{d, kern, Complex(0, 0), "sep"};
  double p = 4.0, q = 4.0 / 3.0;
  double normf = std::pow((f.values.array().abs().pow(p) * w).sum(), 1.0 / p);
  double normg = std::pow((g.values.array().abs().pow(q) * w).sum(), 1.0 / q);
  REQUIRE(mixed_norm(op, p, q) == Approx(normf * normg).epsilon(1e-8));
  // a*(z,w) = conj(g(z)) conj(f(w)): ||a*||_{L^q(L^p)} = ||g||_q ||f||_p,
  // numerically the same product as the direct norm
  REQUIRE(mixed_norm_star(op, q, p) == Approx(normf * normg).epsilon(1e-8));
}

TEST_CASE("soliton kernel norms: finiteness, decay, <k>^-1 law") {
  auto as = assembler_for(20.0, 32);
  auto d = as->domain();
  auto u0 = u0_sample({}, d);
  DenseOperator s0 = as->assemble_s(Complex(0, 0), u0);
  double n0 = mixed_norm(s0, 4.0, 4.0 / 3.0);
  double n0s = mixed_norm_star(s0, 4.0 / 3.0, 4.0);
  REQUIRE(std::isfinite(n0));
  REQUIRE(std::isfinite(n0s));
  DenseOperator s20 = as->assemble_s(Complex(20, 0), u0);
  REQUIRE(mixed_norm(s20, 4.0, 4.0 / 3.0) < n0 / 3.0);

  // largest singular value decays like <k>^-1: |k| sigma within factor 3
  std::vector<double> prods;
  for (double k : {5.0, 10.0, 20.0}) {
    double s = largest_singular_value(as->assemble_s(Complex(k, 0), u0).matrix);
    prods.push_back(k * s);
  }
  double lo = *std::min_element(prods.begin(), prods.end());
  double hi = *std::max_element(prods.begin(), prods.end());
  REQUIRE(hi / lo < 3.0);
  // and the norms themselves decrease
  double s5 = largest_singular_value(as->assemble_s(Complex(5, 0), u0).matrix);
  double s10 = largest_singular_value(as->assemble_s(Complex(10, 0), u0).matrix);
  double s20v = largest_singular_value(s20.matrix);
  REQUIRE(s5 > s10);
  REQUIRE(s10 > s20v);
}

TEST_CASE("T(kappa) does not depend on k0") {
  auto as = assembler_for(20.0, 48);
  auto d = as->domain();
  Complex kap(0.4, 0.2);
  CMat t_origin = as->assemble_s(kap, u0_sample({}, d)).matrix;

  // The e_{k0} phases cancel exactly in the continuum; discretely the
  // shifted symbol window leaves an h-resolved drift.
  SolitonParams gen;
  gen.k0 = Complex(0.5, 0.25);
  CMat t_gen = as->assemble_s(gen.k0 + kap, u0_sample(gen, d)).matrix;
  REQUIRE((t_origin - t_gen).norm() / t_origin.norm() < 0.12);
}
