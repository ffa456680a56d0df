#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dsii/determinant.hpp"
#include "dsii/runtime.hpp"

using namespace dsii;
using Catch::Approx;

namespace {
struct RuntimeInit {
  RuntimeInit() { init_runtime(1); }
} runtime_init;

CMat random_matrix(int n, double scale, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * Complex(g(rng), g(rng)) / std::sqrt(2.0 * n);
  return a;
}

std::shared_ptr<DetScanner> soliton_scanner(double L, int N, ScanOptions opts = {}) {
  auto tr = std::make_shared<Transforms>(make_domain(L, N));
  auto as = std::make_shared<OperatorAssembler>(tr);
  return std::make_shared<DetScanner>(as, u0_sample({}, tr->domain()), opts);
}
}  // namespace

TEST_CASE("renormalized determinant basics") {
  CMat zero = CMat::Zero(6, 6);
  DetValue dv = renormalized_det(zero);
  REQUIRE(dv.value == Complex(1, 0));

  // rank-one A = lambda <chi,.> psi with <chi,psi> = 1: Det = (1-lambda) e^lambda
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  int n = 24;
  CVec psi(n), chi(n);
  for (int i = 0; i < n; ++i) {
    psi[i] = Complex(g(rng), g(rng));
    chi[i] = Complex(g(rng), g(rng));
  }
  chi /= chi.transpose() * psi;  // bilinear normalization <chi, psi> = 1
  for (Complex lambda : {Complex(0.37, 0.0), Complex(-1.2, 0.8), Complex(0.0, 2.0)}) {
    CMat a = lambda * psi * chi.transpose();
    DetValue d = renormalized_det(a);
    Complex want = (1.0 - lambda) * std::exp(lambda);
    REQUIRE(std::abs(d.value - want) / std::abs(want) < 1e-12);
  }
}

TEST_CASE("multiplicativity identity (20 random pairs)") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    CMat b = random_matrix(5, 0.25, 100 + seed);
    CMat c = random_matrix(5, 0.25, 200 + seed);
    CMat prod = CMat::Identity(5, 5) - (b + c - b * c);  // (I-B)(I-C) = I - (B + C - BC)
    DetValue lhs = renormalized_det(CMat(b + c - b * c));
    DetValue rb = renormalized_det(b), rc = renormalized_det(c);
    Complex rhs = rb.value * rc.value * std::exp(-(b * c).trace());
    REQUIRE(std::abs(lhs.value - rhs) / std::abs(rhs) < 1e-10);
  }
}

TEST_CASE("log-determinant derivative formula") {
  // constant family: derivative identically zero
  CMat fixed = random_matrix(6, 0.3, 42);
  auto const_family = [&](double) { return fixed; };
  auto const_deriv = [&](double) { return CMat(CMat::Zero(6, 6)); };
  REQUIRE(logdet_derivative_check(const_family, const_deriv, {0.0, 0.4}, 1e-4) < 1e-12);

  // 6x6 polynomial family
  CMat a0 = random_matrix(6, 0.2, 1), a1 = random_matrix(6, 0.2, 2), a2 = random_matrix(6, 0.2, 3);
  auto family = [&](double t) { return CMat(a0 + t * a1 + t * t * a2); };
  auto deriv = [&](double t) { return CMat(a1 + 2.0 * t * a2); };
  REQUIRE(logdet_derivative_check(family, deriv, {-0.3, 0.0, 0.25, 0.6}, 1e-4) < 1e-6);

  // rank-one family lambda(t) <chi,.> psi matches scalar calculus
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  CVec psi(8), chi(8);
  for (int i = 0; i < 8; ++i) {
    psi[i] = Complex(g(rng), g(rng));
    chi[i] = Complex(g(rng), g(rng));
  }
  chi /= chi.transpose() * psi;
  auto lam = [](double t) { return Complex(0.3 + 0.2 * t, 0.1 * t); };
  auto lamp = [](double) { return Complex(0.2, 0.1); };
  auto fam1 = [&](double t) { return CMat(lam(t) * psi * chi.transpose()); };
  auto der1 = [&](double t) { return CMat(lamp(t) * psi * chi.transpose()); };
  // analytic: d/dt log((1-lam) e^lam) = lam' (1 + 1/(lam - 1))
  for (double t : {0.0, 0.5}) {
    CMat a = fam1(t);
    CMat work = CMat::Identity(8, 8) - a;
    LuDet lu(work);
    Complex got = -(lu.solve(der1(t))).trace() + der1(t).trace();
    Complex want = lamp(t) * (1.0 + 1.0 / (lam(t) - 1.0));
    REQUIRE(std::abs(got - want) < 1e-12);
  }
  REQUIRE(logdet_derivative_check(fam1, der1, {0.0, 0.5}, 1e-4) < 1e-6);

  // singular family rejected
  CVec psi2 = psi;
  auto famsing = [&](double t) { return CMat((1.0 + 0.0 * t) * psi * chi.transpose()); };
  REQUIRE_THROWS_AS(logdet_derivative_check(famsing, der1, {0.0}, 1e-4), std::invalid_argument);
}

TEST_CASE("similarity invariance under diag(rho)") {
  auto tr = std::make_shared<Transforms>(make_domain(12.0, 20));
  OperatorAssembler as(tr);
  auto d = tr->domain();
  CMat s = as.assemble_s(Complex(0.5, 0.2), u0_sample({}, d)).matrix;
  CVec r(d->size());
  for (int n = 0; n < d->size(); ++n) r[n] = rho(d->node(n));
  CMat conj = r.cwiseInverse().asDiagonal() * s * r.asDiagonal();
  DetValue d1 = renormalized_det(s), d2 = renormalized_det(conj);
  REQUIRE(std::abs(d1.value - d2.value) / std::abs(d1.value) < 1e-8);
}

TEST_CASE("det scan: small data has no exceptional points") {
  auto tr = std::make_shared<Transforms>(make_domain(20.0, 32));
  auto as = std::make_shared<OperatorAssembler>(tr);
  auto u = sample(tr->domain(), [](Complex z) { return 0.01 * std::exp(-std::norm(z)); });
  ScanOptions so;
  so.with_scattering = false;
  DetScanner scanner(as, u, so);
  ScatteringScan scan = scanner.run(KGridSpec{Complex(0, 0), 3.0, 7});
  REQUIRE(scan.zeros.empty());
  for (const auto& rec : scan.records) {
    REQUIRE(rec.ok);
    REQUIRE(rec.abs_D > 0.99);
  }
}

TEST_CASE("det scan: soliton zero detection and order") {
  ScanOptions so;
  so.with_scattering = true;
  auto scanner = soliton_scanner(20.0, 32, so);
  ScatteringScan scan = scanner->run(KGridSpec{Complex(0, 0), 2.0, 9});
  REQUIRE(scan.zeros.size() == 1);
  REQUIRE(std::abs(scan.zeros[0].k_star) < 1e-12);  // node nearest k0 = the center node
  REQUIRE(scan.zeros[0].fitted_order == Approx(2.0).margin(0.25));
  // far-field bracket
  const auto& corner = scan.records.front();
  REQUIRE(corner.abs_D > 0.8);
  REQUIRE(corner.abs_D < 1.2);
  // zero-potential scan gives empty zero list
  auto tr = std::make_shared<Transforms>(make_domain(20.0, 32));
  auto as = std::make_shared<OperatorAssembler>(tr);
  GriddedFunction zero(tr->domain(), CVec::Zero(tr->domain()->size()));
  ScanOptions so2;
  so2.with_scattering = false;
  DetScanner zscan(as, zero, so2);
  ScatteringScan sz = zscan.run(KGridSpec{Complex(0, 0), 2.0, 5});
  REQUIRE(sz.zeros.empty());
  for (const auto& rec : sz.records) REQUIRE(rec.abs_D == Approx(1.0).margin(1e-12));
}

TEST_CASE("determinant vs invertibility surrogate") {
  auto scanner = soliton_scanner(20.0, 24);
  // near the zero: both |D| and sigma_min small; away: both order one
  auto tr = std::make_shared<Transforms>(make_domain(20.0, 24));
  OperatorAssembler as(tr);
  auto u0 = u0_sample({}, tr->domain());
  auto probe = [&](Complex k) {
    CMat s = as.assemble_s(k, u0).matrix;
    DetValue dv = renormalized_det(s);
    CMat work = CMat::Identity(s.rows(), s.cols()) - s;
    return std::make_pair(std::abs(dv.value), smallest_singular_value(work));
  };
  auto [d_far, s_far] = probe(Complex(2.0, 1.0));
  auto [d_near, s_near] = probe(Complex(0.02, 0.0));
  REQUIRE(d_near < 0.05 * d_far);
  REQUIRE(s_near < 0.25 * s_far);
  REQUIRE(d_far > 0.5);
  REQUIRE(s_far > 0.25);
}

TEST_CASE("N-doubling consistency of the soliton determinant") {
  Complex k(2.0, 0.0);
  auto s32 = soliton_scanner(20.0, 32);
  auto s64 = soliton_scanner(20.0, 64);
  double d32 = std::abs(s32->det_at(k).value);
  double d64 = std::abs(s64->det_at(k).value);
  REQUIRE(std::abs(d64 - d32) / d32 < 0.05);
}
