#pragma once

#include <Eigen/Eigenvalues>

#include "dsii/cgo.hpp"
#include "dsii/perturbation.hpp"

namespace dsii {

/// Spectral diagnostics of the assembled soliton operator T(0).
struct SpectralReport {
  std::vector<double> eigenvalues_near_one;  // within the requested radius
  double third_eigenvalue_gap = 0.0;         // |lambda_3 - 1|
  double psi1_residual = 0.0, psi2_residual = 0.0;
  double chi1_residual = 0.0, chi2_residual = 0.0;  // transpose eigenproblem
  Eigen::Matrix2cd gram_raw, gram_tail_corrected;
  double hermitian_asymmetry = 0.0;
  double gram_condition = 0.0;
  std::vector<std::pair<Complex, Eigen::Matrix2cd>> reduced_samples;
};

inline SpectralReport spectral_report(const OperatorAssembler& assembler,
                                      const SolitonParams& params, double near_radius = 0.05,
                                      const std::vector<Complex>& reduced_kappas = {}) {
  const DomainPtr& d = assembler.domain();
  SpectralReport rep;
  GriddedFunction u0 = u0_sample(params, d);
  CMat t0 = assembler.assemble_s(params.k0, u0).matrix;

  CVec r(d->size());
  for (int n = 0; n < d->size(); ++n) r[n] = rho(d->node(n));
  CMat tsh = r.cwiseInverse().asDiagonal() * t0 * r.asDiagonal();
  rep.hermitian_asymmetry = (tsh - tsh.adjoint()).norm() / tsh.norm();
  {
    CMat herm = 0.5 * (tsh + tsh.adjoint());
    tsh.resize(0, 0);
    Eigen::SelfAdjointEigenSolver<CMat> es(herm, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](double a, double b) {
      return std::abs(a - 1.0) < std::abs(b - 1.0);
    });
    for (double l : ev)
      if (std::abs(l - 1.0) < near_radius) rep.eigenvalues_near_one.push_back(l);
    if (ev.size() > 2) rep.third_eigenvalue_gap = std::abs(ev[2] - 1.0);
  }

  Eigenbasis b = eigenbasis(d);
  rep.psi1_residual = (t0 * b.psi1.values - b.psi1.values).norm() / b.psi1.values.norm();
  rep.psi2_residual = (t0 * b.psi2.values - b.psi2.values).norm() / b.psi2.values.norm();
  rep.chi1_residual =
      (t0.transpose() * b.chi1.values - b.chi1.values).norm() / b.chi1.values.norm();
  rep.chi2_residual =
      (t0.transpose() * b.chi2.values - b.chi2.values).norm() / b.chi2.values.norm();

  rep.gram_raw << pair(b.chi1, b.psi1), pair(b.chi1, b.psi2), pair(b.chi2, b.psi1),
      pair(b.chi2, b.psi2);
  rep.gram_tail_corrected << pair_tail_corrected(b.chi1, b.psi1),
      pair_tail_corrected(b.chi1, b.psi2), pair_tail_corrected(b.chi2, b.psi1),
      pair_tail_corrected(b.chi2, b.psi2);
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(rep.gram_raw);
  rep.gram_condition = svd.singularValues()(0) / svd.singularValues()(1);

  for (Complex kap : reduced_kappas)
    rep.reduced_samples.emplace_back(kap, reduced_matrix(kap, assembler.transforms(), params));
  return rep;
}

}  // namespace dsii
