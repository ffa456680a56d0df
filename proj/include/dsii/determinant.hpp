#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "dsii/cgo_types.hpp"
#include "dsii/operator.hpp"
#include "dsii/soliton.hpp"
#include "dsii/workers.hpp"

namespace dsii {

/// Renormalized determinant Det(I - A) = det(I - A) exp(tr A), the discrete
/// surrogate of the Carleman/Mikhlin-Itskovich determinant. Computed in the
/// log domain from LU pivots; `value` may under/overflow but log_abs never
/// does.
struct DetValue {
  Complex value{0, 0};
  double log_abs = 0.0;
  double arg = 0.0;
  double min_pivot = 0.0;
  bool finite = true;
};

inline DetValue renormalized_det(const CMat& a) {
  DetValue out;
  Complex tr = a.trace();
  CMat work = CMat::Identity(a.rows(), a.cols()) - a;
  LuDet lu(work);
  Complex logdet = lu.log_det();
  out.min_pivot = lu.min_pivot();
  Complex total = logdet + tr;
  out.log_abs = total.real();
  out.arg = total.imag();
  out.finite = std::isfinite(out.log_abs);
  if (!out.finite) return out;
  if (out.log_abs < 700.0)
    out.value = std::exp(out.log_abs) * Complex(std::cos(out.arg), std::sin(out.arg));
  else
    out.finite = false;
  return out;
}

inline DetValue renormalized_det(const DenseOperator& op) { return renormalized_det(op.matrix); }

/// Rectangular, vertex-centered k-grid: nodes at
/// center + (p - (n-1)/2) hk + i (q - (n-1)/2) hk with hk = 2 half_width/(n-1).
struct KGridSpec {
  Complex center{0, 0};
  double half_width = 5.0;
  int nodes_per_side = 21;

  double spacing() const { return 2.0 * half_width / (nodes_per_side - 1); }
  Complex node(int p, int q) const {
    double hk = spacing();
    return center + Complex((p - (nodes_per_side - 1) / 2.0) * hk,
                            (q - (nodes_per_side - 1) / 2.0) * hk);
  }
  int size() const { return nodes_per_side * nodes_per_side; }
};

struct ScanRecord {
  Complex k;
  Complex D{0, 0};
  double abs_D = 0.0;
  Complex s{nan(""), nan("")};
  Complex r{nan(""), nan("")};
  Complex c{nan(""), nan("")};
  double dbar_residual = nan("");
  bool ok = false;

 private:
  static double nan(const char* s) { return std::nan(s); }
};

struct DetectedZero {
  Complex k_star;
  double fitted_order = 0.0;
  double min_abs_D = 0.0;
};

struct ScatteringScan {
  KGridSpec grid;
  std::vector<ScanRecord> records;  // row-major: index = p * n + q
  std::vector<DetectedZero> zeros;
  double median_abs_D = 0.0;

  const ScanRecord& at(int p, int q) const { return records[p * grid.nodes_per_side + q]; }
};

struct ScanOptions {
  double zero_threshold_rel = 1e-2;   // |D| < rel * median(|D|)
  double order_fit_lo = 2.0;          // fit radii in units of the *fit* spacing
  double order_fit_hi = 10.0;
  double refine_spacing = 0.025;      // radial sampling step for the order fit
  bool refine_order_fit = true;       // sample extra determinants near a zero
  int exclusion_spacings = 2;         // s,r undefined within this many hk of a zero
  int workers = 1;
  bool with_scattering = true;
  std::vector<Complex> dbar_sample_nodes;  // where to attach dbar residuals
  double dbar_step_frac = 0.25;            // FD step = frac * hk
};

/// Determinant scans over k-grids for a fixed potential. Holds the assembler
/// (kernel caches) and the route-A spectral table of the potential.
class DetScanner {
 public:
  DetScanner(std::shared_ptr<OperatorAssembler> assembler, GriddedFunction u,
             ScanOptions opts = {})
      : asm_(std::move(assembler)), u_(std::move(u)), opts_(opts) {}

  const ScanOptions& options() const { return opts_; }
  const GriddedFunction& potential() const { return u_; }
  const OperatorAssembler& assembler() const { return *asm_; }

  /// D(k) plus per-node scattering data. Node failures are recorded, not
  /// thrown; the scan always completes.
  ScatteringScan run(const KGridSpec& grid) const {
    ScatteringScan scan;
    scan.grid = grid;
    scan.records.resize(grid.size());
    asm_->warm_caches();
    const CRouteA* croute = route_a();
    parallel_for(grid.size(), opts_.workers, [&](int idx) {
      int p = idx / grid.nodes_per_side, q = idx % grid.nodes_per_side;
      scan.records[idx] = evaluate_node(grid.node(p, q), croute);
    });
    std::vector<double> mags;
    for (auto& r : scan.records)
      if (r.ok) mags.push_back(r.abs_D);
    if (!mags.empty()) {
      std::sort(mags.begin(), mags.end());
      scan.median_abs_D = mags[mags.size() / 2];
    }
    find_zeros(scan);
    mask_exclusion(scan);
    attach_dbar_samples(scan);
    return scan;
  }

  /// Single-point determinant (assemble + LU).
  DetValue det_at(Complex k) const {
    DenseOperator s = asm_->assemble_s(k, u_);
    return renormalized_det(s.matrix);
  }

  /// Zero detection: strict local minima of |D| under the relative threshold,
  /// each validated with a fitted local vanishing order. The order is fitted
  /// as the log-log slope over radii [lo,hi]*spacing of a dedicated radial
  /// sample around the candidate (the scan's own spacing is far too coarse to
  /// see the quadratic regime of the soliton determinant).
  void find_zeros(ScatteringScan& scan) const {
    scan.zeros.clear();
    const int n = scan.grid.nodes_per_side;
    double thr = opts_.zero_threshold_rel * scan.median_abs_D;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const ScanRecord& rec = scan.at(p, q);
        if (!rec.ok || rec.abs_D >= thr) continue;
        bool is_min = true;
        for (int dp = -1; dp <= 1 && is_min; ++dp)
          for (int dq = -1; dq <= 1 && is_min; ++dq) {
            if (dp == 0 && dq == 0) continue;
            int pp = p + dp, qq = q + dq;
            if (pp < 0 || qq < 0 || pp >= n || qq >= n) continue;
            if (scan.at(pp, qq).ok && scan.at(pp, qq).abs_D < rec.abs_D) is_min = false;
          }
        if (!is_min) continue;
        DetectedZero z;
        z.k_star = rec.k;
        z.min_abs_D = rec.abs_D;
        z.fitted_order = fit_order(scan, rec.k);
        scan.zeros.push_back(z);
      }
  }

 private:
  ScanRecord evaluate_node(Complex k, const CRouteA* croute) const {
    ScanRecord rec;
    rec.k = k;
    try {
      DenseOperator s = asm_->assemble_s(k, u_);
      Complex tr = s.matrix.trace();
      CMat work = CMat::Identity(s.matrix.rows(), s.matrix.cols()) - s.matrix;
      Eigen::PartialPivLU<Eigen::Ref<CMat>> lu(work);
      double log_abs = 0, arg = 0;
      for (Eigen::Index i = 0; i < work.rows(); ++i) {
        log_abs += std::log(std::abs(work(i, i)));
        arg += std::arg(work(i, i));
      }
      if (lu.permutationP().determinant() < 0) arg += kPi;
      Complex total = Complex(log_abs, arg) + tr;
      rec.D = std::exp(total.real()) * Complex(std::cos(total.imag()), std::sin(total.imag()));
      rec.abs_D = std::abs(rec.D);
      if (opts_.with_scattering) {
        CVec m1 = lu.solve(CVec::Ones(work.rows()));
        ScatteringApply ap(asm_->transforms(), k, u_.values);
        CVec m2 = ap.m2_from_m1(m1);
        rec.s = (u_.values.array() * m2.array()).sum() * u_.domain->cell_weight() / kPi;
        rec.r = filon_r(k, m1);
        if (croute) rec.c = croute->eval(k);
      }
      rec.ok = std::isfinite(rec.abs_D);
    } catch (const std::exception&) {
      rec.ok = false;
    }
    return rec;
  }

  /// r(k) = -(1/pi) int e_{-k} u conj(m1): Filon-midpoint quadrature (exact
  /// cell integrals of the phase against piecewise-constant samples), immune
  /// to phase aliasing at large |k|.
  Complex filon_r(Complex k, const CVec& m1) const {
    const DomainPtr& d = u_.domain;
    double h = d->spacing();
    auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; };
    double filon = sinc(k.real() * h) * sinc(k.imag() * h);
    Complex acc(0, 0);
    for (int n = 0; n < d->size(); ++n)
      acc += e_k(-k, d->node(n)) * u_.values[n] * std::conj(m1[n]);
    return -acc * d->cell_weight() * filon / kPi;
  }

  double fit_order(const ScatteringScan& scan, Complex k_star) const {
    std::vector<double> logr, logD;
    if (opts_.refine_order_fit) {
      double h = opts_.refine_spacing;
      for (double rad = opts_.order_fit_lo * h; rad <= opts_.order_fit_hi * h + 1e-12;
           rad += 2.0 * h) {
        for (int ph = 0; ph < 4; ++ph) {
          Complex k = k_star + std::polar(rad, kPi * ph / 2.0 + kPi / 7.0);
          DetValue dv = det_at(k);
          if (!dv.finite) continue;
          logr.push_back(std::log(rad));
          logD.push_back(dv.log_abs);
        }
      }
    } else {
      double hk = scan.grid.spacing();
      for (const auto& rec : scan.records) {
        if (!rec.ok) continue;
        double rad = std::abs(rec.k - k_star);
        if (rad >= opts_.order_fit_lo * hk && rad <= opts_.order_fit_hi * hk) {
          logr.push_back(std::log(rad));
          logD.push_back(std::log(rec.abs_D));
        }
      }
    }
    if (logr.size() < 3) return 0.0;
    double mx = 0, my = 0;
    for (size_t i = 0; i < logr.size(); ++i) {
      mx += logr[i];
      my += logD[i];
    }
    mx /= logr.size();
    my /= logD.size();
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < logr.size(); ++i) {
      sxx += (logr[i] - mx) * (logr[i] - mx);
      sxy += (logr[i] - mx) * (logD[i] - my);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
  }

  void mask_exclusion(ScatteringScan& scan) const {
    if (scan.zeros.empty()) return;
    double delta = opts_.exclusion_spacings * scan.grid.spacing();
    for (auto& rec : scan.records) {
      for (const auto& z : scan.zeros)
        if (std::abs(rec.k - z.k_star) <= delta) {
          rec.s = Complex(std::nan(""), std::nan(""));
          rec.r = Complex(std::nan(""), std::nan(""));
        }
    }
  }

  void attach_dbar_samples(ScatteringScan& scan) const;

  const CRouteA* route_a() const {
    if (!opts_.with_scattering) return nullptr;
    if (!croute_) {
      Transforms ftr(u_.domain);  // fourier basis only; kernels stay unbuilt
      croute_ = std::make_unique<CRouteA>(ftr, u_);
    }
    return croute_.get();
  }

  std::shared_ptr<OperatorAssembler> asm_;
  GriddedFunction u_;
  ScanOptions opts_;
  mutable std::unique_ptr<CRouteA> croute_;
};

/// Compares centered finite differences of log Det(I - A(t)) against
/// Tr((I-A)^{-1}(-A')) - Tr(-A') over the given parameter samples; returns
/// the largest absolute deviation.
inline double logdet_derivative_check(const std::function<CMat(double)>& family,
                                      const std::function<CMat(double)>& derivative,
                                      const std::vector<double>& t_samples, double step) {
  double worst = 0.0;
  for (double t : t_samples) {
    CMat a = family(t);
    DetValue d0 = renormalized_det(family(t - step));
    DetValue d1 = renormalized_det(family(t + step));
    if (!d0.finite || !d1.finite) throw std::invalid_argument("logdet_derivative_check: non-finite");
    double fd_re = (d1.log_abs - d0.log_abs) / (2 * step);
    double fd_im = (d1.arg - d0.arg) / (2 * step);
    CMat ap = derivative(t);
    CMat work = CMat::Identity(a.rows(), a.cols()) - a;
    LuDet lu(work);
    if (lu.min_pivot() < 1e-12) throw std::invalid_argument("logdet_derivative_check: singular family");
    Complex tr1 = -(lu.solve(ap)).trace();
    Complex analytic = tr1 + ap.trace();
    worst = std::max(worst, std::abs(Complex(fd_re, fd_im) - analytic));
  }
  return worst;
}

inline void DetScanner::attach_dbar_samples(ScatteringScan& scan) const {
  if (opts_.dbar_sample_nodes.empty()) return;
  double step = opts_.dbar_step_frac * scan.grid.spacing();
  const CRouteA* croute = route_a();
  for (Complex k0 : opts_.dbar_sample_nodes) {
    // nearest grid record
    int best = -1;
    double bd = 1e300;
    for (size_t i = 0; i < scan.records.size(); ++i) {
      double dd = std::abs(scan.records[i].k - k0);
      if (dd < bd) {
        bd = dd;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) continue;
    ScanRecord& rec = scan.records[best];
    if (!rec.ok || std::isnan(rec.s.real())) continue;
    DetValue de = det_at(rec.k + step), dw = det_at(rec.k - step);
    DetValue dn = det_at(rec.k + Complex(0, step)), ds = det_at(rec.k - Complex(0, step));
    if (!(de.finite && dw.finite && dn.finite && ds.finite)) continue;
    Complex ddx = (Complex(de.log_abs - dw.log_abs, de.arg - dw.arg)) / (2 * step);
    Complex ddy = (Complex(dn.log_abs - ds.log_abs, dn.arg - ds.arg)) / (2 * step);
    Complex dbar = 0.5 * (ddx + Complex(0, 1) * ddy);
    Complex rhs = Complex(0, 0.5) * std::conj(rec.s) - rec.c;
    rec.dbar_residual = std::abs(dbar - rhs);
  }
}

}  // namespace dsii
