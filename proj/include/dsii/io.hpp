#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "dsii/determinant.hpp"
#include "dsii/perturbation.hpp"

namespace dsii {

using Json = nlohmann::json;  // std::map-backed: stable (sorted) key order

/// Run configuration shared by all CLI commands. Serializable; the FNV hash
/// of the canonical dump stamps every output file.
struct RunConfig {
  double half_width = 20.0;
  int points_per_side = 64;
  Complex k0{0.0, 0.0};
  std::string potential = "soliton";  // soliton | zero | soliton+<builtin phi> | file:<path>
  double eps = 0.0;                   // bump scale for soliton+<phi>
  Complex k_center{0.0, 0.0};
  double k_half_width = 5.0;
  int k_nodes = 21;
  std::string scheme = "spectral";  // spectral | midpoint
  bool near_field_exact = true;
  double zero_threshold_rel = 1e-2;
  double boundary_mass_threshold = 1e-2;
  std::string out_dir = "out";
  int workers = 1;

  Json to_json() const {
    Json j;
    j["grid"]["L"] = half_width;
    j["grid"]["N"] = points_per_side;
    j["k0"] = {k0.real(), k0.imag()};
    j["potential"] = potential;
    j["eps"] = eps;
    j["k_grid"]["center"] = {k_center.real(), k_center.imag()};
    j["k_grid"]["half_width"] = k_half_width;
    j["k_grid"]["nodes"] = k_nodes;
    j["scheme"] = scheme;
    j["near_field_exact"] = near_field_exact;
    j["zero_threshold_rel"] = zero_threshold_rel;
    j["boundary_mass_threshold"] = boundary_mass_threshold;
    j["out_dir"] = out_dir;
    j["workers"] = workers;
    return j;
  }

  static RunConfig from_json(const Json& j) {
    RunConfig c;
    if (j.contains("grid")) {
      c.half_width = j["grid"].value("L", c.half_width);
      c.points_per_side = j["grid"].value("N", c.points_per_side);
    }
    if (j.contains("k0")) c.k0 = Complex(j["k0"][0], j["k0"][1]);
    c.potential = j.value("potential", c.potential);
    c.eps = j.value("eps", c.eps);
    if (j.contains("k_grid")) {
      const auto& g = j["k_grid"];
      if (g.contains("center")) c.k_center = Complex(g["center"][0], g["center"][1]);
      c.k_half_width = g.value("half_width", c.k_half_width);
      c.k_nodes = g.value("nodes", c.k_nodes);
    }
    c.scheme = j.value("scheme", c.scheme);
    c.near_field_exact = j.value("near_field_exact", c.near_field_exact);
    c.zero_threshold_rel = j.value("zero_threshold_rel", c.zero_threshold_rel);
    c.boundary_mass_threshold = j.value("boundary_mass_threshold", c.boundary_mass_threshold);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.workers = j.value("workers", c.workers);
    return c;
  }
};

inline std::string config_hash(const RunConfig& c) {
  std::string dump = c.to_json().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Scan CSV: one row per k-node, LF line endings, '.' decimals.
inline void write_scan_csv(const std::filesystem::path& path, const ScatteringScan& scan,
                           const std::string& hash) {
  std::ofstream f(path, std::ios::binary);
  f << "re_k,im_k,re_D,im_D,abs_D,re_s,im_s,re_r,im_r,re_c,im_c,dbar_residual,config_hash\n";
  for (const auto& r : scan.records) {
    f << fmt_g(r.k.real()) << ',' << fmt_g(r.k.imag()) << ',' << fmt_g(r.D.real()) << ','
      << fmt_g(r.D.imag()) << ',' << fmt_g(r.abs_D) << ',' << fmt_g(r.s.real()) << ','
      << fmt_g(r.s.imag()) << ',' << fmt_g(r.r.real()) << ',' << fmt_g(r.r.imag()) << ','
      << fmt_g(r.c.real()) << ',' << fmt_g(r.c.imag()) << ',' << fmt_g(r.dbar_residual) << ','
      << hash << '\n';
  }
}

inline Json scan_to_json(const ScatteringScan& scan, const RunConfig& cfg) {
  Json j;
  j["config"] = cfg.to_json();
  j["config_hash"] = config_hash(cfg);
  j["median_abs_D"] = scan.median_abs_D;
  j["grid"]["center"] = {scan.grid.center.real(), scan.grid.center.imag()};
  j["grid"]["half_width"] = scan.grid.half_width;
  j["grid"]["nodes"] = scan.grid.nodes_per_side;
  Json zeros = Json::array();
  for (const auto& z : scan.zeros)
    zeros.push_back({{"re_k", z.k_star.real()},
                     {"im_k", z.k_star.imag()},
                     {"fitted_order", z.fitted_order},
                     {"min_abs_D", z.min_abs_D}});
  j["zeros"] = zeros;
  return j;
}

/// Flat binary export: row-major complex<double> (16 bytes/entry,
/// little-endian on every supported platform) plus a sidecar text header.
inline void write_operator_binary(const std::filesystem::path& stem, const CMat& m, double L,
                                  int N, Complex k, const std::string& label) {
  std::ofstream bin(stem.string() + ".bin", std::ios::binary);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double re = m(r, c).real(), im = m(r, c).imag();
      bin.write(reinterpret_cast<const char*>(&re), sizeof(double));
      bin.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
  std::ofstream hdr(stem.string() + ".hdr");
  hdr << "L " << fmt_g(L) << "\nN " << N << "\nrows " << m.rows() << "\ncols " << m.cols()
      << "\nk " << fmt_g(k.real()) << " " << fmt_g(k.imag()) << "\nlabel " << label
      << "\nlayout row-major complex128 little-endian\n";
}

inline void write_function_binary(const std::filesystem::path& stem, const GriddedFunction& f,
                                  Complex k, const std::string& label) {
  CMat m(1, f.values.size());
  m.row(0) = f.values.transpose();
  write_operator_binary(stem, m, f.domain->half_width(), f.domain->points_per_side(), k, label);
}

inline GriddedFunction read_function_binary(const std::filesystem::path& bin_path,
                                            const DomainPtr& d) {
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::invalid_argument("cannot open sample file: " + bin_path.string());
  CVec v(d->size());
  for (int n = 0; n < d->size(); ++n) {
    double re, im;
    bin.read(reinterpret_cast<char*>(&re), sizeof(double));
    bin.read(reinterpret_cast<char*>(&im), sizeof(double));
    if (!bin) throw std::invalid_argument("sample file too short for this grid");
    v[n] = Complex(re, im);
  }
  return GriddedFunction(d, std::move(v));
}

inline const char* verdict_name(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::empty: return "empty";
    case StabilityVerdict::nonempty: return "nonempty";
    default: return "inconclusive";
  }
}

}  // namespace dsii
