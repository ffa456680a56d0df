#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "dsii/grid.hpp"

namespace dsii {

/// Thin RAII wrapper around FFTW 2-D complex transforms with a process-wide
/// plan cache. FFTW planning is not thread-safe; execution on distinct
/// buffers is.
class Fft2D {
 public:
  static void forward(CMat& a) { run(a, FFTW_FORWARD); }
  static void inverse(CMat& a) {
    run(a, FFTW_BACKWARD);
    a /= static_cast<double>(a.rows() * a.cols());
  }

 private:
  static void run(CMat& a, int sign) {
    fftw_plan plan;
    {
      static std::mutex mu;
      static std::map<std::tuple<int, int, int>, fftw_plan> cache;
      std::lock_guard<std::mutex> lock(mu);
      auto key = std::make_tuple(static_cast<int>(a.rows()), static_cast<int>(a.cols()), sign);
      auto it = cache.find(key);
      if (it == cache.end()) {
        // Plan on a scratch buffer so the caller's data survives planning.
        std::vector<std::complex<double>> scratch(a.size());
        plan = fftw_plan_dft_2d(static_cast<int>(a.cols()), static_cast<int>(a.rows()),
                                reinterpret_cast<fftw_complex*>(scratch.data()),
                                reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                                FFTW_ESTIMATE);
        cache.emplace(key, plan);
      } else {
        plan = it->second;
      }
    }
    // Eigen stores column-major: columns are contiguous, which matches the
    // row-count-last argument order used above.
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(a.data()),
                     reinterpret_cast<fftw_complex*>(a.data()));
  }
};

}  // namespace dsii
