#pragma once

#include <cstdlib>
#include <string>
#include <thread>

namespace dsii {

/// One-time process setup for the numerical backends.
///
/// OpenBLAS's DYNAMIC_ARCH dispatcher fails to identify some cloud Xeons
/// (masked CPUID) and falls back to a reference kernel that is ~4x slower.
/// Selecting the core type from the compiler's CPU probe restores full
/// speed. Must run before the first BLAS call; both env vars are left
/// untouched when the user already set them.
inline void init_runtime(int workers = 1) {
#if defined(__x86_64__)
  if (!std::getenv("OPENBLAS_CORETYPE")) {
    if (__builtin_cpu_supports("avx512f"))
      setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 0);
    else if (__builtin_cpu_supports("avx2"))
      setenv("OPENBLAS_CORETYPE", "HASWELL", 0);
  }
#endif
  if (!std::getenv("OPENBLAS_NUM_THREADS")) {
    // BLAS stays single-threaded inside worker threads; a lone worker gets
    // the whole machine.
    unsigned hw = std::thread::hardware_concurrency();
    unsigned per = workers > 1 ? 1u : (hw ? hw : 1u);
    setenv("OPENBLAS_NUM_THREADS", std::to_string(per).c_str(), 0);
  }
}

/// Worker count resolution: DSII_WORKERS env overrides the config value.
inline int resolve_workers(int configured) {
  if (const char* env = std::getenv("DSII_WORKERS")) {
    int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return configured >= 1 ? configured : 1;
}

}  // namespace dsii
