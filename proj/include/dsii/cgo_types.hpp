#pragma once

#include <stdexcept>

namespace dsii {

/// k is within the exclusion radius of a detected exceptional point.
struct NearExceptional : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The iterative solver failed to reach the requested residual.
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// ||P - P0|| >= 1/2: the Sz.-Nagy similarity is out of its domain.
struct GapTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An eigenvalue sits in the guard band around the Riesz contour.
struct EigenvalueOnContour : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dsii
