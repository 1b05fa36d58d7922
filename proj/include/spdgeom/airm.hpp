#pragma once

// Affine-invariant geometry on the SPD cone: distance, geodesics, and the
// exponential/logarithmic maps at an arbitrary base point.

#include "spdgeom/spd_core.hpp"

namespace spdgeom {

// A point together with its square root and inverse square root, computed
// from a single eigendecomposition.
class BasePoint {
 public:
  explicit BasePoint(const SpdMatrix& p);

  const SpdMatrix& point() const noexcept { return point_; }
  const SpdMatrix& sqrt() const noexcept { return sqrt_; }
  const SpdMatrix& inv_sqrt() const noexcept { return inv_sqrt_; }
  std::size_t dim() const noexcept { return point_.dim(); }

  // A^{-1/2} B A^{-1/2}
  SpdMatrix whiten(const SpdMatrix& b) const;
  // A^{1/2} S A^{1/2}
  Matrix unwhiten(const Matrix& s) const;

 private:
  SpdMatrix point_;
  SpdMatrix sqrt_;
  SpdMatrix inv_sqrt_;
};

inline BasePoint make_base(const SpdMatrix& p) { return BasePoint(p); }

double airm_distance(const SpdMatrix& a, const SpdMatrix& b);
double airm_distance(const BasePoint& a, const SpdMatrix& b);

// A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}. t outside [0, 1] extrapolates.
SpdMatrix geodesic(const SpdMatrix& a, const SpdMatrix& b, double t);

// Tangent vectors in the ambient form T = A^{1/2} log(A^{-1/2} B A^{-1/2}) A^{1/2}.
// Note ||T||_F is not the geodesic distance unless A = I.
SpdMatrix exp_map(const BasePoint& base, const SymMatrix& t);
SymMatrix log_map(const BasePoint& base, const SpdMatrix& b);

// Whitened tangent coordinates W = log(A^{-1/2} B A^{-1/2}); ||W||_F = d(A, B).
SpdMatrix exp_map_whitened(const BasePoint& base, const SymMatrix& w);
SymMatrix log_map_whitened(const BasePoint& base, const SpdMatrix& b);

}  // namespace spdgeom
