#include "spdgeom/airm.hpp"

#include "spdgeom/error.hpp"

#include <cmath>
#include <sstream>

namespace spdgeom {

namespace {

void require_dim(std::size_t expected, std::size_t got) {
  if (expected != got) {
    std::ostringstream os;
    os << "dimension mismatch: " << expected << " vs " << got;
    fail(ErrorKind::DimensionMismatch, os.str());
  }
}

struct Roots {
  SpdMatrix sqrt;
  SpdMatrix inv_sqrt;
};

Roots roots_of(const SpdMatrix& p) {
  const EigDecomp e = eig_sym(p);
  if (!(e.values(0) > 0)) fail(ErrorKind::NotPositiveDefinite, "base point is not positive definite");
  return {SpdFactory::trusted(spectral_apply(e, [](double l) { return std::sqrt(l); })),
          SpdFactory::trusted(spectral_apply(e, [](double l) { return 1.0 / std::sqrt(l); }))};
}

}  // namespace

BasePoint::BasePoint(const SpdMatrix& p)
    : point_(p), sqrt_(SpdMatrix::identity(1)), inv_sqrt_(SpdMatrix::identity(1)) {
  Roots r = roots_of(p);
  sqrt_ = std::move(r.sqrt);
  inv_sqrt_ = std::move(r.inv_sqrt);
}

SpdMatrix BasePoint::whiten(const SpdMatrix& b) const {
  require_dim(dim(), b.dim());
  return SpdFactory::trusted(inv_sqrt_.mat() * b.mat() * inv_sqrt_.mat());
}

Matrix BasePoint::unwhiten(const Matrix& s) const { return sqrt_.mat() * s * sqrt_.mat(); }

double airm_distance(const BasePoint& a, const SpdMatrix& b) {
  const EigDecomp e = eig_sym(a.whiten(b));
  if (!(e.values(0) > 0)) fail(ErrorKind::NotPositiveDefinite, "whitened matrix lost definiteness");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    const double l = std::log(e.values(i));
    acc += l * l;
  }
  return std::sqrt(acc);
}

double airm_distance(const SpdMatrix& a, const SpdMatrix& b) {
  require_dim(a.dim(), b.dim());
  return airm_distance(BasePoint(a), b);
}

SpdMatrix geodesic(const SpdMatrix& a, const SpdMatrix& b, double t) {
  require_dim(a.dim(), b.dim());
  const BasePoint base(a);
  const SpdMatrix inner = matrix_power(base.whiten(b), t);
  return SpdFactory::trusted(base.unwhiten(inner.mat()));
}

SpdMatrix exp_map(const BasePoint& base, const SymMatrix& t) {
  require_dim(base.dim(), t.dim());
  const Matrix& is = base.inv_sqrt().mat();
  const SpdMatrix e = matrix_exp(SymMatrix::symmetrized(is * t.mat() * is));
  return SpdFactory::trusted(base.unwhiten(e.mat()));
}

SymMatrix log_map(const BasePoint& base, const SpdMatrix& b) {
  const SymMatrix w = log_map_whitened(base, b);
  return SymMatrix::symmetrized(base.unwhiten(w.mat()));
}

SpdMatrix exp_map_whitened(const BasePoint& base, const SymMatrix& w) {
  require_dim(base.dim(), w.dim());
  const SpdMatrix e = matrix_exp(w);
  return SpdFactory::trusted(base.unwhiten(e.mat()));
}

SymMatrix log_map_whitened(const BasePoint& base, const SpdMatrix& b) {
  return matrix_log(base.whiten(b));
}

}  // namespace spdgeom
