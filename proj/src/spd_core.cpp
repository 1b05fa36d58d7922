#include "spdgeom/spd_core.hpp"

#include "spdgeom/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace spdgeom {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::AsymmetricInput: return "AsymmetricInput";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::ManifestError: return "ManifestError";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::EmptyImage: return "EmptyImage";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

void require_square_finite(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << "expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    fail(ErrorKind::DimensionMismatch, os.str());
  }
  if (!m.allFinite()) fail(ErrorKind::NonFiniteValue, "matrix has non-finite entries");
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_same_dim(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "dimension mismatch: " << a.dim() << " vs " << b.dim();
    fail(ErrorKind::DimensionMismatch, os.str());
  }
}

}  // namespace

SymMatrix SymMatrix::from_raw(const Matrix& raw, double tol) {
  require_square_finite(raw);
  const double skew = (raw - raw.transpose()).norm();
  if (skew > tol * std::max(1.0, raw.norm())) {
    std::ostringstream os;
    os << "matrix is not symmetric (skew Frobenius norm " << skew << ")";
    fail(ErrorKind::AsymmetricInput, os.str());
  }
  return SymMatrix(symmetrize(raw));
}

SymMatrix SymMatrix::symmetrized(const Matrix& raw) {
  require_square_finite(raw);
  return SymMatrix(symmetrize(raw));
}

SymMatrix SymMatrix::zero(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return SymMatrix(Matrix::Zero(k, k));
}

SymMatrix SymMatrix::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return SymMatrix(Matrix::Identity(k, k));
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  return SymMatrix::symmetrized(Matrix(d.asDiagonal()));
}

SpdMatrix SpdMatrix::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return SpdMatrix(Matrix::Identity(k, k), 1.0);
}

SpdMatrix SpdFactory::trusted(Matrix m, std::optional<double> min_eig) {
  require_square_finite(m);
  return SpdMatrix(symmetrize(m), min_eig);
}

EigDecomp eig_sym(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.mat(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  EigDecomp out{solver.eigenvalues(), solver.eigenvectors()};
  if (!out.values.allFinite() || !out.vectors.allFinite()) {
    fail(ErrorKind::ConvergenceFailure, "symmetric eigensolver produced non-finite output");
  }
  // Sign convention. Near-equal magnitudes (within a few ulps) count as ties so
  // that e.g. (1, -1)/sqrt(2) does not flip on rounding noise.
  constexpr double kTieRel = 64 * std::numeric_limits<double>::epsilon();
  const Eigen::Index n = out.vectors.rows();
  for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) {
    const double peak = out.vectors.col(c).cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::abs(out.vectors(r, c)) >= peak * (1.0 - kTieRel)) {
        pivot = r;
        break;
      }
    }
    if (out.vectors(pivot, c) < 0) out.vectors.col(c) *= -1.0;
  }
  return out;
}

RepairResult spd_repair(const SymMatrix& s, double floor_ratio) {
  if (!(floor_ratio > 0)) fail(ErrorKind::InvalidArgument, "floor_ratio must be positive");
  EigDecomp e = eig_sym(s);
  const double lmax = e.values(e.values.size() - 1);
  const double floor = lmax > 0 ? floor_ratio * lmax : floor_ratio;
  std::size_t clamped = 0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values(i) <= floor) ++clamped;
  }
  if (clamped == 0) {
    return {SpdFactory::trusted(s.mat(), e.values(0)), 0};
  }
  Matrix rebuilt = spectral_apply(e, [floor](double l) { return std::max(l, floor); });
  return {SpdFactory::trusted(std::move(rebuilt), floor), clamped};
}

SpdMatrix spd_validate(const SymMatrix& s, bool repair, double floor_ratio) {
  if (repair) return spd_repair(s, floor_ratio).matrix;
  const EigDecomp e = eig_sym(s);
  if (!(e.values(0) > 0)) {
    std::ostringstream os;
    os << "matrix is not positive definite (min eigenvalue " << e.values(0) << ")";
    fail(ErrorKind::NotPositiveDefinite, os.str());
  }
  return SpdFactory::trusted(s.mat(), e.values(0));
}

SpdMatrix matrix_exp(const SymMatrix& s) {
  const EigDecomp e = eig_sym(s);
  bool in_range = true;
  Matrix out = spectral_apply(e, [&](double l) {
    const double v = std::exp(l);
    if (!std::isfinite(v) || v <= 0) in_range = false;
    return v;
  });
  if (!in_range) fail(ErrorKind::Overflow, "matrix exponential out of floating-point range");
  return SpdFactory::trusted(std::move(out), std::exp(e.values(0)));
}

SymMatrix matrix_log(const SpdMatrix& p) {
  const EigDecomp e = eig_sym(p);
  if (!(e.values(0) > 0)) {
    fail(ErrorKind::NotPositiveDefinite, "matrix logarithm of a non-positive-definite matrix");
  }
  return SymMatrix::symmetrized(spectral_apply(e, [](double l) { return std::log(l); }));
}

SpdMatrix matrix_power(const SpdMatrix& p, double t) {
  if (!std::isfinite(t)) fail(ErrorKind::InvalidArgument, "matrix power exponent must be finite");
  const EigDecomp e = eig_sym(p);
  if (!(e.values(0) > 0)) {
    fail(ErrorKind::NotPositiveDefinite, "matrix power of a non-positive-definite matrix");
  }
  bool in_range = true;
  Matrix out = spectral_apply(e, [&](double l) {
    const double v = std::pow(l, t);
    if (!std::isfinite(v) || v <= 0) in_range = false;
    return v;
  });
  if (!in_range) fail(ErrorKind::Overflow, "matrix power out of floating-point range");
  return SpdFactory::trusted(std::move(out));
}

double frob_inner(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a, b);
  return a.mat().cwiseProduct(b.mat()).sum();
}

double frob_norm(const SymMatrix& a) { return std::sqrt(frob_inner(a, a)); }

double log_det(const SpdMatrix& p) {
  Eigen::LLT<Matrix> llt(p.mat());
  if (llt.info() != Eigen::Success) {
    const EigDecomp e = eig_sym(p);
    return e.values.array().log().sum();
  }
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double det(const SpdMatrix& p) { return std::exp(log_det(p)); }

SpdMatrix congruence(const SpdMatrix& p, const Matrix& x) {
  if (x.rows() != x.cols() || static_cast<std::size_t>(x.rows()) != p.dim()) {
    fail(ErrorKind::DimensionMismatch, "congruence transform must be square and match the matrix");
  }
  return spd_validate(SymMatrix::symmetrized(x.transpose() * p.mat() * x));
}

}  // namespace spdgeom
