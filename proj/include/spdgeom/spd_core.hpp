#pragma once

// Dense symmetric and symmetric positive definite matrices, spectral
// functions, and Frobenius algebra.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace spdgeom {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric n x n matrix with finite entries. Symmetry is exact: every
// construction path stores (A + A^T) / 2.
class SymMatrix {
 public:
  // Validates finiteness and relative skew ||A - A^T||_F <= tol * max(1, ||A||_F)
  // before symmetrizing. Throws AsymmetricInput / NonFiniteValue.
  static SymMatrix from_raw(const Matrix& raw, double tol = 1e-8);

  // Symmetrizes a computed product whose skew is pure rounding. Only checks
  // shape and finiteness.
  static SymMatrix symmetrized(const Matrix& raw);

  static SymMatrix zero(std::size_t n);
  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(const Vector& d);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& mat() const noexcept { return m_; }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 protected:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m) : m_(std::move(m)) {}

  Matrix m_;
};

// Symmetric positive definite matrix. Obtained through spd_validate or from
// spectral functions that guarantee positivity.
class SpdMatrix : public SymMatrix {
 public:
  static SpdMatrix identity(std::size_t n);

  // Smallest eigenvalue, when it was computed during validation.
  std::optional<double> min_eig_hint() const noexcept { return min_eig_; }

 private:
  friend class SpdFactory;
  SpdMatrix(Matrix m, std::optional<double> min_eig)
      : SymMatrix(std::move(m)), min_eig_(min_eig) {}

  std::optional<double> min_eig_;
};

struct EigDecomp {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

struct RepairResult {
  SpdMatrix matrix;
  std::size_t clamped = 0;  // eigenvalues raised to the floor
};

inline constexpr double kDefaultFloorRatio = 1e-10;

// Returns `s` unchanged when all eigenvalues are positive and repair is off.
// With repair, eigenvalues <= floor_ratio * lambda_max are raised to that
// floor (to floor_ratio itself when lambda_max <= 0).
SpdMatrix spd_validate(const SymMatrix& s, bool repair = false,
                       double floor_ratio = kDefaultFloorRatio);
RepairResult spd_repair(const SymMatrix& s, double floor_ratio = kDefaultFloorRatio);

// Symmetric eigendecomposition with a deterministic sign convention: the
// largest-magnitude entry of each eigenvector is positive, ties going to the
// lowest row index.
EigDecomp eig_sym(const SymMatrix& s);

SpdMatrix matrix_exp(const SymMatrix& s);
SymMatrix matrix_log(const SpdMatrix& p);
SpdMatrix matrix_power(const SpdMatrix& p, double t);
inline SpdMatrix matrix_sqrt(const SpdMatrix& p) { return matrix_power(p, 0.5); }
inline SpdMatrix matrix_inv_sqrt(const SpdMatrix& p) { return matrix_power(p, -0.5); }

double frob_inner(const SymMatrix& a, const SymMatrix& b);
double frob_norm(const SymMatrix& a);

double log_det(const SpdMatrix& p);
double det(const SpdMatrix& p);

// X^T P X for square invertible X.
SpdMatrix congruence(const SpdMatrix& p, const Matrix& x);

// U diag(f(lambda)) U^T, symmetrized.
template <class F>
Matrix spectral_apply(const EigDecomp& e, F&& f) {
  Vector mapped(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) mapped(i) = f(e.values(i));
  return e.vectors * mapped.asDiagonal() * e.vectors.transpose();
}

// Friend gateway for the few places allowed to assert positivity without a
// fresh eigendecomposition (spectral constructions with positive spectrum).
class SpdFactory {
 public:
  static SpdMatrix trusted(Matrix m, std::optional<double> min_eig = std::nullopt);
};

}  // namespace spdgeom
