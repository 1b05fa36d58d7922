#pragma once

// Independent reference routes used as oracles by the tests. Nothing here
// calls into the spectral code under test.

#include "spdgeom/error.hpp"
#include "spdgeom/rng.hpp"
#include "spdgeom/spd_core.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace testing_support {

using spdgeom::Matrix;
using spdgeom::Vector;

// Generator for test inputs, separate from the library's SplitMix64 so test
// data does not share a stream with the code under test.
inline Matrix gaussian(std::mt19937_64& gen, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix g(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) g(i, j) = nd(gen);
  }
  return g;
}

inline Matrix orthogonal(std::mt19937_64& gen, Eigen::Index n) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(gen, n, n));
  return qr.householderQ();
}

// Q diag(lambda) Q^T with log-uniform eigenvalues in [lo, hi].
inline Matrix spd_raw(std::mt19937_64& gen, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Vector l(n);
  for (Eigen::Index i = 0; i < n; ++i) l(i) = std::exp(u(gen));
  const Matrix q = orthogonal(gen, n);
  const Matrix p = q * l.asDiagonal() * q.transpose();
  return 0.5 * (p + p.transpose());
}

inline spdgeom::SpdMatrix spd(std::mt19937_64& gen, Eigen::Index n, double lo = 0.1, double hi = 10.0) {
  return spdgeom::spd_validate(spdgeom::SymMatrix::symmetrized(spd_raw(gen, n, lo, hi)));
}

inline spdgeom::SymMatrix sym(std::mt19937_64& gen, Eigen::Index n, double scale = 1.0) {
  const Matrix g = gaussian(gen, n, n) * scale;
  return spdgeom::SymMatrix::symmetrized(0.5 * (g + g.transpose()));
}

// Invertible matrix with condition number <= cond.
inline Matrix invertible(std::mt19937_64& gen, Eigen::Index n, double cond) {
  std::uniform_real_distribution<double> u(0.0, std::log(cond));
  Vector s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = std::exp(u(gen));
  return orthogonal(gen, n) * s.asDiagonal() * orthogonal(gen, n).transpose();
}

// Pade/Schur-based matrix functions (Eigen unsupported module).
inline Matrix ref_exp(const Matrix& a) { return a.exp(); }
inline Matrix ref_log(const Matrix& a) { return a.log(); }
inline Matrix ref_sqrt(const Matrix& a) { return a.sqrt(); }
inline Matrix ref_pow(const Matrix& a, double t) { return a.pow(t); }

// Distance from the generalized eigenvalues of (B, A): B v = lambda A v.
inline double ref_distance(const Matrix& a, const Matrix& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(b, a);
  double s = 0.0;
  for (Eigen::Index i = 0; i < ges.eigenvalues().size(); ++i) {
    const double l = std::log(ges.eigenvalues()(i));
    s += l * l;
  }
  return std::sqrt(s);
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("spdgeom_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing_support

#define EXPECT_THROW_KIND(stmt, k)                              \
  do {                                                          \
    try {                                                       \
      stmt;                                                     \
      ADD_FAILURE() << "expected " #k;                          \
    } catch (const spdgeom::Error& e) {                         \
      EXPECT_EQ(e.kind(), spdgeom::ErrorKind::k) << e.what();   \
    }                                                           \
  } while (0)
