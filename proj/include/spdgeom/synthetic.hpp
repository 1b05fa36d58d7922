#pragma once

// Seeded generators: random SPD matrices, VAR(1) runs with class structure,
// and woven-texture images with optional defect strokes. All streams come from
// SplitMix64 + Box-Muller, so output depends on the seed alone.

#include "spdgeom/image_pipeline.hpp"
#include "spdgeom/rng.hpp"
#include "spdgeom/spd_core.hpp"
#include "spdgeom/ts_pipeline.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spdgeom {

// Q diag(lambda) Q^T, lambda ~ U[lo, hi], Q from the QR of a Gaussian matrix
// (signs fixed so R has a positive diagonal).
SpdMatrix random_spd(std::size_t n, double lo, double hi, std::uint64_t seed);
SpdMatrix random_spd(std::size_t n, double lo, double hi, SplitMix64& rng);

Matrix random_orthogonal(std::size_t n, SplitMix64& rng);
// U diag(s) V^T with log-uniform singular values in [1, cond_max].
Matrix random_invertible(std::size_t n, double cond_max, SplitMix64& rng);
// Symmetric matrix with eigenvalues ~ U[lo, hi].
SymMatrix random_sym(std::size_t n, double lo, double hi, SplitMix64& rng);

inline constexpr double kMaxSpectralRadius = 0.95;

class VarSpec {
 public:
  // Throws InvalidArgument when the spectral radius of `coef` is >= 0.95.
  VarSpec(Matrix coef, SpdMatrix noise_cov, std::size_t steps, std::uint64_t seed, std::size_t burn_in = 200);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(coef_.rows()); }
  const Matrix& coef() const noexcept { return coef_; }
  const SpdMatrix& noise_cov() const noexcept { return noise_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t burn_in() const noexcept { return burn_in_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  Matrix coef_;
  SpdMatrix noise_;
  std::size_t steps_;
  std::uint64_t seed_;
  std::size_t burn_in_;
};

double spectral_radius(const Matrix& a);

// x(t+1) = coef x(t) + e(t), e ~ N(0, noise_cov) through its Cholesky factor;
// starts at zero and discards the burn-in.
RunRecord gen_var_run(const VarSpec& spec, std::string run_id = "run", long label = 0);

struct ClassBenchmarkConfig {
  std::size_t n_classes = 5;
  std::size_t runs_per_class = 50;
  std::size_t n = 12;
  std::size_t m = 2000;
  std::uint64_t seed = 1;
  double delta = 0.5;
  std::size_t burn_in = 200;
};

struct ClassBenchmark {
  std::vector<RunRecord> runs;   // class-major order
  std::vector<long> labels;
  std::vector<Matrix> class_coef;
  std::vector<SpdMatrix> class_noise;
  Vector variable_scales;
};

// Class 0 is the baseline process. Class k >= 1 applies a seeded structural
// change of size delta: odd k scales the innovation noise on a block of
// variables by (1 + delta), even k adds a cross-coupling of size delta to the
// coefficient matrix. Variables are reported in heterogeneous units (scales
// spanning three decades), as plant sensors are.
ClassBenchmark gen_class_benchmark(const ClassBenchmarkConfig& cfg);

struct TextureConfig {
  std::size_t n_normal = 60;
  std::size_t n_defective = 60;
  std::size_t size = 64;
  std::uint64_t seed = 1;
};

// Woven texture (two crossed gratings, random phase, period, and small
// rotation, plus pixel noise). Defective samples add one bright or dark
// stroke at a random position and angle.
GrayImage gen_texture(std::size_t size, bool defective, std::uint64_t seed);

struct TextureBenchmark {
  std::vector<ImageRecord> images;  // normal first, label 0 normal / 1 defective
};
TextureBenchmark gen_texture_benchmark(const TextureConfig& cfg);

}  // namespace spdgeom
