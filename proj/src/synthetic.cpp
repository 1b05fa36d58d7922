#include "spdgeom/synthetic.hpp"

#include "spdgeom/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace spdgeom {

namespace {

Matrix gaussian_matrix(std::size_t n, SplitMix64& rng) {
  const auto k = static_cast<Eigen::Index>(n);
  Matrix g(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) g(i, j) = rng.normal();
  }
  return g;
}

std::vector<std::size_t> pick_distinct(std::size_t n, std::size_t count, SplitMix64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  shuffle(idx, rng);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string padded(const char* prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
  return buf;
}

}  // namespace

Matrix random_orthogonal(std::size_t n, SplitMix64& rng) {
  const Matrix g = gaussian_matrix(n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    if (r(i, i) < 0) q.col(i) *= -1.0;
  }
  return q;
}

SpdMatrix random_spd(std::size_t n, double lo, double hi, SplitMix64& rng) {
  if (!(lo > 0 && lo <= hi)) fail(ErrorKind::InvalidArgument, "eigenvalue range must satisfy 0 < lo <= hi");
  const Matrix q = random_orthogonal(n, rng);
  Vector lambda(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda(i) = rng.uniform(lo, hi);
  return SpdFactory::trusted(q * lambda.asDiagonal() * q.transpose(), lambda.minCoeff());
}

SpdMatrix random_spd(std::size_t n, double lo, double hi, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return random_spd(n, lo, hi, rng);
}

Matrix random_invertible(std::size_t n, double cond_max, SplitMix64& rng) {
  if (!(cond_max >= 1)) fail(ErrorKind::InvalidArgument, "condition number cap must be >= 1");
  const Matrix u = random_orthogonal(n, rng);
  const Matrix v = random_orthogonal(n, rng);
  Vector s(static_cast<Eigen::Index>(n));
  const double log_cap = std::log(cond_max);
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::exp(rng.uniform(0.0, log_cap));
  return u * s.asDiagonal() * v.transpose();
}

SymMatrix random_sym(std::size_t n, double lo, double hi, SplitMix64& rng) {
  const Matrix q = random_orthogonal(n, rng);
  Vector lambda(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda(i) = rng.uniform(lo, hi);
  return SymMatrix::symmetrized(q * lambda.asDiagonal() * q.transpose());
}

double spectral_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) fail(ErrorKind::ConvergenceFailure, "eigenvalues of VAR coefficient did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

VarSpec::VarSpec(Matrix coef, SpdMatrix noise_cov, std::size_t steps, std::uint64_t seed, std::size_t burn_in)
    : coef_(std::move(coef)), noise_(std::move(noise_cov)), steps_(steps), seed_(seed), burn_in_(burn_in) {
  if (coef_.rows() != coef_.cols() || static_cast<std::size_t>(coef_.rows()) != noise_.dim()) {
    fail(ErrorKind::DimensionMismatch, "VAR coefficient and noise covariance dimensions differ");
  }
  if (steps_ < 1) fail(ErrorKind::InvalidArgument, "VAR run needs at least one step");
  const double rho = spectral_radius(coef_);
  if (!(rho < kMaxSpectralRadius)) {
    fail(ErrorKind::InvalidArgument, "VAR coefficient spectral radius " + std::to_string(rho) + " is not below 0.95");
  }
}

RunRecord gen_var_run(const VarSpec& spec, std::string run_id, long label) {
  const auto n = static_cast<Eigen::Index>(spec.dim());
  Eigen::LLT<Matrix> llt(spec.noise_cov().mat());
  if (llt.info() != Eigen::Success) fail(ErrorKind::NotPositiveDefinite, "noise covariance has no Cholesky factor");
  const Matrix chol = llt.matrixL();
  SplitMix64 rng(spec.seed());
  Vector x = Vector::Zero(n);
  Vector z(n);
  RunRecord run{std::move(run_id), label, Matrix(static_cast<Eigen::Index>(spec.steps()), n)};
  const std::size_t total = spec.burn_in() + spec.steps();
  for (std::size_t t = 0; t < total; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    x = spec.coef() * x + chol * z;
    if (t >= spec.burn_in()) run.signals.row(static_cast<Eigen::Index>(t - spec.burn_in())) = x.transpose();
  }
  return run;
}

ClassBenchmark gen_class_benchmark(const ClassBenchmarkConfig& cfg) {
  if (cfg.n_classes < 2) fail(ErrorKind::InvalidArgument, "benchmark needs at least two classes");
  if (cfg.n < 2) fail(ErrorKind::InvalidArgument, "benchmark needs at least two variables");
  if (cfg.runs_per_class < 1) fail(ErrorKind::InvalidArgument, "benchmark needs at least one run per class");
  if (!(cfg.delta >= 0)) fail(ErrorKind::InvalidArgument, "delta must be >= 0");
  const std::size_t n = cfg.n;
  const auto nn = static_cast<Eigen::Index>(n);

  // Baseline process in normalized units z; sensors report x = S z.
  SplitMix64 rng(derive_seed(cfg.seed, 0));
  Matrix a0 = gaussian_matrix(n, rng) / std::sqrt(static_cast<double>(n));
  a0 *= 0.5 / spectral_radius(a0);
  const SpdMatrix c0 = random_spd(n, 0.5, 2.0, rng);
  Vector scales(nn);
  for (Eigen::Index i = 0; i < nn; ++i) scales(i) = std::pow(10.0, rng.uniform(-2.0, 1.0));
  const Matrix s = scales.asDiagonal();
  const Matrix s_inv = scales.cwiseInverse().asDiagonal();

  ClassBenchmark out;
  out.variable_scales = scales;
  const std::size_t block = std::max<std::size_t>(2, n / 4);
  for (std::size_t k = 0; k < cfg.n_classes; ++k) {
    SplitMix64 crng(derive_seed(cfg.seed, 1000 + k));
    Matrix a = a0;
    Matrix c = c0.mat();
    if (k > 0 && k % 2 == 1) {
      Vector d = Vector::Ones(nn);
      for (std::size_t i : pick_distinct(n, block, crng)) d(static_cast<Eigen::Index>(i)) = 1.0 + cfg.delta;
      c = d.asDiagonal() * c * d.asDiagonal();
    } else if (k > 0) {
      const auto pair = pick_distinct(n, 2, crng);
      const bool forward = crng.uniform() < 0.5;
      const auto i = static_cast<Eigen::Index>(forward ? pair[0] : pair[1]);
      const auto j = static_cast<Eigen::Index>(forward ? pair[1] : pair[0]);
      a(i, j) += cfg.delta;
      const double rho = spectral_radius(a);
      if (rho >= 0.9) a *= 0.9 / rho;
    }
    const Matrix coef = s * a * s_inv;
    const SpdMatrix noise = SpdFactory::trusted(s * c * s);
    out.class_coef.push_back(coef);
    out.class_noise.push_back(noise);
    for (std::size_t r = 0; r < cfg.runs_per_class; ++r) {
      const std::size_t run_index = k * cfg.runs_per_class + r;
      const VarSpec spec(coef, noise, cfg.m, derive_seed(cfg.seed, run_index + 1000000), cfg.burn_in);
      out.runs.push_back(gen_var_run(spec, padded("run_", run_index), static_cast<long>(k)));
      out.labels.push_back(static_cast<long>(k));
    }
  }
  return out;
}

GrayImage gen_texture(std::size_t size, bool defective, std::uint64_t seed) {
  if (size < 8) fail(ErrorKind::InvalidArgument, "texture size must be >= 8");
  SplitMix64 rng(seed);
  const double theta = rng.uniform(-0.2, 0.2);
  const double period_u = rng.uniform(5.0, 7.0);
  const double period_v = rng.uniform(5.0, 7.0);
  const double phase_u = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double phase_v = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double base = rng.uniform(0.4, 0.6);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const auto k = static_cast<Eigen::Index>(size);
  GrayImage img{Matrix(k, k)};
  for (Eigen::Index y = 0; y < k; ++y) {
    for (Eigen::Index x = 0; x < k; ++x) {
      const double u = ct * static_cast<double>(x) + st * static_cast<double>(y);
      const double v = -st * static_cast<double>(x) + ct * static_cast<double>(y);
      const double weave = std::sin(2 * std::numbers::pi * u / period_u + phase_u) +
                           std::sin(2 * std::numbers::pi * v / period_v + phase_v);
      img.pixels(y, x) = base + 0.15 * weave + 0.03 * rng.normal();
    }
  }
  if (defective) {
    const double cx = rng.uniform(0.2, 0.8) * static_cast<double>(size);
    const double cy = rng.uniform(0.2, 0.8) * static_cast<double>(size);
    const double angle = rng.uniform(0.0, std::numbers::pi);
    const double half_len = rng.uniform(8.0, 20.0);
    const double width = rng.uniform(1.0, 2.5);
    const double amp = rng.uniform() < 0.5 ? 0.35 : -0.35;
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    for (Eigen::Index y = 0; y < k; ++y) {
      for (Eigen::Index x = 0; x < k; ++x) {
        const double px = static_cast<double>(x) - cx;
        const double py = static_cast<double>(y) - cy;
        const double along = px * dx + py * dy;
        const double across = -px * dy + py * dx;
        const double overshoot = std::max(0.0, std::abs(along) - half_len);
        const double dist2 = across * across + overshoot * overshoot;
        img.pixels(y, x) += amp * std::exp(-dist2 / (2 * width * width));
      }
    }
  }
  img.pixels = img.pixels.cwiseMax(0.0).cwiseMin(1.0);
  return img;
}

TextureBenchmark gen_texture_benchmark(const TextureConfig& cfg) {
  if (cfg.n_normal < 1 || cfg.n_defective < 1) fail(ErrorKind::InvalidArgument, "need images of both classes");
  TextureBenchmark out;
  const std::size_t total = cfg.n_normal + cfg.n_defective;
  for (std::size_t i = 0; i < total; ++i) {
    const bool defective = i >= cfg.n_normal;
    out.images.push_back({padded("img_", i), defective ? 1L : 0L,
                          gen_texture(cfg.size, defective, derive_seed(cfg.seed, i))});
  }
  return out;
}

}  // namespace spdgeom
