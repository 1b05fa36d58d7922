#include "spdgeom/classifiers.hpp"
#include "spdgeom/synthetic.hpp"
#include "spdgeom/tangent.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace spdgeom;
namespace ts = testing_support;

TEST(Rng, SplitMixReferenceSequence) {
  // First outputs for seed 0 of the published SplitMix64 generator.
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng.next(), 0x06c45d188009454fULL);
}

TEST(Rng, UniformAndNormalMoments) {
  SplitMix64 rng(42);
  double s = 0, s2 = 0, u = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    const double v = rng.uniform();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
    u += v;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(u / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, BelowIsInRangeAndDeriveSeedSpreads) {
  SplitMix64 rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
}

TEST(RandomSpd, UnitRangeGivesIdentity) {
  const SpdMatrix p = random_spd(5, 1.0, 1.0, 17);
  EXPECT_LE((p.mat() - Matrix::Identity(5, 5)).norm(), 1e-12);
}

TEST(RandomSpd, EigenvaluesInRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SpdMatrix p = random_spd(8, 0.5, 3.0, seed);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(p.mat(), Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), 0.5 - 1e-9);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 3.0 + 1e-9);
  }
}

TEST(RandomSpd, Deterministic) {
  EXPECT_EQ(random_spd(6, 0.1, 10, 5).mat(), random_spd(6, 0.1, 10, 5).mat());
  EXPECT_NE(random_spd(6, 0.1, 10, 5).mat(), random_spd(6, 0.1, 10, 6).mat());
  EXPECT_THROW_KIND(random_spd(3, 2.0, 1.0, 1), InvalidArgument);
  EXPECT_THROW_KIND(random_spd(3, 0.0, 1.0, 1), InvalidArgument);
}

TEST(RandomOrthogonal, Orthonormal) {
  SplitMix64 rng(8);
  const Matrix q = random_orthogonal(10, rng);
  EXPECT_LE((q.transpose() * q - Matrix::Identity(10, 10)).norm(), 1e-12);
}

TEST(RandomInvertible, ConditionCapped) {
  SplitMix64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const Matrix x = random_invertible(6, 1e3, rng);
    const Eigen::JacobiSVD<Matrix> svd(x);
    EXPECT_LE(svd.singularValues()(0) / svd.singularValues()(5), 1e3 * (1 + 1e-9));
  }
}

TEST(VarSpec, RejectsUnstable) {
  const Matrix a = 0.96 * Matrix::Identity(3, 3);
  EXPECT_THROW_KIND(VarSpec(a, SpdMatrix::identity(3), 10, 1), InvalidArgument);
  EXPECT_NO_THROW(VarSpec(0.94 * Matrix::Identity(3, 3), SpdMatrix::identity(3), 10, 1));
  EXPECT_THROW_KIND(VarSpec(Matrix::Zero(2, 2), SpdMatrix::identity(3), 10, 1), DimensionMismatch);
}

TEST(VarRun, WhiteNoiseCovariance) {
  const std::size_t m = 20000;
  const RunRecord r = gen_var_run(VarSpec(Matrix::Zero(4, 4), SpdMatrix::identity(4), m, 77));
  ASSERT_EQ(r.signals.rows(), static_cast<Eigen::Index>(m));
  const Matrix c = run_covariance(r).matrix.mat();
  EXPECT_LE((c - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 4.0 / std::sqrt(static_cast<double>(m)));
}

TEST(VarRun, StationaryCovarianceMatchesLyapunovSolution) {
  // AR(1) scalar: var = s2 / (1 - a^2).
  Matrix a = Matrix::Constant(1, 1, 0.6);
  const SpdMatrix q = spd_validate(SymMatrix::from_raw(Matrix::Constant(1, 1, 2.0)));
  const RunRecord r = gen_var_run(VarSpec(a, q, 200000, 78));
  const double want = 2.0 / (1 - 0.36);
  EXPECT_NEAR(run_covariance(r).matrix(0, 0), want, 0.03 * want);
}

TEST(VarRun, Deterministic) {
  const VarSpec spec(0.5 * Matrix::Identity(3, 3), SpdMatrix::identity(3), 100, 5);
  EXPECT_EQ(gen_var_run(spec).signals, gen_var_run(spec).signals);
}

TEST(ClassBenchmark, Cardinality) {
  ClassBenchmarkConfig cfg;
  cfg.n_classes = 3;
  cfg.runs_per_class = 20;
  cfg.n = 4;
  cfg.m = 100;
  const ClassBenchmark b = gen_class_benchmark(cfg);
  EXPECT_EQ(b.runs.size(), 60u);
  EXPECT_EQ(b.labels.size(), 60u);
  EXPECT_EQ(b.class_coef.size(), 3u);
  EXPECT_EQ(b.runs[59].label, 2);
  EXPECT_EQ(b.runs[0].run_id, "run_0000");
  for (const Matrix& a : b.class_coef) EXPECT_LT(spectral_radius(a), 0.95);
  cfg.n_classes = 1;
  EXPECT_THROW_KIND(gen_class_benchmark(cfg), InvalidArgument);
}

TEST(ClassBenchmark, CovariancesNeedNoRepairAtTenN) {
  ClassBenchmarkConfig cfg;
  cfg.n_classes = 3;
  cfg.runs_per_class = 5;
  cfg.n = 6;
  cfg.m = 60;
  const ClassBenchmark b = gen_class_benchmark(cfg);
  for (const RunRecord& r : b.runs) {
    const CovEstimate c = run_covariance(r);
    EXPECT_EQ(c.repaired_eigenvalues, 0u);
  }
}

TEST(ClassBenchmark, BitDeterministic) {
  ClassBenchmarkConfig cfg;
  cfg.runs_per_class = 2;
  cfg.m = 50;
  const ClassBenchmark a = gen_class_benchmark(cfg);
  const ClassBenchmark b = gen_class_benchmark(cfg);
  for (std::size_t i = 0; i < a.runs.size(); ++i) EXPECT_EQ(a.runs[i].signals, b.runs[i].signals);
}

TEST(ClassBenchmark, NullDeltaIsNearChance) {
  ClassBenchmarkConfig cfg;
  cfg.n_classes = 4;
  cfg.runs_per_class = 40;
  cfg.n = 5;
  cfg.m = 400;
  cfg.delta = 0.0;
  const ClassBenchmark b = gen_class_benchmark(cfg);
  const LabeledCovSet covs = build_cov_set(b.runs);
  const TangentDataset ds = embed(covs.matrices, covs.labels, std::nullopt, Embedding::Whitened);
  const Split sp = split(ds.labels.size(), 0.3, 11, ds.labels);
  Matrix xtr(static_cast<Eigen::Index>(sp.train.size()), ds.vectors.cols());
  Matrix xte(static_cast<Eigen::Index>(sp.test.size()), ds.vectors.cols());
  std::vector<long> ytr, yte;
  for (std::size_t i = 0; i < sp.train.size(); ++i) {
    xtr.row(static_cast<Eigen::Index>(i)) = ds.vectors.row(static_cast<Eigen::Index>(sp.train[i]));
    ytr.push_back(ds.labels[sp.train[i]]);
  }
  for (std::size_t i = 0; i < sp.test.size(); ++i) {
    xte.row(static_cast<Eigen::Index>(i)) = ds.vectors.row(static_cast<Eigen::Index>(sp.test[i]));
    yte.push_back(ds.labels[sp.test[i]]);
  }
  const double acc = evaluate(ridge_fit(xtr, ytr), xte, yte).accuracy;
  const double n = static_cast<double>(yte.size());
  const double band = 3.0 * std::sqrt(0.25 * 0.75 / n);
  EXPECT_NEAR(acc, 0.25, band);
}

TEST(Textures, ShapeRangeDeterminism) {
  const GrayImage a = gen_texture(64, false, 3);
  EXPECT_EQ(a.pixels.rows(), 64);
  EXPECT_GE(a.pixels.minCoeff(), 0.0);
  EXPECT_LE(a.pixels.maxCoeff(), 1.0);
  EXPECT_EQ(a.pixels, gen_texture(64, false, 3).pixels);
  EXPECT_NE(gen_texture(64, true, 3).pixels, a.pixels);
  TextureConfig cfg;
  cfg.n_normal = 3;
  cfg.n_defective = 2;
  cfg.size = 16;
  const TextureBenchmark b = gen_texture_benchmark(cfg);
  ASSERT_EQ(b.images.size(), 5u);
  EXPECT_EQ(b.images[2].label, 0);
  EXPECT_EQ(b.images[3].label, 1);
  EXPECT_EQ(b.images[4].image_id, "img_0004");
}
