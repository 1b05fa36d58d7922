#pragma once

// Deterministic linear classifiers and evaluation helpers.

#include "spdgeom/spd_core.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace spdgeom {

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Shuffles with SplitMix64(seed) and sends the first ceil(N * test_frac) items
// to the test side. With labels, each class (ascending label order) is split
// on its own, sharing one generator.
Split split(std::size_t n, double test_frac, std::uint64_t seed, const std::vector<long>& labels = {});

enum class ModelKind { Ridge, Svm };
std::string_view to_string(ModelKind k) noexcept;
ModelKind parse_model_kind(std::string_view s);

struct LinearModel {
  ModelKind kind = ModelKind::Ridge;
  Matrix weights;             // C x F
  Vector biases;              // C
  std::vector<long> class_ids;  // ascending
  double hyper = 1.0;         // ridge lambda or SVM cost
  std::string feature_note;   // raw | tangent-ambient | tangent-whitened | pga-k ...

  Matrix scores(const Matrix& x) const;  // N x C
  std::vector<long> predict(const Matrix& x) const;
};

// One-vs-rest least squares on +-1 targets, bias unpenalized.
LinearModel ridge_fit(const Matrix& x, const std::vector<long>& y, double lambda = 1.0);

struct SvmOptions {
  double cost = 1.0;
  int epochs = 200;
  std::uint64_t seed = 0;
};

struct SvmTrace {
  // Primal objective of the running average of all iterates at the end of
  // each epoch, per binary problem.
  std::vector<std::vector<double>> epoch_objective;
};

// Pegasos sub-gradient descent on lambda/2 ||w||^2 + mean hinge, with
// lambda = 1 / (cost * N). The bias is a constant feature of value 1 and is
// regularized with the weights. The returned model averages the last 10% of
// iterates. Two classes train a single problem (rows are -w, +w); more
// classes train one-vs-rest.
LinearModel svm_fit(const Matrix& x, const std::vector<long>& y, const SvmOptions& opts = {},
                    SvmTrace* trace = nullptr);

struct ConfusionMatrix {
  std::vector<long> class_ids;
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> counts;  // row = true, col = predicted
  Matrix normalized;
  std::vector<bool> empty_rows;
};

struct Evaluation {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::vector<long> predictions;
};

Evaluation evaluate(const LinearModel& model, const Matrix& x, const std::vector<long>& y);
ConfusionMatrix confusion_from(const std::vector<long>& class_ids, const std::vector<long>& truth,
                               const std::vector<long>& predicted);

std::string model_to_json(const LinearModel& m);
LinearModel model_from_json(std::string_view text);

}  // namespace spdgeom
