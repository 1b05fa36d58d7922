#pragma once

#include "spdgeom/error.hpp"
#include "spdgeom/spd_core.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace spdgeom {

struct MeanInit {
  enum class Kind { LogEuclidean, Euclidean, Identity, Index };
  Kind kind = Kind::LogEuclidean;
  std::size_t index = 0;  // used with Kind::Index
};

struct MeanConfig {
  int max_iters = 100;
  double grad_tol = 1e-10;  // relative to max(1, mean ||log A_i||_F)
  double step = 1.0;
  MeanInit init{};

  void validate() const;
};

struct MeanResult {
  SpdMatrix mean = SpdMatrix::identity(1);
  int iterations = 0;
  double final_grad_norm = 0.0;
  double scale = 1.0;
  bool converged = false;
  // Objective sum_i d^2(M, A_i) at every accepted iterate, starting with the
  // initial point.
  std::vector<double> objective_history;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& message, MeanResult best)
      : Error(ErrorKind::NoConvergence, message), best_(std::move(best)) {}
  const MeanResult& best() const noexcept { return best_; }

 private:
  MeanResult best_;
};

// Riemannian gradient descent on sum_i d^2(M, A_i). Throws NoConvergenceError
// (carrying the best iterate) when the gradient tolerance is not met.
MeanResult karcher_mean(const std::vector<SpdMatrix>& set, const MeanConfig& cfg = {});

SpdMatrix log_euclidean_mean(const std::vector<SpdMatrix>& set);
SymMatrix euclidean_mean(const std::vector<SpdMatrix>& set);

struct SwellingReport {
  std::vector<double> input_dets;
  double euclidean_det = 0.0;
  double karcher_det = 0.0;
  double ratio = 0.0;  // euclidean_det / karcher_det
  int karcher_iterations = 0;

  // key=value lines
  std::string to_text() const;
};

SwellingReport swelling_report(const std::vector<SpdMatrix>& set, const MeanConfig& cfg = {});

}  // namespace spdgeom
