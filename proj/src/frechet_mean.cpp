#include "spdgeom/frechet_mean.hpp"

#include "spdgeom/airm.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace spdgeom {

namespace {

constexpr int kMaxHalvings = 20;

void require_uniform(const std::vector<SpdMatrix>& set) {
  if (set.empty()) fail(ErrorKind::EmptySet, "mean of an empty set");
  const std::size_t n = set.front().dim();
  for (const SpdMatrix& a : set) {
    if (a.dim() != n) fail(ErrorKind::DimensionMismatch, "set mixes matrix dimensions");
  }
}

struct Evaluation {
  Matrix mean_tangent;  // (1/N) sum log(M^{-1/2} A_i M^{-1/2})
  double objective = 0.0;
};

// Fixed index order for the reduction keeps results bit-stable.
Evaluation evaluate(const BasePoint& base, const std::vector<SpdMatrix>& set) {
  const auto n = static_cast<Eigen::Index>(base.dim());
  Evaluation ev{Matrix::Zero(n, n), 0.0};
  for (const SpdMatrix& a : set) {
    const EigDecomp e = eig_sym(base.whiten(a));
    ev.mean_tangent += spectral_apply(e, [&](double l) {
      const double g = std::log(l);
      ev.objective += g * g;
      return g;
    });
  }
  ev.mean_tangent /= static_cast<double>(set.size());
  return ev;
}

SpdMatrix initial_point(const std::vector<SpdMatrix>& set, const MeanInit& init) {
  switch (init.kind) {
    case MeanInit::Kind::LogEuclidean: return log_euclidean_mean(set);
    case MeanInit::Kind::Euclidean: return spd_validate(euclidean_mean(set));
    case MeanInit::Kind::Identity: return SpdMatrix::identity(set.front().dim());
    case MeanInit::Kind::Index:
      if (init.index >= set.size()) fail(ErrorKind::InvalidArgument, "init index out of range");
      return set[init.index];
  }
  return set.front();
}

}  // namespace

void MeanConfig::validate() const {
  if (max_iters < 1) fail(ErrorKind::InvalidArgument, "max_iters must be >= 1");
  if (!(grad_tol > 0)) fail(ErrorKind::InvalidArgument, "grad_tol must be > 0");
  if (!(step > 0 && step <= 1)) fail(ErrorKind::InvalidArgument, "step must lie in (0, 1]");
}

MeanResult karcher_mean(const std::vector<SpdMatrix>& set, const MeanConfig& cfg) {
  cfg.validate();
  require_uniform(set);

  double log_norms = 0.0;
  for (const SpdMatrix& a : set) log_norms += frob_norm(matrix_log(a));
  const double scale = std::max(1.0, log_norms / static_cast<double>(set.size()));

  if (cfg.init.kind == MeanInit::Kind::Index && cfg.init.index >= set.size()) {
    fail(ErrorKind::InvalidArgument, "init index out of range");
  }
  if (set.size() == 1) {
    MeanResult r;
    r.mean = set.front();
    r.scale = scale;
    r.converged = true;
    r.objective_history = {0.0};
    return r;
  }

  SpdMatrix current = initial_point(set, cfg.init);
  BasePoint base(current);
  Evaluation ev = evaluate(base, set);

  MeanResult r;
  r.scale = scale;
  r.objective_history.push_back(ev.objective);

  for (int it = 0;; ++it) {
    r.final_grad_norm = ev.mean_tangent.norm();
    if (r.final_grad_norm <= cfg.grad_tol * scale) {
      r.converged = true;
      break;
    }
    if (it == cfg.max_iters) break;

    // Near the optimum the decrease falls below the resolution of the summed
    // objective; inside that band a smaller gradient decides.
    const double cond = std::pow(base.sqrt().mat().norm() * base.inv_sqrt().mat().norm(), 2);
    const double slack = 64 * std::numeric_limits<double>::epsilon() * cond * ev.objective;
    double step = cfg.step;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      const SpdMatrix candidate = exp_map_whitened(base, SymMatrix::symmetrized(step * ev.mean_tangent));
      BasePoint cand_base(candidate);
      Evaluation cand_ev = evaluate(cand_base, set);
      const bool decreased = cand_ev.objective <= ev.objective;
      const bool tie = cand_ev.objective <= ev.objective + slack &&
                       cand_ev.mean_tangent.norm() < r.final_grad_norm;
      if (decreased || tie) {
        current = candidate;
        base = std::move(cand_base);
        ev = std::move(cand_ev);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    ++r.iterations;
    r.objective_history.push_back(ev.objective);
  }

  r.mean = current;
  if (!r.converged) {
    std::ostringstream os;
    os << "Karcher mean did not reach gradient tolerance after " << r.iterations
       << " iterations (gradient norm " << r.final_grad_norm << ", target "
       << cfg.grad_tol * scale << ")";
    throw NoConvergenceError(os.str(), std::move(r));
  }
  return r;
}

SpdMatrix log_euclidean_mean(const std::vector<SpdMatrix>& set) {
  require_uniform(set);
  const auto n = static_cast<Eigen::Index>(set.front().dim());
  Matrix acc = Matrix::Zero(n, n);
  for (const SpdMatrix& a : set) acc += matrix_log(a).mat();
  acc /= static_cast<double>(set.size());
  return matrix_exp(SymMatrix::symmetrized(acc));
}

SymMatrix euclidean_mean(const std::vector<SpdMatrix>& set) {
  require_uniform(set);
  const auto n = static_cast<Eigen::Index>(set.front().dim());
  Matrix acc = Matrix::Zero(n, n);
  for (const SpdMatrix& a : set) acc += a.mat();
  acc /= static_cast<double>(set.size());
  return SymMatrix::symmetrized(acc);
}

SwellingReport swelling_report(const std::vector<SpdMatrix>& set, const MeanConfig& cfg) {
  if (set.size() < 2) fail(ErrorKind::InvalidArgument, "swelling report needs at least two matrices");
  SwellingReport rep;
  for (const SpdMatrix& a : set) rep.input_dets.push_back(det(a));
  const SpdMatrix euclid = spd_validate(euclidean_mean(set));
  const MeanResult karcher = karcher_mean(set, cfg);
  const double ld_e = log_det(euclid);
  const double ld_k = log_det(karcher.mean);
  rep.euclidean_det = std::exp(ld_e);
  rep.karcher_det = std::exp(ld_k);
  rep.ratio = std::exp(ld_e - ld_k);
  rep.karcher_iterations = karcher.iterations;
  return rep;
}

std::string SwellingReport::to_text() const {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "count=" << input_dets.size() << "\n";
  for (std::size_t i = 0; i < input_dets.size(); ++i) os << "det_input_" << i << "=" << num(input_dets[i]) << "\n";
  os << "det_euclidean=" << num(euclidean_det) << "\n";
  os << "det_karcher=" << num(karcher_det) << "\n";
  os << "ratio=" << num(ratio) << "\n";
  os << "karcher_iterations=" << karcher_iterations << "\n";
  return os.str();
}

}  // namespace spdgeom
