#pragma once

// Multivariate time-series runs -> per-run sample covariance matrices.

#include "spdgeom/spd_core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace spdgeom {

struct RunRecord {
  std::string run_id;
  long label = 0;
  Matrix signals;  // m x n, rows = time steps, columns = variables
};

struct CovMeta {
  std::string id;
  bool centered = true;
  std::size_t repaired_eigenvalues = 0;
  bool short_record = false;  // fewer than n + 1 samples
};

struct LabeledCovSet {
  std::vector<SpdMatrix> matrices;
  std::vector<long> labels;
  std::vector<CovMeta> meta;

  std::size_t size() const noexcept { return matrices.size(); }
};

struct CovEstimate {
  SpdMatrix matrix;
  std::size_t repaired_eigenvalues = 0;
};

// Manifest lines: run_id,relative_path,label (an optional header line is
// skipped). Paths are resolved against `data_dir`.
std::vector<RunRecord> load_runs(const std::filesystem::path& data_dir, const std::filesystem::path& manifest,
                                 bool run_files_have_header = false);

// Centered: subtract column means, then X^T X / (m - 1). Uncentered: the
// literal second-moment form. Either way the result is repaired to SPD with a
// relative eigenvalue floor of 1e-10.
CovEstimate run_covariance(const RunRecord& run, bool center = true);

LabeledCovSet build_cov_set(const std::vector<RunRecord>& runs, bool center = true);

// `<id>.cov.csv` per matrix plus an `id,label` file.
void write_cov_set(const LabeledCovSet& set, const std::filesystem::path& out_dir,
                   const std::filesystem::path& labels_path);

// Reads matrices listed in an `id,label` file from `dir/<id>.cov.csv`.
LabeledCovSet read_cov_set(const std::filesystem::path& dir, const std::filesystem::path& labels_path);

}  // namespace spdgeom
