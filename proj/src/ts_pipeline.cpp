#include "spdgeom/ts_pipeline.hpp"

#include "spdgeom/error.hpp"
#include "spdgeom/matrix_io.hpp"

#include <cstdlib>
#include <sstream>

namespace spdgeom {

namespace {

bool looks_like_integer(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtol(s.c_str(), &end, 10);
  return *end == '\0';
}

}  // namespace

std::vector<RunRecord> load_runs(const std::filesystem::path& data_dir, const std::filesystem::path& manifest,
                                 bool run_files_have_header) {
  std::string text;
  try {
    text = io::read_text(manifest);
  } catch (const Error& e) {
    fail(ErrorKind::ManifestError, e.what());
  }
  std::istringstream in(text);
  std::string line;
  std::vector<RunRecord> runs;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = io::trim(line);
    if (t.empty()) continue;
    const auto f = io::split_csv_line(t);
    const std::string ctx = manifest.string() + " line " + std::to_string(line_no);
    if (f.size() != 3) fail(ErrorKind::ManifestError, ctx + ": expected run_id,path,label");
    if (!looks_like_integer(f[2])) {
      if (runs.empty() && line_no == 1) continue;  // header
      fail(ErrorKind::ManifestError, ctx + ": label '" + f[2] + "' is not an integer");
    }
    RunRecord run;
    run.run_id = f[0];
    run.label = std::strtol(f[2].c_str(), nullptr, 10);
    try {
      run.signals = io::read_csv_matrix(data_dir / f[1], run_files_have_header);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::IoError) fail(ErrorKind::ManifestError, "run " + run.run_id + ": " + e.what());
      throw;
    }
    for (Eigen::Index r = 0; r < run.signals.rows(); ++r) {
      if (!run.signals.row(r).allFinite()) {
        fail(ErrorKind::NonFiniteValue, "run " + run.run_id + " row " + std::to_string(r + 1) + " has a non-finite value");
      }
    }
    if (!runs.empty() && runs.front().signals.cols() != run.signals.cols()) {
      fail(ErrorKind::DimensionMismatch, "run " + run.run_id + " has " + std::to_string(run.signals.cols()) +
                                             " variables, expected " + std::to_string(runs.front().signals.cols()));
    }
    runs.push_back(std::move(run));
  }
  if (runs.empty()) fail(ErrorKind::ManifestError, manifest.string() + ": no runs listed");
  return runs;
}

CovEstimate run_covariance(const RunRecord& run, bool center) {
  const Eigen::Index m = run.signals.rows();
  if (m < 2) fail(ErrorKind::InvalidArgument, "run " + run.run_id + " needs at least two time steps");
  if (!run.signals.allFinite()) fail(ErrorKind::NonFiniteValue, "run " + run.run_id + " has non-finite values");
  Matrix x = run.signals;
  if (center) x.rowwise() -= x.colwise().mean();
  const Matrix cov = (x.transpose() * x) / static_cast<double>(m - 1);
  RepairResult r = spd_repair(SymMatrix::symmetrized(cov));
  return {std::move(r.matrix), r.clamped};
}

LabeledCovSet build_cov_set(const std::vector<RunRecord>& runs, bool center) {
  if (runs.empty()) fail(ErrorKind::EmptySet, "no runs to build covariances from");
  LabeledCovSet set;
  const Eigen::Index n = runs.front().signals.cols();
  for (const RunRecord& run : runs) {
    if (run.signals.cols() != n) fail(ErrorKind::DimensionMismatch, "run " + run.run_id + " has a different width");
    CovEstimate est = run_covariance(run, center);
    set.matrices.push_back(std::move(est.matrix));
    set.labels.push_back(run.label);
    set.meta.push_back({run.run_id, center, est.repaired_eigenvalues, run.signals.rows() < n + 1});
  }
  return set;
}

void write_cov_set(const LabeledCovSet& set, const std::filesystem::path& out_dir,
                   const std::filesystem::path& labels_path) {
  std::filesystem::create_directories(out_dir);
  std::vector<io::LabelRow> rows;
  for (std::size_t i = 0; i < set.size(); ++i) {
    io::write_csv_matrix(out_dir / (set.meta[i].id + ".cov.csv"), set.matrices[i].mat());
    rows.push_back({set.meta[i].id, set.labels[i]});
  }
  io::write_labels(labels_path, rows);
}

LabeledCovSet read_cov_set(const std::filesystem::path& dir, const std::filesystem::path& labels_path) {
  const auto rows = io::read_labels(labels_path);
  if (rows.empty()) fail(ErrorKind::EmptySet, labels_path.string() + ": no entries");
  LabeledCovSet set;
  for (const auto& r : rows) {
    set.matrices.push_back(io::read_spd(dir / (r.id + ".cov.csv")));
    set.labels.push_back(r.label);
    set.meta.push_back({r.id, true, 0, false});
    if (set.matrices.back().dim() != set.matrices.front().dim()) {
      fail(ErrorKind::DimensionMismatch, "matrix " + r.id + " has a different dimension");
    }
  }
  return set;
}

}  // namespace spdgeom
