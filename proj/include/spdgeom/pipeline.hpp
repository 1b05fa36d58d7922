#pragma once

// End-to-end batch workflow: synthesize or ingest -> covariances -> Karcher
// mean -> tangent embedding -> optional PGA -> split -> train -> evaluate.
// Every intermediate artifact is written under the run directory.

#include "spdgeom/classifiers.hpp"
#include "spdgeom/synthetic.hpp"
#include "spdgeom/tangent.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace spdgeom {

enum class Preset {
  TepSynthetic,      // seeded VAR(1) benchmark
  TextileSynthetic,  // seeded woven textures
  TsManifest,        // external time-series runs
  ImageManifest,     // external grayscale images
  Covariances,       // precomputed <id>.cov.csv + labels
};

std::string_view to_string(Preset p) noexcept;
Preset parse_preset(std::string_view s);

enum class FeatureSource { Tangent, Raw };

struct PipelineConfig {
  Preset preset = Preset::TepSynthetic;
  FeatureSource features = FeatureSource::Tangent;
  Embedding variant = Embedding::Whitened;
  std::optional<ModelKind> classifier;  // default: ridge for time series, svm for images
  double lambda = 1.0;
  double cost = 1.0;
  int epochs = 200;
  double test_frac = 0.3;
  std::uint64_t seed = 1;
  std::size_t pga_k = 0;  // 0 keeps full feature vectors
  bool center = true;
  bool write_data = false;  // synthetic time series are large; regenerable from the seed

  ClassBenchmarkConfig ts{};
  TextureConfig textures{};
  std::optional<std::filesystem::path> bank;  // default bank when empty
  FilterOptions filters{};

  std::filesystem::path manifest;
  std::filesystem::path data_dir;
  std::filesystem::path covs_dir;
  std::filesystem::path labels;
  bool run_files_have_header = false;

  std::filesystem::path out_dir = "run";

  // Applies the preset's documented defaults (benchmark sizes, classifier).
  static PipelineConfig for_preset(Preset p);
};

struct PipelineSummary {
  double accuracy = 0.0;
  double normal_vs_faulty_accuracy = 0.0;  // label 0 is "normal"
  std::size_t n_samples = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t feature_dim = 0;
  int karcher_iterations = 0;
  ConfusionMatrix confusion;
  std::string text;  // contents of summary.txt
};

PipelineSummary run_pipeline(const PipelineConfig& cfg);

// Write records plus manifest.csv and labels.csv in the formats load_runs and
// load_images read back.
void write_run_files(const std::vector<RunRecord>& runs, const std::filesystem::path& dir);
void write_image_files(const std::vector<ImageRecord>& images, const std::filesystem::path& dir);

}  // namespace spdgeom
