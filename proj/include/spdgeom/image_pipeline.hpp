#pragma once

// Grayscale images -> filter bank -> per-image feature covariance (region
// covariance descriptor).

#include "spdgeom/spd_core.hpp"
#include "spdgeom/ts_pipeline.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spdgeom {

struct GrayImage {
  Matrix pixels;  // height x width, values in [0, 1]

  std::size_t width() const noexcept { return static_cast<std::size_t>(pixels.cols()); }
  std::size_t height() const noexcept { return static_cast<std::size_t>(pixels.rows()); }
};

// Reflect is half-sample symmetric (d c b a | a b c d | d c b a); Wrap is
// periodic.
enum class Boundary { Reflect, Wrap };
enum class Polarity { Bright, Dark };

// PGM (P2/P5, 8 or 16 bit) or CSV matrix. CSV values above 1 are divided by
// 255. Values are clamped to [0, 1].
GrayImage load_image(const std::filesystem::path& path);
GrayImage parse_pgm(std::string_view bytes, const std::string& context);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);  // binary P5, 8 bit

GrayImage gaussian_smooth(const GrayImage& img, double sigma, Boundary boundary = Boundary::Reflect);

struct HessianField {
  Matrix xx, yy, xy;
};
// Central second differences of the sigma-smoothed image.
HessianField hessian(const GrayImage& img, double sigma, Boundary boundary = Boundary::Reflect);

// Scalar summary of the 2x2 Hessian per pixel.
enum class HessianMeasure {
  LargestEig,  // signed eigenvalue of largest magnitude (default)
  Determinant,
  Trace,
};

Matrix hessian_response_raw(const GrayImage& img, double sigma, Boundary boundary = Boundary::Reflect,
                            HessianMeasure measure = HessianMeasure::LargestEig);
GrayImage hessian_response(const GrayImage& img, double sigma, Boundary boundary = Boundary::Reflect,
                           HessianMeasure measure = HessianMeasure::LargestEig);

struct FrangiOptions {
  double beta = 0.5;
  double c = 0.0;  // <= 0 selects half the maximum Hessian norm per scale
  Polarity polarity = Polarity::Bright;
  Boundary boundary = Boundary::Reflect;
};
Matrix frangi_response_raw(const GrayImage& img, const std::vector<double>& sigmas, const FrangiOptions& opts = {});
GrayImage frangi_response(const GrayImage& img, const std::vector<double>& sigmas, const FrangiOptions& opts = {});

// (x - min) / (max - min); a constant field maps to zeros.
Matrix min_max_normalize(const Matrix& m);

enum class FeatureKind { Identity, Gaussian, Frangi, Hessian, HessianDet, HessianTrace };
std::string_view to_string(FeatureKind k) noexcept;
FeatureKind parse_feature_kind(std::string_view s);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Identity;
  double sigma = 0.0;
};

class FeatureBank {
 public:
  explicit FeatureBank(std::vector<FeatureSpec> entries);

  // original; gaussian 1, 2; frangi 1, 2, 4; hessian 1, 2, 4.
  static FeatureBank default_bank();
  // CSV lines name,kind,sigma (optional header).
  static FeatureBank from_csv(const std::filesystem::path& path);
  std::string to_csv() const;

  const std::vector<FeatureSpec>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<FeatureSpec> entries_;
};

struct FilterOptions {
  Boundary boundary = Boundary::Reflect;
  Polarity polarity = Polarity::Bright;
  bool normalize = true;  // per-image min-max of every filter output except identity and Gaussian
  double frangi_beta = 0.5;
};

// Row i is the row-major flattening of feature image i.
Matrix feature_stack(const GrayImage& img, const FeatureBank& bank, const FilterOptions& opts = {});

// Rows are features: centered over pixels, X X^T / (m - 1), repaired to SPD.
CovEstimate image_covariance(const Matrix& stack);

struct ImageRecord {
  std::string image_id;
  long label = 0;
  GrayImage image;
};

// Manifest lines: image_id,relative_path,label (optional header).
std::vector<ImageRecord> load_images(const std::filesystem::path& data_dir, const std::filesystem::path& manifest);

LabeledCovSet build_image_cov_set(const std::vector<ImageRecord>& images, const FeatureBank& bank,
                                  const FilterOptions& opts = {});

}  // namespace spdgeom
