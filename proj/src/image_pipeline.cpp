#include "spdgeom/image_pipeline.hpp"

#include "spdgeom/error.hpp"
#include "spdgeom/matrix_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

namespace spdgeom {

namespace {

Eigen::Index map_index(Eigen::Index i, Eigen::Index n, Boundary b) {
  if (b == Boundary::Wrap) return ((i % n) + n) % n;
  // Half-sample symmetric reflection; loops for radii wider than the image.
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    const double w = std::exp(-(j * j) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(j + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

void require_sigma(double sigma) {
  if (!(sigma > 0) || !std::isfinite(sigma)) fail(ErrorKind::InvalidArgument, "sigma must be > 0");
}

void require_nonempty(const GrayImage& img) {
  if (img.pixels.size() == 0) fail(ErrorKind::EmptyImage, "image has no pixels");
}

// Eigenvalues of [[xx, xy], [xy, yy]] ordered so |small| <= |large|.
struct Eig2 {
  double small;
  double large;
};

Eig2 eig2(double xx, double yy, double xy) {
  const double mid = 0.5 * (xx + yy);
  const double half = 0.5 * (xx - yy);
  const double rad = std::sqrt(half * half + xy * xy);
  const double hi = mid + rad;
  const double lo = mid - rad;
  if (std::abs(hi) > std::abs(lo)) return {lo, hi};
  return {hi, lo};
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

Matrix min_max_normalize(const Matrix& m) {
  if (m.size() == 0) return m;
  const double lo = m.minCoeff();
  const double hi = m.maxCoeff();
  if (!(hi > lo)) return Matrix::Zero(m.rows(), m.cols());
  return (m.array() - lo) / (hi - lo);
}

GrayImage parse_pgm(std::string_view bytes, const std::string& context) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (is_space(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_ws();
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) fail(ErrorKind::FormatError, context + ": missing " + what);
    return std::strtol(std::string(bytes.substr(start, pos - start)).c_str(), nullptr, 10);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    fail(ErrorKind::FormatError, context + ": not a P2/P5 PGM file");
  }
  const bool binary = bytes[1] == '5';
  pos = 2;
  const long width = read_int("width");
  const long height = read_int("height");
  const long maxval = read_int("maxval");
  if (width <= 0 || height <= 0) fail(ErrorKind::EmptyImage, context + ": zero-sized image");
  if (maxval <= 0 || maxval > 65535) fail(ErrorKind::FormatError, context + ": invalid maxval");

  GrayImage img{Matrix(height, width)};
  if (binary) {
    if (pos >= bytes.size() || !is_space(bytes[pos])) fail(ErrorKind::FormatError, context + ": truncated header");
    ++pos;
    const std::size_t bpp = maxval < 256 ? 1 : 2;
    const std::size_t need = static_cast<std::size_t>(width * height) * bpp;
    if (bytes.size() - pos < need) fail(ErrorKind::FormatError, context + ": truncated pixel data");
    for (long y = 0; y < height; ++y) {
      for (long x = 0; x < width; ++x) {
        const std::size_t o = pos + static_cast<std::size_t>(y * width + x) * bpp;
        unsigned v = static_cast<unsigned char>(bytes[o]);
        if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(bytes[o + 1]);
        img.pixels(y, x) = std::min(1.0, static_cast<double>(v) / static_cast<double>(maxval));
      }
    }
  } else {
    for (long y = 0; y < height; ++y) {
      for (long x = 0; x < width; ++x) {
        const long v = read_int("pixel value (truncated file?)");
        img.pixels(y, x) = std::clamp(static_cast<double>(v) / static_cast<double>(maxval), 0.0, 1.0);
      }
    }
  }
  return img;
}

GrayImage load_image(const std::filesystem::path& path) {
  const std::string bytes = io::read_text(path);
  if (bytes.empty()) fail(ErrorKind::EmptyImage, path.string() + ": empty file");
  if (bytes[0] == 'P') return parse_pgm(bytes, path.string());
  Matrix m;
  try {
    m = io::parse_csv_matrix(bytes, path.string());
  } catch (const Error& e) {
    fail(ErrorKind::FormatError, e.what());
  }
  if (!m.allFinite()) fail(ErrorKind::FormatError, path.string() + ": non-finite pixel values");
  if (m.maxCoeff() > 1.0) m /= 255.0;
  return GrayImage{m.cwiseMax(0.0).cwiseMin(1.0)};
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  require_nonempty(img);
  std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  for (Eigen::Index y = 0; y < img.pixels.rows(); ++y) {
    for (Eigen::Index x = 0; x < img.pixels.cols(); ++x) {
      const double v = std::clamp(img.pixels(y, x), 0.0, 1.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  io::write_text(path, out);
}

GrayImage gaussian_smooth(const GrayImage& img, double sigma, Boundary boundary) {
  require_sigma(sigma);
  require_nonempty(img);
  const std::vector<double> k = gaussian_kernel(sigma);
  const auto radius = static_cast<Eigen::Index>(k.size() / 2);
  const Eigen::Index h = img.pixels.rows();
  const Eigen::Index w = img.pixels.cols();
  Matrix tmp(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (Eigen::Index j = -radius; j <= radius; ++j) {
        acc += k[static_cast<std::size_t>(j + radius)] * img.pixels(y, map_index(x + j, w, boundary));
      }
      tmp(y, x) = acc;
    }
  }
  GrayImage out{Matrix(h, w)};
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (Eigen::Index j = -radius; j <= radius; ++j) {
        acc += k[static_cast<std::size_t>(j + radius)] * tmp(map_index(y + j, h, boundary), x);
      }
      out.pixels(y, x) = acc;
    }
  }
  return out;
}

HessianField hessian(const GrayImage& img, double sigma, Boundary boundary) {
  const GrayImage s = gaussian_smooth(img, sigma, boundary);
  const Matrix& p = s.pixels;
  const Eigen::Index h = p.rows();
  const Eigen::Index w = p.cols();
  HessianField f{Matrix(h, w), Matrix(h, w), Matrix(h, w)};
  for (Eigen::Index y = 0; y < h; ++y) {
    const Eigen::Index yu = map_index(y - 1, h, boundary);
    const Eigen::Index yd = map_index(y + 1, h, boundary);
    for (Eigen::Index x = 0; x < w; ++x) {
      const Eigen::Index xl = map_index(x - 1, w, boundary);
      const Eigen::Index xr = map_index(x + 1, w, boundary);
      f.xx(y, x) = p(y, xr) - 2.0 * p(y, x) + p(y, xl);
      f.yy(y, x) = p(yd, x) - 2.0 * p(y, x) + p(yu, x);
      f.xy(y, x) = 0.25 * (p(yd, xr) - p(yd, xl) - p(yu, xr) + p(yu, xl));
    }
  }
  return f;
}

Matrix hessian_response_raw(const GrayImage& img, double sigma, Boundary boundary, HessianMeasure measure) {
  const HessianField f = hessian(img, sigma, boundary);
  switch (measure) {
    case HessianMeasure::Determinant: return f.xx.cwiseProduct(f.yy) - f.xy.cwiseProduct(f.xy);
    case HessianMeasure::Trace: return f.xx + f.yy;
    case HessianMeasure::LargestEig: break;
  }
  Matrix r(f.xx.rows(), f.xx.cols());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r(i) = eig2(f.xx(i), f.yy(i), f.xy(i)).large;
  }
  return r;
}

GrayImage hessian_response(const GrayImage& img, double sigma, Boundary boundary, HessianMeasure measure) {
  return GrayImage{min_max_normalize(hessian_response_raw(img, sigma, boundary, measure))};
}

Matrix frangi_response_raw(const GrayImage& img, const std::vector<double>& sigmas, const FrangiOptions& opts) {
  if (sigmas.empty()) fail(ErrorKind::InvalidArgument, "Frangi filter needs at least one scale");
  if (!(opts.beta > 0)) fail(ErrorKind::InvalidArgument, "Frangi beta must be > 0");
  require_nonempty(img);
  Matrix best = Matrix::Zero(img.pixels.rows(), img.pixels.cols());
  for (double sigma : sigmas) {
    const HessianField f = hessian(img, sigma, opts.boundary);
    const Eigen::Index count = f.xx.size();
    std::vector<Eig2> eig(static_cast<std::size_t>(count));
    double max_norm = 0.0;
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eig2 e = eig2(f.xx(i), f.yy(i), f.xy(i));
      eig[static_cast<std::size_t>(i)] = e;
      max_norm = std::max(max_norm, std::hypot(e.small, e.large));
    }
    double c = opts.c > 0 ? opts.c : 0.5 * max_norm;
    if (!(c > 0)) c = 1e-10;
    const double two_b2 = 2.0 * opts.beta * opts.beta;
    const double two_c2 = 2.0 * c * c;
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eig2& e = eig[static_cast<std::size_t>(i)];
      const bool ridge = opts.polarity == Polarity::Bright ? e.large < 0 : e.large > 0;
      if (!ridge) continue;
      const double rb = e.small / e.large;
      const double s2 = e.small * e.small + e.large * e.large;
      const double v = std::exp(-rb * rb / two_b2) * (1.0 - std::exp(-s2 / two_c2));
      best(i) = std::max(best(i), v);
    }
  }
  return best;
}

GrayImage frangi_response(const GrayImage& img, const std::vector<double>& sigmas, const FrangiOptions& opts) {
  return GrayImage{min_max_normalize(frangi_response_raw(img, sigmas, opts))};
}

std::string_view to_string(FeatureKind k) noexcept {
  switch (k) {
    case FeatureKind::Identity: return "identity";
    case FeatureKind::Gaussian: return "gaussian";
    case FeatureKind::Frangi: return "frangi";
    case FeatureKind::Hessian: return "hessian";
    case FeatureKind::HessianDet: return "hessian_det";
    case FeatureKind::HessianTrace: return "hessian_trace";
  }
  return "identity";
}

FeatureKind parse_feature_kind(std::string_view s) {
  if (s == "identity") return FeatureKind::Identity;
  if (s == "gaussian") return FeatureKind::Gaussian;
  if (s == "frangi") return FeatureKind::Frangi;
  if (s == "hessian") return FeatureKind::Hessian;
  if (s == "hessian_det") return FeatureKind::HessianDet;
  if (s == "hessian_trace") return FeatureKind::HessianTrace;
  fail(ErrorKind::InvalidArgument, "unknown feature kind '" + std::string(s) + "'");
}

FeatureBank::FeatureBank(std::vector<FeatureSpec> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2) fail(ErrorKind::InvalidArgument, "feature bank needs at least two entries");
  std::set<std::string> names;
  for (const FeatureSpec& e : entries_) {
    if (e.name.empty() || !names.insert(e.name).second) {
      fail(ErrorKind::InvalidArgument, "feature names must be unique and non-empty ('" + e.name + "')");
    }
    if (e.kind != FeatureKind::Identity && !(e.sigma > 0)) {
      fail(ErrorKind::InvalidArgument, "feature '" + e.name + "' needs sigma > 0");
    }
  }
}

FeatureBank FeatureBank::default_bank() {
  return FeatureBank({{"original", FeatureKind::Identity, 0.0},
                      {"gauss_s1", FeatureKind::Gaussian, 1.0},
                      {"gauss_s2", FeatureKind::Gaussian, 2.0},
                      {"frangi_s1", FeatureKind::Frangi, 1.0},
                      {"frangi_s2", FeatureKind::Frangi, 2.0},
                      {"frangi_s4", FeatureKind::Frangi, 4.0},
                      {"hessian_s1", FeatureKind::Hessian, 1.0},
                      {"hessian_s2", FeatureKind::Hessian, 2.0},
                      {"hessian_s4", FeatureKind::Hessian, 4.0}});
}

FeatureBank FeatureBank::from_csv(const std::filesystem::path& path) {
  std::istringstream in(io::read_text(path));
  std::string line;
  std::vector<FeatureSpec> entries;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = io::trim(line);
    if (t.empty()) continue;
    const auto f = io::split_csv_line(t);
    const std::string ctx = path.string() + " line " + std::to_string(line_no);
    if (f.size() != 3) fail(ErrorKind::FormatError, ctx + ": expected name,kind,sigma");
    if (entries.empty() && f[1] == "kind") continue;  // header
    entries.push_back({f[0], parse_feature_kind(f[1]), io::parse_double(f[2], ctx)});
  }
  return FeatureBank(std::move(entries));
}

std::string FeatureBank::to_csv() const {
  std::string out;
  for (const FeatureSpec& e : entries_) {
    out += e.name + "," + std::string(to_string(e.kind)) + "," + io::format_double(e.sigma) + "\n";
  }
  return out;
}

Matrix feature_stack(const GrayImage& img, const FeatureBank& bank, const FilterOptions& opts) {
  require_nonempty(img);
  const Eigen::Index h = img.pixels.rows();
  const Eigen::Index w = img.pixels.cols();
  Matrix stack(static_cast<Eigen::Index>(bank.size()), h * w);
  FrangiOptions fo;
  fo.beta = opts.frangi_beta;
  fo.polarity = opts.polarity;
  fo.boundary = opts.boundary;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const FeatureSpec& e = bank.entries()[i];
    Matrix feat;
    switch (e.kind) {
      case FeatureKind::Identity: feat = img.pixels; break;
      case FeatureKind::Gaussian: feat = gaussian_smooth(img, e.sigma, opts.boundary).pixels; break;
      case FeatureKind::Frangi: feat = frangi_response_raw(img, {e.sigma}, fo); break;
      case FeatureKind::Hessian: feat = hessian_response_raw(img, e.sigma, opts.boundary); break;
      case FeatureKind::HessianDet:
        feat = hessian_response_raw(img, e.sigma, opts.boundary, HessianMeasure::Determinant);
        break;
      case FeatureKind::HessianTrace:
        feat = hessian_response_raw(img, e.sigma, opts.boundary, HessianMeasure::Trace);
        break;
    }
    const bool filtered = e.kind != FeatureKind::Identity && e.kind != FeatureKind::Gaussian;
    if (opts.normalize && filtered) {
      feat = min_max_normalize(feat);
    }
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index y = 0; y < h; ++y) {
      for (Eigen::Index x = 0; x < w; ++x) stack(row, y * w + x) = feat(y, x);
    }
  }
  return stack;
}

CovEstimate image_covariance(const Matrix& stack) {
  const Eigen::Index m = stack.cols();
  if (m < 2) fail(ErrorKind::InvalidArgument, "feature covariance needs at least two pixels");
  Matrix x = stack;
  x.colwise() -= x.rowwise().mean();
  RepairResult r = spd_repair(SymMatrix::symmetrized((x * x.transpose()) / static_cast<double>(m - 1)));
  return {std::move(r.matrix), r.clamped};
}

std::vector<ImageRecord> load_images(const std::filesystem::path& data_dir, const std::filesystem::path& manifest) {
  std::string text;
  try {
    text = io::read_text(manifest);
  } catch (const Error& e) {
    fail(ErrorKind::ManifestError, e.what());
  }
  std::istringstream in(text);
  std::string line;
  std::vector<ImageRecord> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = io::trim(line);
    if (t.empty()) continue;
    const auto f = io::split_csv_line(t);
    const std::string ctx = manifest.string() + " line " + std::to_string(line_no);
    if (f.size() != 3) fail(ErrorKind::ManifestError, ctx + ": expected image_id,path,label");
    char* end = nullptr;
    const long label = std::strtol(f[2].c_str(), &end, 10);
    if (f[2].empty() || *end != '\0') {
      if (out.empty() && line_no == 1) continue;  // header
      fail(ErrorKind::ManifestError, ctx + ": label is not an integer");
    }
    try {
      out.push_back({f[0], label, load_image(data_dir / f[1])});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::IoError) fail(ErrorKind::ManifestError, "image " + f[0] + ": " + e.what());
      throw;
    }
  }
  if (out.empty()) fail(ErrorKind::ManifestError, manifest.string() + ": no images listed");
  return out;
}

LabeledCovSet build_image_cov_set(const std::vector<ImageRecord>& images, const FeatureBank& bank,
                                  const FilterOptions& opts) {
  if (images.empty()) fail(ErrorKind::EmptySet, "no images");
  LabeledCovSet set;
  for (const ImageRecord& rec : images) {
    CovEstimate est = image_covariance(feature_stack(rec.image, bank, opts));
    set.matrices.push_back(std::move(est.matrix));
    set.labels.push_back(rec.label);
    set.meta.push_back({rec.image_id, true, est.repaired_eigenvalues, false});
  }
  return set;
}

}  // namespace spdgeom
