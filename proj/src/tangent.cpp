#include "spdgeom/tangent.hpp"

#include "spdgeom/error.hpp"
#include "spdgeom/matrix_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace spdgeom {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace

std::string_view to_string(Embedding e) noexcept {
  switch (e) {
    case Embedding::Ambient: return "ambient";
    case Embedding::Whitened: return "whitened";
    case Embedding::Raw: return "raw";
  }
  return "ambient";
}

Embedding parse_embedding(std::string_view s) {
  if (s == "ambient") return Embedding::Ambient;
  if (s == "whitened") return Embedding::Whitened;
  if (s == "raw") return Embedding::Raw;
  fail(ErrorKind::InvalidArgument, "unknown embedding variant '" + std::string(s) + "'");
}

Vector sym_vec(const SymMatrix& s) {
  const std::size_t n = s.dim();
  Vector v(static_cast<Eigen::Index>(sym_vec_dim(n)));
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    v(k++) = s(i, i);
    for (std::size_t j = i + 1; j < n; ++j) v(k++) = kSqrt2 * s(i, j);
  }
  return v;
}

SymMatrix sym_unvec(const Vector& v, std::size_t n) {
  if (static_cast<std::size_t>(v.size()) != sym_vec_dim(n) || n == 0) {
    fail(ErrorKind::DimensionMismatch, "vector length " + std::to_string(v.size()) +
                                           " does not match n(n+1)/2 for n=" + std::to_string(n));
  }
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix m(nn, nn);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < nn; ++i) {
    m(i, i) = v(k++);
    for (Eigen::Index j = i + 1; j < nn; ++j) {
      m(i, j) = m(j, i) = v(k++) / kSqrt2;
    }
  }
  return SymMatrix::symmetrized(m);
}

Vector embed_one(const BasePoint& base, const SpdMatrix& p, Embedding variant) {
  switch (variant) {
    case Embedding::Ambient: return sym_vec(log_map(base, p));
    case Embedding::Whitened: return sym_vec(log_map_whitened(base, p));
    case Embedding::Raw:
      if (p.dim() != base.dim()) fail(ErrorKind::DimensionMismatch, "matrix does not match base dimension");
      return sym_vec(p);
  }
  return {};
}

SpdMatrix unembed_one(const BasePoint& base, const Vector& v, std::size_t n, Embedding variant) {
  const SymMatrix s = sym_unvec(v, n);
  switch (variant) {
    case Embedding::Ambient: return exp_map(base, s);
    case Embedding::Whitened: return exp_map_whitened(base, s);
    case Embedding::Raw: return spd_validate(s);
  }
  return spd_validate(s);
}

TangentDataset embed(const std::vector<SpdMatrix>& set, std::vector<long> labels,
                     const std::optional<SpdMatrix>& base, Embedding variant) {
  if (set.empty()) fail(ErrorKind::EmptySet, "cannot embed an empty set");
  if (!labels.empty() && labels.size() != set.size()) {
    fail(ErrorKind::DimensionMismatch, "label count does not match matrix count");
  }
  const std::size_t n = set.front().dim();
  SpdMatrix anchor = base ? *base : karcher_mean(set).mean;
  TangentDataset ds{BasePoint(anchor), Matrix(), std::move(labels), variant, n};
  const auto d = static_cast<Eigen::Index>(sym_vec_dim(n));
  ds.vectors.resize(static_cast<Eigen::Index>(set.size()), d);
  for (std::size_t i = 0; i < set.size(); ++i) {
    ds.vectors.row(static_cast<Eigen::Index>(i)) = embed_one(ds.base, set[i], variant).transpose();
  }
  return ds;
}

PgaModel pga_fit(const TangentDataset& data, std::size_t k) {
  const Eigen::Index rows = data.vectors.rows();
  const Eigen::Index dims = data.vectors.cols();
  if (rows < 2) fail(ErrorKind::RankDeficient, "PGA needs at least two samples");
  const auto kmax = static_cast<std::size_t>(std::min(rows - 1, dims));
  if (k < 1 || k > kmax) {
    fail(ErrorKind::InvalidArgument,
         "component count must lie in [1, " + std::to_string(kmax) + "], got " + std::to_string(k));
  }
  const Vector center = data.vectors.colwise().mean().transpose();
  const Matrix centered = data.vectors.rowwise() - center.transpose();

  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  const auto kk = static_cast<Eigen::Index>(k);
  Matrix axes = svd.matrixV().leftCols(kk).transpose();
  // Same sign convention as eig_sym.
  for (Eigen::Index r = 0; r < kk; ++r) {
    const double peak = axes.row(r).cwiseAbs().maxCoeff();
    for (Eigen::Index c = 0; c < dims; ++c) {
      if (std::abs(axes(r, c)) >= peak * (1.0 - 64 * std::numeric_limits<double>::epsilon())) {
        if (axes(r, c) < 0) axes.row(r) *= -1.0;
        break;
      }
    }
  }
  const Vector sv = svd.singularValues().head(kk);
  Vector var = sv.array().square() / static_cast<double>(rows - 1);
  return PgaModel{data.base, center, std::move(axes), std::move(var), data.variant, data.n};
}

Matrix pga_scores(const PgaModel& model, const Matrix& vectors) {
  if (vectors.cols() != model.center.size()) {
    fail(ErrorKind::DimensionMismatch, "feature width does not match PGA model");
  }
  return (vectors.rowwise() - model.center.transpose()) * model.axes.transpose();
}

Vector pga_project(const PgaModel& model, const SpdMatrix& p) {
  if (p.dim() != model.n) fail(ErrorKind::DimensionMismatch, "matrix does not match PGA model dimension");
  const Vector v = embed_one(model.base, p, model.variant);
  return model.axes * (v - model.center);
}

SpdMatrix pga_reconstruct(const PgaModel& model, const Vector& scores) {
  if (scores.size() != model.axes.rows()) fail(ErrorKind::DimensionMismatch, "score length does not match model");
  const Vector v = model.center + model.axes.transpose() * scores;
  return unembed_one(model.base, v, model.n, model.variant);
}

std::string pga_to_json(const PgaModel& model) {
  nlohmann::ordered_json j;
  j["format"] = "spdgeom-pga-model";
  j["version"] = 1;
  j["variant"] = std::string(to_string(model.variant));
  j["n"] = model.n;
  j["k"] = model.components();
  j["base_csv"] = io::to_csv(model.base.point().mat());
  j["center"] = to_std(model.center);
  nlohmann::ordered_json axes = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < model.axes.rows(); ++r) axes.push_back(to_std(model.axes.row(r).transpose()));
  j["axes"] = axes;
  j["explained_variance"] = to_std(model.explained_variance);
  return j.dump(2) + "\n";
}

PgaModel pga_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "spdgeom-pga-model") {
      fail(ErrorKind::FormatError, "not a PGA model file");
    }
    const auto n = j.at("n").get<std::size_t>();
    const Matrix base = io::parse_csv_matrix(j.at("base_csv").get<std::string>(), "PGA model base");
    const Vector center = from_std(j.at("center").get<std::vector<double>>());
    const auto axes_rows = j.at("axes").get<std::vector<std::vector<double>>>();
    Matrix axes(static_cast<Eigen::Index>(axes_rows.size()), center.size());
    for (std::size_t r = 0; r < axes_rows.size(); ++r) {
      if (axes_rows[r].size() != static_cast<std::size_t>(center.size())) {
        fail(ErrorKind::FormatError, "PGA model axis width mismatch");
      }
      axes.row(static_cast<Eigen::Index>(r)) = from_std(axes_rows[r]).transpose();
    }
    const Vector var = from_std(j.at("explained_variance").get<std::vector<double>>());
    if (var.size() != axes.rows() || static_cast<std::size_t>(center.size()) != sym_vec_dim(n) ||
        static_cast<std::size_t>(base.rows()) != n) {
      fail(ErrorKind::FormatError, "PGA model fields have inconsistent sizes");
    }
    return PgaModel{BasePoint(spd_validate(SymMatrix::from_raw(base))), center, axes, var,
                    parse_embedding(j.at("variant").get<std::string>()), n};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::FormatError, std::string("malformed PGA model: ") + e.what());
  }
}

}  // namespace spdgeom
