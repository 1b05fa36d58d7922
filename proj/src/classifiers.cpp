#include "spdgeom/classifiers.hpp"

#include "spdgeom/error.hpp"
#include "spdgeom/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace spdgeom {

namespace {

// ceil(n * frac) without being fooled by 10 * 0.3 = 3.0000000000000004.
std::size_t test_count(std::size_t n, double frac) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(n) * frac - 1e-9));
}

std::vector<long> sorted_classes(const std::vector<long>& y) {
  std::vector<long> c(y);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

void require_rows(const Matrix& x, const std::vector<long>& y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    fail(ErrorKind::DimensionMismatch, "feature rows (" + std::to_string(x.rows()) +
                                           ") do not match label count (" + std::to_string(y.size()) + ")");
  }
  if (!x.allFinite()) fail(ErrorKind::NonFiniteValue, "features contain non-finite values");
}

Matrix with_bias_column(const Matrix& x) {
  Matrix xt(x.rows(), x.cols() + 1);
  xt.leftCols(x.cols()) = x;
  xt.col(x.cols()).setOnes();
  return xt;
}

std::size_t class_index(const std::vector<long>& classes, long label) {
  const auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) {
    fail(ErrorKind::InvalidArgument, "label " + std::to_string(label) + " is not a model class");
  }
  return static_cast<std::size_t>(it - classes.begin());
}

double svm_objective(const Matrix& xt, const Vector& ypm, const Vector& w, double lambda) {
  const Vector margins = (xt * w).cwiseProduct(ypm);
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) hinge += std::max(0.0, 1.0 - margins(i));
  return 0.5 * lambda * w.squaredNorm() + hinge / static_cast<double>(margins.size());
}

// Returns the averaged augmented weight vector (last entry is the bias).
Vector pegasos(const Matrix& xt, const Vector& ypm, const SvmOptions& opts, std::vector<double>* epoch_obj) {
  const Eigen::Index n = xt.rows();
  const double lambda = 1.0 / (opts.cost * static_cast<double>(n));
  const std::size_t total = static_cast<std::size_t>(opts.epochs) * static_cast<std::size_t>(n);
  const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(total))));
  const std::size_t avg_from = total - tail;

  SplitMix64 rng(opts.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Vector w = Vector::Zero(xt.cols());
  Vector tail_sum = Vector::Zero(xt.cols());
  Vector run_sum = Vector::Zero(xt.cols());
  std::size_t t = 0;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    shuffle(order, rng);
    for (Eigen::Index i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double margin = ypm(i) * xt.row(i).dot(w);
      w *= 1.0 - 1.0 / static_cast<double>(t);
      if (margin < 1.0) w += (eta * ypm(i)) * xt.row(i).transpose();
      run_sum += w;
      if (t > avg_from) tail_sum += w;
    }
    if (epoch_obj) {
      epoch_obj->push_back(svm_objective(xt, ypm, run_sum / static_cast<double>(t), lambda));
    }
  }
  return tail_sum / static_cast<double>(tail);
}

}  // namespace

Split split(std::size_t n, double test_frac, std::uint64_t seed, const std::vector<long>& labels) {
  if (!(test_frac > 0 && test_frac < 1)) fail(ErrorKind::InvalidArgument, "test fraction must lie in (0, 1)");
  if (n < 2) fail(ErrorKind::DegenerateSplit, "need at least two samples to split");
  if (!labels.empty() && labels.size() != n) fail(ErrorKind::DimensionMismatch, "label count does not match N");

  SplitMix64 rng(seed);
  Split out;
  auto take = [&](std::vector<std::size_t> idx, const std::string& what) {
    shuffle(idx, rng);
    const std::size_t nt = test_count(idx.size(), test_frac);
    if (nt >= idx.size()) fail(ErrorKind::DegenerateSplit, what + " would have no training samples");
    out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(nt));
    out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(nt), idx.end());
  };

  if (labels.empty()) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    take(std::move(idx), "the split");
  } else {
    std::map<long, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    for (auto& [label, idx] : by_class) take(std::move(idx), "class " + std::to_string(label));
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::string_view to_string(ModelKind k) noexcept { return k == ModelKind::Ridge ? "ridge" : "svm"; }

ModelKind parse_model_kind(std::string_view s) {
  if (s == "ridge") return ModelKind::Ridge;
  if (s == "svm") return ModelKind::Svm;
  fail(ErrorKind::InvalidArgument, "unknown model kind '" + std::string(s) + "'");
}

Matrix LinearModel::scores(const Matrix& x) const {
  if (x.cols() != weights.cols()) {
    fail(ErrorKind::DimensionMismatch, "feature width " + std::to_string(x.cols()) + " does not match model width " +
                                           std::to_string(weights.cols()));
  }
  return (x * weights.transpose()).rowwise() + biases.transpose();
}

std::vector<long> LinearModel::predict(const Matrix& x) const {
  const Matrix s = scores(x);
  std::vector<long> out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < s.cols(); ++c) {
      if (s(i, c) > s(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = class_ids[static_cast<std::size_t>(best)];
  }
  return out;
}

LinearModel ridge_fit(const Matrix& x, const std::vector<long>& y, double lambda) {
  require_rows(x, y);
  if (!(lambda >= 0) || !std::isfinite(lambda)) fail(ErrorKind::InvalidArgument, "lambda must be >= 0");
  const std::vector<long> classes = sorted_classes(y);
  if (classes.size() < 2) fail(ErrorKind::SingleClass, "ridge classifier needs at least two classes");
  if (y.size() < classes.size()) fail(ErrorKind::InvalidArgument, "fewer samples than classes");

  const Matrix xt = with_bias_column(x);
  const auto c = static_cast<Eigen::Index>(classes.size());
  Matrix targets = Matrix::Constant(xt.rows(), c, -1.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(class_index(classes, y[i]))) = 1.0;
  }

  Matrix coef;  // (F+1) x C
  if (lambda > 0) {
    Matrix gram = xt.transpose() * xt;
    gram.diagonal().head(x.cols()).array() += lambda;
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) fail(ErrorKind::SingularSystem, "ridge normal equations are not positive definite");
    coef = llt.solve(xt.transpose() * targets);
  } else {
    Eigen::ColPivHouseholderQR<Matrix> qr(xt);
    if (qr.rank() < xt.cols()) fail(ErrorKind::SingularSystem, "lambda = 0 with rank-deficient design");
    coef = qr.solve(targets);
  }
  if (!coef.allFinite()) fail(ErrorKind::SingularSystem, "ridge solution is not finite");

  LinearModel m;
  m.kind = ModelKind::Ridge;
  m.weights = coef.topRows(x.cols()).transpose();
  m.biases = coef.row(x.cols()).transpose();
  m.class_ids = classes;
  m.hyper = lambda;
  return m;
}

LinearModel svm_fit(const Matrix& x, const std::vector<long>& y, const SvmOptions& opts, SvmTrace* trace) {
  require_rows(x, y);
  if (!(opts.cost > 0)) fail(ErrorKind::InvalidArgument, "SVM cost must be > 0");
  if (opts.epochs < 1) fail(ErrorKind::InvalidArgument, "SVM epochs must be >= 1");
  const std::vector<long> classes = sorted_classes(y);
  if (classes.size() < 2) fail(ErrorKind::SingleClass, "SVM needs two classes");

  const Matrix xt = with_bias_column(x);
  auto solve_binary = [&](long positive) {
    Vector ypm(xt.rows());
    for (std::size_t i = 0; i < y.size(); ++i) ypm(static_cast<Eigen::Index>(i)) = y[i] == positive ? 1.0 : -1.0;
    std::vector<double>* obj = nullptr;
    if (trace) obj = &trace->epoch_objective.emplace_back();
    return pegasos(xt, ypm, opts, obj);
  };

  LinearModel m;
  m.kind = ModelKind::Svm;
  m.class_ids = classes;
  m.hyper = opts.cost;
  const auto c = static_cast<Eigen::Index>(classes.size());
  m.weights.resize(c, x.cols());
  m.biases.resize(c);
  if (c == 2) {
    const Vector w = solve_binary(classes[1]);
    m.weights.row(1) = w.head(x.cols()).transpose();
    m.biases(1) = w(x.cols());
    m.weights.row(0) = -m.weights.row(1);
    m.biases(0) = -m.biases(1);
  } else {
    for (Eigen::Index k = 0; k < c; ++k) {
      const Vector w = solve_binary(classes[static_cast<std::size_t>(k)]);
      m.weights.row(k) = w.head(x.cols()).transpose();
      m.biases(k) = w(x.cols());
    }
  }
  return m;
}

ConfusionMatrix confusion_from(const std::vector<long>& class_ids, const std::vector<long>& truth,
                               const std::vector<long>& predicted) {
  if (truth.size() != predicted.size()) fail(ErrorKind::DimensionMismatch, "prediction count mismatch");
  const auto c = static_cast<Eigen::Index>(class_ids.size());
  ConfusionMatrix cm;
  cm.class_ids = class_ids;
  cm.counts.setZero(c, c);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(class_index(class_ids, truth[i]));
    const auto p = static_cast<Eigen::Index>(class_index(class_ids, predicted[i]));
    ++cm.counts(r, p);
  }
  cm.normalized.setZero(c, c);
  cm.empty_rows.assign(class_ids.size(), false);
  for (Eigen::Index r = 0; r < c; ++r) {
    const long total = cm.counts.row(r).sum();
    if (total == 0) {
      cm.empty_rows[static_cast<std::size_t>(r)] = true;
      continue;
    }
    for (Eigen::Index k = 0; k < c; ++k) {
      cm.normalized(r, k) = static_cast<double>(cm.counts(r, k)) / static_cast<double>(total);
    }
  }
  return cm;
}

Evaluation evaluate(const LinearModel& model, const Matrix& x, const std::vector<long>& y) {
  require_rows(x, y);
  Evaluation ev;
  ev.predictions = model.predict(x);
  ev.confusion = confusion_from(model.class_ids, y, ev.predictions);
  const long hits = ev.confusion.counts.diagonal().sum();
  ev.accuracy = y.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(y.size());
  return ev;
}

std::string model_to_json(const LinearModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "spdgeom-linear-model";
  j["version"] = 1;
  j["kind"] = std::string(to_string(m.kind));
  j["hyper"] = m.hyper;
  j["feature_note"] = m.feature_note;
  j["class_ids"] = m.class_ids;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
    rows.push_back(std::vector<double>(m.weights.row(r).begin(), m.weights.row(r).end()));
  }
  j["weights"] = rows;
  j["biases"] = std::vector<double>(m.biases.data(), m.biases.data() + m.biases.size());
  return j.dump(2) + "\n";
}

LinearModel model_from_json(std::string_view text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "spdgeom-linear-model") {
      fail(ErrorKind::FormatError, "not a linear model file");
    }
    LinearModel m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.hyper = j.at("hyper").get<double>();
    m.feature_note = j.at("feature_note").get<std::string>();
    m.class_ids = j.at("class_ids").get<std::vector<long>>();
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    const auto biases = j.at("biases").get<std::vector<double>>();
    if (rows.size() != m.class_ids.size() || biases.size() != rows.size() || rows.size() < 2) {
      fail(ErrorKind::FormatError, "linear model has inconsistent class counts");
    }
    const std::size_t f = rows.front().size();
    m.weights.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(f));
    m.biases.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != f) fail(ErrorKind::FormatError, "ragged weight rows");
      for (std::size_t k = 0; k < f; ++k) m.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
      m.biases(static_cast<Eigen::Index>(r)) = biases[r];
    }
    if (!std::is_sorted(m.class_ids.begin(), m.class_ids.end())) fail(ErrorKind::FormatError, "class ids must be ascending");
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::FormatError, std::string("malformed linear model: ") + e.what());
  }
}

}  // namespace spdgeom
