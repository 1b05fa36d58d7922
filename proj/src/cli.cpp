#include "spdgeom/cli.hpp"

#include "spdgeom/airm.hpp"
#include "spdgeom/classifiers.hpp"
#include "spdgeom/error.hpp"
#include "spdgeom/frechet_mean.hpp"
#include "spdgeom/image_pipeline.hpp"
#include "spdgeom/matrix_io.hpp"
#include "spdgeom/pipeline.hpp"
#include "spdgeom/synthetic.hpp"
#include "spdgeom/tangent.hpp"
#include "spdgeom/ts_pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

namespace spdgeom::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  // shared
  std::string a, b;
  std::string out;
  std::vector<std::string> inputs;
  std::string labels;
  std::uint64_t seed = 0;

  double t = 0.5;
  bool whitened = false;

  std::string method = "karcher";
  std::string report;
  int max_iters = 100;
  double grad_tol = 1e-10;

  std::size_t k = kDefaultComponents;
  std::string variant;  // empty: per-command default
  std::string model;
  std::string scores;
  bool label_column = false;

  std::string manifest;
  std::string data_dir;
  std::string out_dir;
  bool center = true;
  bool header = false;

  std::string bank = "default";
  std::string polarity = "bright";
  std::string boundary = "reflect";
  bool no_normalize = false;

  std::size_t classes = 4;
  std::size_t runs = 50;
  std::size_t n = 12;
  std::size_t m = 2000;
  double delta = 0.5;
  std::size_t burn_in = 200;
  std::size_t normal = 60;
  std::size_t defective = 60;
  std::size_t size = 64;

  std::string features;
  std::string model_kind = "ridge";
  double lambda = 1.0;
  double cost = 1.0;
  int epochs = 200;
  std::string confusion;
  bool normalized = false;
  std::string predictions;

  std::string preset = "tep-synthetic";
  std::string feature_source = "tangent";
  std::string classifier;
  std::string covs_dir;
  double test_frac = 0.3;
  std::size_t pga_k = 0;
  bool write_data = false;
};

std::string strip_suffix(std::string s, std::string_view suffix) {
  if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
    s.resize(s.size() - suffix.size());
  }
  return s;
}

std::string item_id(const fs::path& p) {
  const std::string name = p.filename().string();
  if (name.ends_with(".cov.csv")) return strip_suffix(name, ".cov.csv");
  return p.stem().string();
}

bool is_list_file(const fs::path& p) { return p.extension() == ".txt" || p.extension() == ".lst"; }

// Directories expand to their *.cov.csv files (or every *.csv other than
// labels.csv / manifest.csv when none exist); .txt/.lst files list one path
// per line, relative to the list file.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const std::string& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> cov, other;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        const std::string name = entry.path().filename().string();
        if (name.ends_with(".cov.csv")) {
          cov.push_back(entry.path());
        } else if (name != "labels.csv" && name != "manifest.csv") {
          other.push_back(entry.path());
        }
      }
      auto& chosen = cov.empty() ? other : cov;
      std::sort(chosen.begin(), chosen.end());
      out.insert(out.end(), chosen.begin(), chosen.end());
    } else if (is_list_file(p)) {
      std::istringstream list(io::read_text(p));
      std::string line;
      while (std::getline(list, line)) {
        const std::string t = io::trim(line);
        if (!t.empty()) out.push_back(p.parent_path() / t);
      }
    } else {
      out.push_back(p);
    }
  }
  if (out.empty()) fail(ErrorKind::EmptySet, "no input matrices found");
  return out;
}

std::vector<SpdMatrix> read_all(const std::vector<fs::path>& paths) {
  std::vector<SpdMatrix> set;
  set.reserve(paths.size());
  for (const fs::path& p : paths) set.push_back(io::read_spd(p));
  return set;
}

std::vector<long> labels_for(const std::vector<fs::path>& paths, const fs::path& labels_path) {
  std::map<std::string, long> by_id;
  for (const io::LabelRow& row : io::read_labels(labels_path)) by_id[row.id] = row.label;
  std::vector<long> out;
  for (const fs::path& p : paths) {
    const auto it = by_id.find(item_id(p));
    if (it == by_id.end()) fail(ErrorKind::ManifestError, "no label for '" + item_id(p) + "'");
    out.push_back(it->second);
  }
  return out;
}

std::vector<long> label_column_of(const fs::path& labels_path) {
  std::vector<long> out;
  for (const io::LabelRow& row : io::read_labels(labels_path)) out.push_back(row.label);
  return out;
}

void emit_matrix(const Matrix& m, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << io::to_csv(m);
  } else {
    io::write_csv_matrix(path, m);
  }
}

void emit_text(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    io::write_text(path, text);
  }
}

Embedding parse_tangent_variant(const std::string& s) {
  const Embedding e = parse_embedding(s);
  if (e == Embedding::Raw) fail(ErrorKind::InvalidArgument, "variant must be ambient or whitened");
  return e;
}

Polarity parse_polarity(const std::string& s) {
  if (s == "bright") return Polarity::Bright;
  if (s == "dark") return Polarity::Dark;
  fail(ErrorKind::InvalidArgument, "polarity must be bright or dark");
}

Boundary parse_boundary(const std::string& s) {
  if (s == "reflect") return Boundary::Reflect;
  if (s == "wrap") return Boundary::Wrap;
  fail(ErrorKind::InvalidArgument, "boundary must be reflect or wrap");
}

FilterOptions filter_options(const Options& o) {
  FilterOptions f;
  f.boundary = parse_boundary(o.boundary);
  f.polarity = parse_polarity(o.polarity);
  f.normalize = !o.no_normalize;
  return f;
}

fs::path labels_or_default(const Options& o) {
  return o.labels.empty() ? fs::path(o.out_dir) / "labels.csv" : fs::path(o.labels);
}

fs::path data_dir_or_manifest_dir(const Options& o) {
  return o.data_dir.empty() ? fs::path(o.manifest).parent_path() : fs::path(o.data_dir);
}

int cmd_dist(const Options& o, std::ostream& out) {
  out << io::format_double(airm_distance(io::read_spd(o.a), io::read_spd(o.b))) << "\n";
  return 0;
}

int cmd_geodesic(const Options& o, std::ostream& out) {
  emit_matrix(geodesic(io::read_spd(o.a), io::read_spd(o.b), o.t).mat(), o.out, out);
  return 0;
}

int cmd_logmap(const Options& o, std::ostream& out) {
  const BasePoint base(io::read_spd(o.a));
  const SpdMatrix b = io::read_spd(o.b);
  emit_matrix((o.whitened ? log_map_whitened(base, b) : log_map(base, b)).mat(), o.out, out);
  return 0;
}

int cmd_expmap(const Options& o, std::ostream& out) {
  const BasePoint base(io::read_spd(o.a));
  const SymMatrix t = io::read_sym(o.b);
  emit_matrix((o.whitened ? exp_map_whitened(base, t) : exp_map(base, t)).mat(), o.out, out);
  return 0;
}

MeanConfig mean_config(const Options& o) {
  MeanConfig cfg;
  cfg.max_iters = o.max_iters;
  cfg.grad_tol = o.grad_tol;
  cfg.validate();
  return cfg;
}

int cmd_mean(const Options& o, std::ostream& out) {
  const std::vector<SpdMatrix> set = read_all(expand_inputs(o.inputs));
  std::ostringstream rep;
  rep << "method=" << o.method << "\n" << "count=" << set.size() << "\n";
  Matrix result;
  if (o.method == "karcher") {
    const MeanResult r = karcher_mean(set, mean_config(o));
    result = r.mean.mat();
    rep << "iterations=" << r.iterations << "\n"
        << "final_grad_norm=" << io::format_double(r.final_grad_norm) << "\n"
        << "scale=" << io::format_double(r.scale) << "\n"
        << "converged=" << (r.converged ? "true" : "false") << "\n";
  } else if (o.method == "logeuclid") {
    result = log_euclidean_mean(set).mat();
  } else if (o.method == "euclid") {
    result = euclidean_mean(set).mat();
  } else {
    fail(ErrorKind::InvalidArgument, "method must be karcher, logeuclid or euclid");
  }
  double log_det_sum = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    rep << "input_det_" << i << "=" << io::format_double(det(set[i])) << "\n";
    log_det_sum += log_det(set[i]);
  }
  rep << "input_det_geometric_mean=" << io::format_double(std::exp(log_det_sum / static_cast<double>(set.size())))
      << "\n"
      << "mean_det=" << io::format_double(result.determinant()) << "\n";
  emit_matrix(result, o.out, out);
  if (!o.report.empty()) io::write_text(o.report, rep.str());
  return 0;
}

std::string scores_csv(const Matrix& scores, const std::vector<long>& labels) {
  if (labels.empty()) return io::to_csv(scores);
  std::string text;
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    for (Eigen::Index c = 0; c < scores.cols(); ++c) text += io::format_double(scores(r, c)) + ",";
    text += std::to_string(labels[static_cast<std::size_t>(r)]) + "\n";
  }
  return text;
}

int cmd_pga_fit(const Options& o, std::ostream& out) {
  const std::vector<fs::path> paths = expand_inputs(o.inputs);
  const std::vector<long> labels = o.labels.empty() ? std::vector<long>{} : labels_for(paths, o.labels);
  const TangentDataset data = embed(read_all(paths), labels, std::nullopt,
                                    parse_tangent_variant(o.variant.empty() ? "ambient" : o.variant));
  const PgaModel model = pga_fit(data, o.k);
  emit_text(pga_to_json(model), o.model, out);
  if (!o.scores.empty()) {
    io::write_text(o.scores, scores_csv(pga_scores(model, data.vectors), o.label_column ? labels : std::vector<long>{}));
  }
  return 0;
}

int cmd_pga_project(const Options& o, std::ostream& out) {
  const PgaModel model = pga_from_json(io::read_text(o.model));
  const std::vector<fs::path> paths = expand_inputs(o.inputs);
  const std::vector<long> labels =
      o.labels.empty() || !o.label_column ? std::vector<long>{} : labels_for(paths, o.labels);
  Matrix scores(static_cast<Eigen::Index>(paths.size()), static_cast<Eigen::Index>(model.components()));
  for (std::size_t i = 0; i < paths.size(); ++i) {
    scores.row(static_cast<Eigen::Index>(i)) = pga_project(model, io::read_spd(paths[i])).transpose();
  }
  emit_text(scores_csv(scores, labels), o.scores, out);
  return 0;
}

int cmd_cov_ts(const Options& o, std::ostream& out) {
  const auto runs = load_runs(data_dir_or_manifest_dir(o), o.manifest, o.header);
  const LabeledCovSet set = build_cov_set(runs, o.center);
  write_cov_set(set, o.out_dir, labels_or_default(o));
  std::size_t repaired = 0;
  for (const CovMeta& m : set.meta) repaired += m.repaired_eigenvalues > 0 ? 1 : 0;
  out << "covariances=" << set.size() << "\n" << "repaired=" << repaired << "\n";
  return 0;
}

int cmd_cov_img(const Options& o, std::ostream& out) {
  const auto images = load_images(data_dir_or_manifest_dir(o), o.manifest);
  const FeatureBank bank = o.bank == "default" ? FeatureBank::default_bank() : FeatureBank::from_csv(o.bank);
  const LabeledCovSet set = build_image_cov_set(images, bank, filter_options(o));
  write_cov_set(set, o.out_dir, labels_or_default(o));
  io::write_text(fs::path(o.out_dir) / "bank.csv", bank.to_csv());
  std::size_t repaired = 0;
  for (const CovMeta& m : set.meta) repaired += m.repaired_eigenvalues > 0 ? 1 : 0;
  out << "covariances=" << set.size() << "\n" << "bank=" << o.bank << "\n" << "repaired=" << repaired << "\n";
  return 0;
}

int cmd_synth_ts(const Options& o, std::ostream& out) {
  ClassBenchmarkConfig cfg;
  cfg.n_classes = o.classes + 1;
  cfg.runs_per_class = o.runs;
  cfg.n = o.n;
  cfg.m = o.m;
  cfg.seed = o.seed;
  cfg.delta = o.delta;
  cfg.burn_in = o.burn_in;
  const ClassBenchmark bench = gen_class_benchmark(cfg);
  write_run_files(bench.runs, o.out_dir);
  out << "runs=" << bench.runs.size() << "\n" << "manifest=" << (fs::path(o.out_dir) / "manifest.csv").string() << "\n";
  return 0;
}

int cmd_synth_img(const Options& o, std::ostream& out) {
  TextureConfig cfg;
  cfg.n_normal = o.normal;
  cfg.n_defective = o.defective;
  cfg.size = o.size;
  cfg.seed = o.seed;
  const TextureBenchmark bench = gen_texture_benchmark(cfg);
  write_image_files(bench.images, o.out_dir);
  out << "images=" << bench.images.size() << "\n"
      << "manifest=" << (fs::path(o.out_dir) / "manifest.csv").string() << "\n";
  return 0;
}

void check_rows(const Matrix& x, const std::vector<long>& y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    fail(ErrorKind::DimensionMismatch, std::to_string(x.rows()) + " feature rows but " + std::to_string(y.size()) +
                                           " labels");
  }
}

int cmd_train(const Options& o, std::ostream& out) {
  const Matrix x = io::read_csv_matrix(o.features);
  const std::vector<long> y = label_column_of(o.labels);
  check_rows(x, y);
  const ModelKind kind = parse_model_kind(o.model_kind);
  LinearModel model = kind == ModelKind::Ridge ? ridge_fit(x, y, o.lambda)
                                               : svm_fit(x, y, SvmOptions{o.cost, o.epochs, o.seed});
  model.feature_note = fs::path(o.features).filename().string();
  emit_text(model_to_json(model), o.out, out);
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const LinearModel model = model_from_json(io::read_text(o.model));
  const Matrix x = io::read_csv_matrix(o.features);
  const std::vector<long> y = label_column_of(o.labels);
  check_rows(x, y);
  const Evaluation ev = evaluate(model, x, y);
  if (!o.confusion.empty()) {
    io::write_csv_matrix(o.confusion, o.normalized ? ev.confusion.normalized : Matrix(ev.confusion.counts.cast<double>()));
  }
  if (!o.predictions.empty()) {
    std::string text;
    for (long p : ev.predictions) text += std::to_string(p) + "\n";
    io::write_text(o.predictions, text);
  }
  out << "accuracy=" << io::format_double(ev.accuracy) << "\n";
  return 0;
}

int cmd_swelling(const Options& o, std::ostream& out) {
  const SwellingReport r = swelling_report(read_all(expand_inputs(o.inputs)), mean_config(o));
  emit_text(r.to_text(), o.out, out);
  return 0;
}

int cmd_pipeline(const Options& o, std::ostream& out) {
  PipelineConfig cfg = PipelineConfig::for_preset(parse_preset(o.preset));
  if (o.feature_source == "tangent") {
    cfg.features = FeatureSource::Tangent;
    cfg.pga_k = o.pga_k;
  } else if (o.feature_source == "pga") {
    cfg.features = FeatureSource::Tangent;
    cfg.pga_k = o.pga_k == 0 ? kDefaultComponents : o.pga_k;
  } else if (o.feature_source == "raw") {
    cfg.features = FeatureSource::Raw;
    cfg.pga_k = o.pga_k;
  } else {
    fail(ErrorKind::InvalidArgument, "features must be tangent, pga or raw");
  }
  if (!o.variant.empty()) cfg.variant = parse_tangent_variant(o.variant);
  if (!o.classifier.empty()) cfg.classifier = parse_model_kind(o.classifier);
  cfg.lambda = o.lambda;
  cfg.cost = o.cost;
  cfg.epochs = o.epochs;
  cfg.test_frac = o.test_frac;
  cfg.seed = o.seed;
  cfg.center = o.center;
  cfg.write_data = o.write_data;
  cfg.ts.n_classes = o.classes + 1;
  cfg.ts.runs_per_class = o.runs;
  cfg.ts.n = o.n;
  cfg.ts.m = o.m;
  cfg.ts.delta = o.delta;
  cfg.ts.burn_in = o.burn_in;
  cfg.textures.n_normal = o.normal;
  cfg.textures.n_defective = o.defective;
  cfg.textures.size = o.size;
  if (o.bank != "default") cfg.bank = fs::path(o.bank);
  cfg.filters = filter_options(o);
  cfg.manifest = o.manifest;
  if (!o.manifest.empty()) cfg.data_dir = data_dir_or_manifest_dir(o);
  cfg.covs_dir = o.covs_dir;
  cfg.labels = o.labels.empty() && !o.covs_dir.empty() ? fs::path(o.covs_dir) / "labels.csv" : fs::path(o.labels);
  cfg.run_files_have_header = o.header;
  cfg.out_dir = o.out_dir;
  const PipelineSummary s = run_pipeline(cfg);
  out << s.text;
  return 0;
}

void add_inputs(CLI::App* sub, Options& o) {
  sub->add_option("--inputs", o.inputs, "Matrix CSVs, directories, or .txt/.lst path lists")->required();
}

void add_filter_flags(CLI::App* sub, Options& o) {
  sub->add_option("--polarity", o.polarity, "Ridge polarity: bright|dark")->capture_default_str();
  sub->add_option("--boundary", o.boundary, "Filter boundary: reflect|wrap")->capture_default_str();
  sub->add_flag("--no-normalize", o.no_normalize, "Skip per-image min-max normalization of filter responses");
}

void add_ts_shape(CLI::App* sub, Options& o) {
  sub->add_option("--classes", o.classes, "Number of fault classes (a normal class 0 is added)")->capture_default_str();
  sub->add_option("--runs", o.runs, "Runs per class")->capture_default_str();
  sub->add_option("--n", o.n, "Variables per run")->capture_default_str();
  sub->add_option("--m", o.m, "Samples per run")->capture_default_str();
  sub->add_option("--delta", o.delta, "Fault magnitude")->capture_default_str();
  sub->add_option("--burn-in", o.burn_in, "Discarded warm-up steps")->capture_default_str();
}

void add_img_shape(CLI::App* sub, Options& o) {
  sub->add_option("--normal", o.normal, "Normal textures")->capture_default_str();
  sub->add_option("--defective,--ridges", o.defective, "Textures with a defect stroke")->capture_default_str();
  sub->add_option("--size", o.size, "Image side in pixels")->capture_default_str();
}

void add_mean_tuning(CLI::App* sub, Options& o) {
  sub->add_option("--max-iters", o.max_iters, "Karcher iteration cap")->capture_default_str();
  sub->add_option("--tol", o.grad_tol, "Relative gradient tolerance")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Riemannian geometry of SPD matrices and covariance classification pipelines", "spdgeom"};
  app.require_subcommand(1);
  app.fallthrough(false);

  auto* dist = app.add_subcommand("dist", "Affine-invariant distance between two SPD matrices");
  dist->add_option("A", o.a, "First matrix CSV")->required();
  dist->add_option("B", o.b, "Second matrix CSV")->required();

  auto* geo = app.add_subcommand("geodesic", "Point at parameter t on the geodesic from A to B");
  geo->add_option("A", o.a)->required();
  geo->add_option("B", o.b)->required();
  geo->add_option("--t", o.t, "Geodesic parameter")->capture_default_str();
  geo->add_option("--out", o.out, "Output CSV (stdout when omitted)");

  auto* logm = app.add_subcommand("logmap", "Tangent vector of B at BASE");
  logm->add_option("BASE", o.a)->required();
  logm->add_option("B", o.b)->required();
  logm->add_option("--out", o.out, "Output CSV (stdout when omitted)");
  logm->add_flag("--whitened", o.whitened, "Use log(A^-1/2 B A^-1/2) instead of the ambient form");

  auto* expm = app.add_subcommand("expmap", "Point reached from BASE along tangent T");
  expm->add_option("BASE", o.a)->required();
  expm->add_option("T", o.b)->required();
  expm->add_option("--out", o.out, "Output CSV (stdout when omitted)");
  expm->add_flag("--whitened", o.whitened, "Interpret T as a whitened tangent vector");

  auto* mean = app.add_subcommand("mean", "Mean of a set of SPD matrices");
  add_inputs(mean, o);
  mean->add_option("--method", o.method, "karcher|logeuclid|euclid")->capture_default_str();
  mean->add_option("--out", o.out, "Output CSV (stdout when omitted)");
  mean->add_option("--report", o.report, "Key=value report file");
  add_mean_tuning(mean, o);

  auto* pga = app.add_subcommand("pga", "Principal geodesic analysis");
  pga->require_subcommand(1);
  auto* pga_fit_cmd = pga->add_subcommand("fit", "Fit PGA at the Karcher mean");
  add_inputs(pga_fit_cmd, o);
  pga_fit_cmd->add_option("--labels", o.labels, "Labels CSV (id,label)");
  pga_fit_cmd->add_option("--k", o.k, "Number of components")->capture_default_str();
  pga_fit_cmd->add_option("--variant", o.variant, "ambient|whitened (default ambient)");
  pga_fit_cmd->add_option("--model", o.model, "Model JSON output (stdout when omitted)");
  pga_fit_cmd->add_option("--scores", o.scores, "Scores CSV output");
  pga_fit_cmd->add_flag("--label-column", o.label_column, "Append the label as the last scores column");
  auto* pga_proj_cmd = pga->add_subcommand("project", "Scores of new matrices under a fitted model");
  add_inputs(pga_proj_cmd, o);
  pga_proj_cmd->add_option("--model", o.model, "Model JSON")->required();
  pga_proj_cmd->add_option("--scores", o.scores, "Scores CSV output (stdout when omitted)");
  pga_proj_cmd->add_option("--labels", o.labels, "Labels CSV (id,label)");
  pga_proj_cmd->add_flag("--label-column", o.label_column, "Append the label as the last scores column");

  auto* cov_ts = app.add_subcommand("cov-ts", "Covariance matrices of time-series runs");
  cov_ts->add_option("--manifest", o.manifest, "run_id,path,label CSV")->required();
  cov_ts->add_option("--data-dir", o.data_dir, "Directory run paths are relative to (default: manifest dir)");
  cov_ts->add_flag("--center,!--no-center", o.center, "Subtract per-variable means (default on)");
  cov_ts->add_flag("--header", o.header, "Run files start with a header line");
  cov_ts->add_option("--out-dir", o.out_dir, "Output directory for <run_id>.cov.csv")->required();
  cov_ts->add_option("--labels", o.labels, "Labels CSV output (default: <out-dir>/labels.csv)");

  auto* cov_img = app.add_subcommand("cov-img", "Region covariance descriptors of grayscale images");
  cov_img->add_option("--manifest", o.manifest, "image_id,path,label CSV")->required();
  cov_img->add_option("--data-dir", o.data_dir, "Directory image paths are relative to (default: manifest dir)");
  cov_img->add_option("--bank", o.bank, "Feature bank CSV (name,kind,sigma) or 'default'")->capture_default_str();
  cov_img->add_option("--out-dir", o.out_dir, "Output directory for <image_id>.cov.csv")->required();
  cov_img->add_option("--labels", o.labels, "Labels CSV output (default: <out-dir>/labels.csv)");
  add_filter_flags(cov_img, o);

  auto* synth = app.add_subcommand("synth", "Seeded synthetic datasets");
  synth->require_subcommand(1);
  auto* synth_ts = synth->add_subcommand("ts", "Class-structured VAR(1) runs");
  add_ts_shape(synth_ts, o);
  synth_ts->add_option("--seed", o.seed, "Generator seed")->required();
  synth_ts->add_option("--out-dir", o.out_dir, "Output directory")->required();
  auto* synth_img = synth->add_subcommand("img", "Woven textures with and without defect strokes");
  add_img_shape(synth_img, o);
  synth_img->add_option("--seed", o.seed, "Generator seed")->required();
  synth_img->add_option("--out-dir", o.out_dir, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a linear classifier");
  train->add_option("--features", o.features, "Feature CSV, one row per sample")->required();
  train->add_option("--labels", o.labels, "Labels CSV aligned with feature rows")->required();
  train->add_option("--model-kind", o.model_kind, "ridge|svm")->capture_default_str();
  train->add_option("--lambda", o.lambda, "Ridge penalty")->capture_default_str();
  train->add_option("--cost", o.cost, "SVM cost")->capture_default_str();
  train->add_option("--epochs", o.epochs, "SVM epochs")->capture_default_str();
  train->add_option("--seed", o.seed, "SVM sampling seed")->required();
  train->add_option("--out", o.out, "Model JSON output (stdout when omitted)");

  auto* eval = app.add_subcommand("eval", "Evaluate a trained classifier");
  eval->add_option("--model", o.model, "Model JSON")->required();
  eval->add_option("--features", o.features, "Feature CSV")->required();
  eval->add_option("--labels", o.labels, "Labels CSV aligned with feature rows")->required();
  eval->add_option("--confusion", o.confusion, "Confusion matrix CSV output");
  eval->add_flag("--normalized", o.normalized, "Write the row-normalized confusion matrix");
  eval->add_option("--predictions", o.predictions, "Predicted labels output");

  auto* swell = app.add_subcommand("report-swelling", "Compare Euclidean and Karcher mean determinants");
  add_inputs(swell, o);
  swell->add_option("--out", o.out, "Report file (stdout when omitted)");
  add_mean_tuning(swell, o);

  auto* pipe = app.add_subcommand("pipeline", "End-to-end covariance classification run");
  pipe->add_option("--preset", o.preset, "tep-synthetic|textile-synthetic|ts-manifest|img-manifest|covs")
      ->capture_default_str();
  pipe->add_option("--features", o.feature_source, "tangent|pga|raw")->capture_default_str();
  pipe->add_option("--variant", o.variant, "Tangent coordinates: ambient|whitened (default whitened)");
  pipe->add_option("--pga-k", o.pga_k, "PGA components (0 keeps full vectors; pga defaults to 2)");
  pipe->add_option("--classifier", o.classifier, "ridge|svm (default: ridge for series, svm for images)");
  pipe->add_option("--lambda", o.lambda, "Ridge penalty")->capture_default_str();
  pipe->add_option("--cost", o.cost, "SVM cost")->capture_default_str();
  pipe->add_option("--epochs", o.epochs, "SVM epochs")->capture_default_str();
  pipe->add_option("--test-frac", o.test_frac, "Held-out fraction per class")->capture_default_str();
  pipe->add_option("--seed", o.seed, "Seed for data, split and training")->required();
  pipe->add_option("--out-dir", o.out_dir, "Run directory")->required();
  pipe->add_flag("--center,!--no-center", o.center, "Center time series before covariance (default on)");
  pipe->add_flag("--write-data", o.write_data, "Also write synthetic time series to <out-dir>/data");
  pipe->add_option("--manifest", o.manifest, "Manifest for ts-manifest / img-manifest");
  pipe->add_option("--data-dir", o.data_dir, "Directory manifest paths are relative to");
  pipe->add_flag("--header", o.header, "Run files start with a header line");
  pipe->add_option("--covs-dir", o.covs_dir, "Covariance directory for the covs preset");
  pipe->add_option("--labels", o.labels, "Labels CSV for the covs preset");
  pipe->add_option("--bank", o.bank, "Feature bank CSV or 'default'")->capture_default_str();
  add_filter_flags(pipe, o);
  add_ts_shape(pipe, o);
  add_img_shape(pipe, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const CLI::App* sub = &app; sub != nullptr;) {
      const auto subs = sub->get_subcommands();
      sub = subs.empty() ? nullptr : subs.front();
      if (sub != nullptr) target = sub;
    }
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ERROR " << to_string(ErrorKind::InvalidArgument) << ": " << e.what() << "\n";
    err << app.help();
    return 2;
  }

  try {
    if (dist->parsed()) return cmd_dist(o, out);
    if (geo->parsed()) return cmd_geodesic(o, out);
    if (logm->parsed()) return cmd_logmap(o, out);
    if (expm->parsed()) return cmd_expmap(o, out);
    if (mean->parsed()) return cmd_mean(o, out);
    if (pga_fit_cmd->parsed()) return cmd_pga_fit(o, out);
    if (pga_proj_cmd->parsed()) return cmd_pga_project(o, out);
    if (cov_ts->parsed()) return cmd_cov_ts(o, out);
    if (cov_img->parsed()) return cmd_cov_img(o, out);
    if (synth_ts->parsed()) return cmd_synth_ts(o, out);
    if (synth_img->parsed()) return cmd_synth_img(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (swell->parsed()) return cmd_swelling(o, out);
    if (pipe->parsed()) return cmd_pipeline(o, out);
  } catch (const Error& e) {
    err << "ERROR " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "ERROR " << to_string(ErrorKind::IoError) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
  err << "internal error: no subcommand dispatched\n";
  return 1;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("spdgeom");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace spdgeom::cli
