#include "spdgeom/pipeline.hpp"

#include "spdgeom/error.hpp"
#include "spdgeom/frechet_mean.hpp"
#include "spdgeom/matrix_io.hpp"

#include <optional>
#include <sstream>

namespace spdgeom {

namespace fs = std::filesystem;

namespace {

// Sub-stream indices derived from the single user seed.
constexpr std::uint64_t kSplitStream = 101;
constexpr std::uint64_t kSvmStream = 102;

bool is_time_series(Preset p) {
  return p == Preset::TepSynthetic || p == Preset::TsManifest || p == Preset::Covariances;
}

Matrix stack_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

Matrix select_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::vector<long> select(const std::vector<long>& v, const std::vector<std::size_t>& idx) {
  std::vector<long> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

Matrix flatten_image(const GrayImage& img) {
  const Eigen::Index w = img.pixels.cols();
  Matrix row(1, img.pixels.size());
  for (Eigen::Index y = 0; y < img.pixels.rows(); ++y) {
    for (Eigen::Index x = 0; x < w; ++x) row(0, y * w + x) = img.pixels(y, x);
  }
  return row;
}

}  // namespace

void write_run_files(const std::vector<RunRecord>& runs, const fs::path& dir) {
  std::string manifest = "run_id,path,label\n";
  std::vector<io::LabelRow> labels;
  for (const RunRecord& run : runs) {
    io::write_csv_matrix(dir / (run.run_id + ".csv"), run.signals);
    manifest += run.run_id + "," + run.run_id + ".csv," + std::to_string(run.label) + "\n";
    labels.push_back({run.run_id, run.label});
  }
  io::write_text(dir / "manifest.csv", manifest);
  io::write_labels(dir / "labels.csv", labels);
}

void write_image_files(const std::vector<ImageRecord>& images, const fs::path& dir) {
  std::string manifest = "image_id,path,label\n";
  std::vector<io::LabelRow> labels;
  for (const ImageRecord& rec : images) {
    write_pgm(dir / (rec.image_id + ".pgm"), rec.image);
    manifest += rec.image_id + "," + rec.image_id + ".pgm," + std::to_string(rec.label) + "\n";
    labels.push_back({rec.image_id, rec.label});
  }
  io::write_text(dir / "manifest.csv", manifest);
  io::write_labels(dir / "labels.csv", labels);
}

std::string_view to_string(Preset p) noexcept {
  switch (p) {
    case Preset::TepSynthetic: return "tep-synthetic";
    case Preset::TextileSynthetic: return "textile-synthetic";
    case Preset::TsManifest: return "ts-manifest";
    case Preset::ImageManifest: return "img-manifest";
    case Preset::Covariances: return "covs";
  }
  return "tep-synthetic";
}

Preset parse_preset(std::string_view s) {
  for (Preset p : {Preset::TepSynthetic, Preset::TextileSynthetic, Preset::TsManifest, Preset::ImageManifest,
                   Preset::Covariances}) {
    if (to_string(p) == s) return p;
  }
  fail(ErrorKind::InvalidArgument, "unknown preset '" + std::string(s) + "'");
}

PipelineConfig PipelineConfig::for_preset(Preset p) {
  PipelineConfig cfg;
  cfg.preset = p;
  cfg.classifier = is_time_series(p) ? ModelKind::Ridge : ModelKind::Svm;
  return cfg;
}

PipelineSummary run_pipeline(const PipelineConfig& cfg) {
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  const ModelKind kind = cfg.classifier.value_or(is_time_series(cfg.preset) ? ModelKind::Ridge : ModelKind::Svm);

  // 1. Ingest or synthesize.
  LabeledCovSet covs;
  std::vector<ImageRecord> images;
  std::vector<RunRecord> runs;
  switch (cfg.preset) {
    case Preset::TepSynthetic: {
      ClassBenchmarkConfig bc = cfg.ts;
      bc.seed = cfg.seed;
      ClassBenchmark bench = gen_class_benchmark(bc);
      if (cfg.write_data) write_run_files(bench.runs, out / "data");
      runs = std::move(bench.runs);
      break;
    }
    case Preset::TsManifest:
      runs = load_runs(cfg.data_dir, cfg.manifest, cfg.run_files_have_header);
      break;
    case Preset::TextileSynthetic: {
      TextureConfig tc = cfg.textures;
      tc.seed = cfg.seed;
      write_image_files(gen_texture_benchmark(tc).images, out / "data");
      // Reload so the run uses exactly the quantized files on disk.
      images = load_images(out / "data", out / "data" / "manifest.csv");
      break;
    }
    case Preset::ImageManifest:
      images = load_images(cfg.data_dir, cfg.manifest);
      break;
    case Preset::Covariances:
      covs = read_cov_set(cfg.covs_dir, cfg.labels);
      break;
  }

  // 2. Covariances.
  std::string bank_note;
  if (!runs.empty()) covs = build_cov_set(runs, cfg.center);
  if (!images.empty()) {
    const FeatureBank bank = cfg.bank ? FeatureBank::from_csv(*cfg.bank) : FeatureBank::default_bank();
    io::write_text(out / "bank.csv", bank.to_csv());
    covs = build_image_cov_set(images, bank, cfg.filters);
    bank_note = cfg.bank ? cfg.bank->string() : "default";
  }
  write_cov_set(covs, out / "covs", out / "labels.csv");
  std::size_t repaired = 0;
  for (const CovMeta& m : covs.meta) repaired += m.repaired_eigenvalues > 0 ? 1 : 0;

  // 3-4. Mean and features.
  const std::vector<long>& labels = covs.labels;
  std::vector<Vector> rows;
  int karcher_iterations = 0;
  std::string feature_note;
  std::optional<BasePoint> base;
  if (cfg.features == FeatureSource::Tangent) {
    const MeanResult mean = karcher_mean(covs.matrices);
    karcher_iterations = mean.iterations;
    io::write_csv_matrix(out / "mean.csv", mean.mean.mat());
    std::ostringstream rep;
    rep << "iterations=" << mean.iterations << "\n"
        << "final_grad_norm=" << io::format_double(mean.final_grad_norm) << "\n"
        << "scale=" << io::format_double(mean.scale) << "\n"
        << "converged=" << (mean.converged ? "true" : "false") << "\n"
        << "det_mean=" << io::format_double(det(mean.mean)) << "\n";
    io::write_text(out / "mean_report.txt", rep.str());
    base.emplace(mean.mean);
    for (const SpdMatrix& p : covs.matrices) rows.push_back(embed_one(*base, p, cfg.variant));
    feature_note = "tangent-" + std::string(to_string(cfg.variant));
  } else if (!images.empty()) {
    for (const ImageRecord& rec : images) rows.push_back(flatten_image(rec.image).row(0).transpose());
    feature_note = "raw-pixels";
  } else {
    for (const SpdMatrix& p : covs.matrices) rows.push_back(sym_vec(p));
    feature_note = "raw";
  }
  Matrix features = stack_rows(rows);

  if (cfg.pga_k > 0) {
    const std::size_t n = covs.matrices.front().dim();
    const Embedding variant = base ? cfg.variant : Embedding::Raw;
    const TangentDataset ds{base.value_or(BasePoint(SpdMatrix::identity(n))), features, labels, variant, n};
    const PgaModel model = pga_fit(ds, cfg.pga_k);
    io::write_text(out / "pga_model.json", pga_to_json(model));
    features = pga_scores(model, features);
    feature_note += "-pga" + std::to_string(cfg.pga_k);
  }
  io::write_csv_matrix(out / "features.csv", features);

  // 5. Split.
  const Split sp = split(labels.size(), cfg.test_frac, derive_seed(cfg.seed, kSplitStream), labels);
  {
    std::string text;
    for (std::size_t i : sp.train) text += covs.meta[i].id + ",train\n";
    for (std::size_t i : sp.test) text += covs.meta[i].id + ",test\n";
    io::write_text(out / "split.csv", text);
  }

  // 6. Train.
  const Matrix x_train = select_rows(features, sp.train);
  const std::vector<long> y_train = select(labels, sp.train);
  LinearModel model;
  if (kind == ModelKind::Ridge) {
    model = ridge_fit(x_train, y_train, cfg.lambda);
  } else {
    model = svm_fit(x_train, y_train, SvmOptions{cfg.cost, cfg.epochs, derive_seed(cfg.seed, kSvmStream)});
  }
  model.feature_note = feature_note;
  io::write_text(out / "model.json", model_to_json(model));

  // 7. Evaluate.
  const Matrix x_test = select_rows(features, sp.test);
  const std::vector<long> y_test = select(labels, sp.test);
  const Evaluation ev = evaluate(model, x_test, y_test);
  {
    std::string text = "id,true,predicted\n";
    for (std::size_t i = 0; i < sp.test.size(); ++i) {
      text += covs.meta[sp.test[i]].id + "," + std::to_string(y_test[i]) + "," + std::to_string(ev.predictions[i]) + "\n";
    }
    io::write_text(out / "predictions.csv", text);
  }
  io::write_csv_matrix(out / "confusion.csv", ev.confusion.counts.cast<double>());
  io::write_csv_matrix(out / "confusion_normalized.csv", ev.confusion.normalized);

  std::size_t binary_hits = 0;
  for (std::size_t i = 0; i < y_test.size(); ++i) {
    if ((y_test[i] == 0) == (ev.predictions[i] == 0)) ++binary_hits;
  }

  PipelineSummary s;
  s.accuracy = ev.accuracy;
  s.normal_vs_faulty_accuracy = y_test.empty() ? 0.0 : static_cast<double>(binary_hits) / static_cast<double>(y_test.size());
  s.n_samples = labels.size();
  s.n_train = sp.train.size();
  s.n_test = sp.test.size();
  s.feature_dim = static_cast<std::size_t>(features.cols());
  s.karcher_iterations = karcher_iterations;
  s.confusion = ev.confusion;

  std::ostringstream os;
  os << "preset=" << to_string(cfg.preset) << "\n"
     << "seed=" << cfg.seed << "\n"
     << "split_seed=" << derive_seed(cfg.seed, kSplitStream) << "\n";
  if (kind == ModelKind::Svm) os << "svm_seed=" << derive_seed(cfg.seed, kSvmStream) << "\n";
  os << "features=" << (cfg.features == FeatureSource::Tangent ? "tangent" : "raw") << "\n"
     << "feature_note=" << feature_note << "\n"
     << "variant=" << to_string(cfg.variant) << "\n"
     << "pga_k=" << cfg.pga_k << "\n"
     << "classifier=" << to_string(kind) << "\n";
  if (kind == ModelKind::Ridge) {
    os << "lambda=" << io::format_double(cfg.lambda) << "\n";
  } else {
    os << "cost=" << io::format_double(cfg.cost) << "\n" << "epochs=" << cfg.epochs << "\n";
  }
  os << "test_frac=" << io::format_double(cfg.test_frac) << "\n"
     << "center=" << (cfg.center ? "true" : "false") << "\n";
  if (cfg.preset == Preset::TepSynthetic) {
    os << "ts_classes=" << cfg.ts.n_classes << "\n"
       << "ts_runs_per_class=" << cfg.ts.runs_per_class << "\n"
       << "ts_n=" << cfg.ts.n << "\n"
       << "ts_m=" << cfg.ts.m << "\n"
       << "ts_delta=" << io::format_double(cfg.ts.delta) << "\n";
  }
  if (cfg.preset == Preset::TextileSynthetic) {
    os << "img_normal=" << cfg.textures.n_normal << "\n"
       << "img_defective=" << cfg.textures.n_defective << "\n"
       << "img_size=" << cfg.textures.size << "\n";
  }
  if (!bank_note.empty()) os << "bank=" << bank_note << "\n";
  os << "n_samples=" << s.n_samples << "\n"
     << "n_train=" << s.n_train << "\n"
     << "n_test=" << s.n_test << "\n"
     << "feature_dim=" << s.feature_dim << "\n"
     << "repaired_covariances=" << repaired << "\n"
     << "karcher_iterations=" << karcher_iterations << "\n"
     << "accuracy=" << io::format_double(s.accuracy) << "\n"
     << "normal_vs_faulty_accuracy=" << io::format_double(s.normal_vs_faulty_accuracy) << "\n"
     << "confusion=confusion.csv\n"
     << "confusion_normalized=confusion_normalized.csv\n";
  s.text = os.str();
  io::write_text(out / "summary.txt", s.text);
  return s;
}

}  // namespace spdgeom
