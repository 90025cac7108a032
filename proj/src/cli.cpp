#include "smsloc/cli.hpp"

#include "smsloc/bench.hpp"
#include "smsloc/eval.hpp"
#include "smsloc/io.hpp"
#include "smsloc/model.hpp"
#include "smsloc/postprocess.hpp"
#include "smsloc/synth.hpp"
#include "smsloc/train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace smsloc::cli {

namespace fs = std::filesystem;

namespace {

struct GenArgs {
  fs::path out;
  std::uint64_t seed = 0;
  DatasetConfig data;
};

struct TrainArgs {
  fs::path manifest;
  fs::path model_out;
  fs::path history_out;
  fs::path priors_out;
  std::string classes;
  std::string margin = "gt-length";
  double init_scale = 0.01;
  bool no_balance = false;
  TrainConfig config;
};

struct ScoreArgs {
  fs::path model;
  fs::path manifest;
  fs::path out_dir;
};

struct DetectArgs {
  fs::path scores_manifest;
  fs::path priors;
  fs::path out;
  std::string mode = "sms";
  bool no_prior = false;
  bool no_length_norm = false;
  PipelineConfig config;
};

struct EvalArgs {
  fs::path detections;
  fs::path annotations;
  fs::path out;
  std::vector<double> sigmas = kDefaultSigmas;
};

struct BenchArgs {
  fs::path out;
  fs::path plot_data;
  BenchConfig config;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError(path.string() + ": cannot open for writing");
  return f;
}

std::vector<TrainExample> load_training_set(const std::vector<ManifestEntry>& entries,
                                            const std::vector<std::string>& class_names,
                                            const fs::path& manifest) {
  std::vector<TrainExample> out;
  for (const auto& e : entries) {
    if (!e.gt) throw DataError(manifest.string() + ": entry '" + e.id + "' has no ground truth window");
    auto it = std::find(class_names.begin(), class_names.end(), e.class_name);
    if (it == class_names.end()) throw DataError(manifest.string() + ": unknown class '" + e.class_name + "'");
    TrainExample ex{read_features(e.path), *e.gt, static_cast<int>(it - class_names.begin()), e.id};
    try {
      ex.validate();
    } catch (const std::invalid_argument& err) {
      throw DataError(manifest.string() + ": " + err.what());
    }
    if (!out.empty() && ex.features.cols() != out.front().features.cols())
      throw DataError(e.path.string() + ": feature dimension " + std::to_string(ex.features.cols()) +
                      " differs from " + std::to_string(out.front().features.cols()));
    out.push_back(std::move(ex));
  }
  if (out.empty()) throw DataError(manifest.string() + ": no training examples");
  return out;
}

void run_gen(const GenArgs& a, std::ostream& out) {
  DatasetConfig cfg = a.data;
  cfg.seed = a.seed;
  cfg.test.num_classes = cfg.train.num_classes;
  cfg.test.dim = cfg.train.dim;
  cfg.test.noise_std = cfg.train.noise_std;
  cfg.test.part_signal = cfg.train.part_signal;
  const auto ds = generate_dataset(cfg);
  write_dataset(ds, a.out);
  std::size_t test_windows = 0;
  for (const auto& t : ds.test) test_windows += t.sequence.annotations.size();
  out << "gen ok train_clips=" << ds.train.size() << " test_videos=" << ds.test.size()
      << " test_windows=" << test_windows << " classes=" << cfg.train.num_classes << " dim=" << cfg.train.dim
      << " out=" << a.out.generic_string() << "\n";
}

void run_train(TrainArgs a, std::ostream& out) {
  const auto entries = read_manifest(a.manifest);
  std::vector<std::string> class_names;
  if (!a.classes.empty()) {
    std::stringstream ss(a.classes);
    std::string name;
    while (std::getline(ss, name, ',')) class_names.push_back(name);
  } else {
    std::set<std::string> names;
    for (const auto& e : entries) names.insert(e.class_name);
    class_names.assign(names.begin(), names.end());
  }
  const auto dataset = load_training_set(entries, class_names, a.manifest);

  a.config.margin_mode = a.margin == "fixed" ? MarginMode::Fixed : MarginMode::GtLength;
  a.config.middle_balancing = !a.no_balance;
  ModelParams init = init_params(static_cast<int>(class_names.size()),
                                 static_cast<int>(dataset.front().features.cols()), a.config.seed, a.init_scale);
  init.class_names = class_names;
  const auto result = train(dataset, std::move(init), a.config);
  save_checkpoint(result.params, a.model_out);

  if (!a.history_out.empty()) {
    auto f = open_out(a.history_out);
    write_history(f, result.history);
  }
  if (!a.priors_out.empty()) {
    std::vector<std::vector<int>> durations(class_names.size());
    for (const auto& ex : dataset) durations[ex.class_id].push_back(ex.gt.length());
    std::vector<DurationPrior> priors;
    for (std::size_t c = 0; c < durations.size(); ++c)
      if (!durations[c].empty()) priors.push_back(fit_duration_prior(durations[c], static_cast<int>(c)));
    write_text_file(a.priors_out, priors_to_string(priors, class_names));
  }
  out << "train ok examples=" << dataset.size() << " classes=" << class_names.size()
      << " epochs=" << result.history.size() << " first_total=" << format_double(result.history.front().total)
      << " final_total=" << format_double(result.history.back().total)
      << " model=" << a.model_out.generic_string() << "\n";
}

void run_score(const ScoreArgs& a, std::ostream& out) {
  const ModelParams params = load_checkpoint(a.model);
  const auto entries = read_manifest(a.manifest);
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw DataError(a.out_dir.string() + ": cannot create directory: " + ec.message());
  std::vector<ManifestEntry> written;
  for (const auto& e : entries) {
    const FeatureMatrix x = read_features(e.path);
    if (x.cols() != params.dim)
      throw DataError(e.path.string() + ": feature dimension " + std::to_string(x.cols()) +
                      " does not match model dimension " + std::to_string(params.dim));
    const fs::path rel = e.id + ".scores";
    write_scores(a.out_dir / rel, {params.class_names, score_all_classes(params, x)});
    written.push_back({e.id, rel, std::nullopt, {}});
  }
  write_manifest(a.out_dir / "scores_manifest.tsv", written);
  out << "score ok videos=" << written.size() << " classes=" << params.num_classes
      << " manifest=" << (a.out_dir / "scores_manifest.tsv").generic_string() << "\n";
}

void run_detect(DetectArgs a, std::ostream& out) {
  a.config.mode = a.mode == "flat" ? DetectMode::Flat : DetectMode::Sms;
  a.config.use_prior = !a.no_prior && !a.priors.empty();
  a.config.use_length_norm = !a.no_length_norm;
  a.config.validate();
  const std::string prior_text = a.config.use_prior ? read_text_file(a.priors) : std::string();

  std::vector<DetectionRecord> records;
  std::size_t videos = 0;
  for (const auto& e : read_manifest(a.scores_manifest)) {
    const ScoreFile file = read_scores(e.path);
    std::vector<std::optional<DurationPrior>> priors(file.class_names.size());
    if (a.config.use_prior) {
      try {
        priors = priors_from_string(prior_text, file.class_names);
      } catch (const DataError& err) {
        throw DataError(a.priors.string() + ": " + err.what());
      }
    }
    for (const auto& d : detect(file.scores, priors, a.config))
      records.push_back({e.id, file.class_names[d.class_id], d.window, d.score});
    ++videos;
  }
  auto f = open_out(a.out);
  write_detections(f, records, a.config.fps);
  out << "detect ok videos=" << videos << " detections=" << records.size()
      << " mode=" << (a.config.mode == DetectMode::Sms ? "sms" : "flat") << " k=" << a.config.k
      << " out=" << a.out.generic_string() << "\n";
}

void run_eval(const EvalArgs& a, std::ostream& out) {
  const auto annotations = read_annotations(a.annotations);
  const auto records = read_detections(a.detections);
  std::set<std::string> names;
  for (const auto& r : annotations) names.insert(r.class_name);
  for (const auto& r : records) names.insert(r.class_name);
  const std::vector<std::string> class_names(names.begin(), names.end());
  auto id_of = [&](const std::string& name) {
    return static_cast<int>(std::lower_bound(class_names.begin(), class_names.end(), name) - class_names.begin());
  };
  GroundTruthSet gts;
  for (const auto& r : annotations) gts.add(r.video_id, id_of(r.class_name), r.window);
  std::vector<VideoDetection> dets;
  for (const auto& r : records) dets.push_back({r.video_id, {r.window, r.score, id_of(r.class_name)}});
  const auto result = mean_ap(dets, gts, a.sigmas);

  std::ostringstream table;
  write_ap_table(table, result, class_names);
  if (a.out.empty()) {
    out << table.str();
  } else {
    write_text_file(a.out, table.str());
  }
  out << "eval ok classes=" << result.classes.size() << " detections=" << records.size() << " mAP=";
  for (std::size_t i = 0; i < result.mean_ap.size(); ++i) out << (i ? "," : "") << format_fixed(result.mean_ap[i], 6);
  out << "\n";
}

void run_bench(const BenchArgs& a, std::ostream& out) {
  const auto rows = bench_scaling(a.config);
  std::ostringstream report;
  write_bench_report(report, rows);
  if (a.out.empty()) {
    out << report.str();
  } else {
    write_text_file(a.out, report.str());
  }
  if (!a.plot_data.empty()) {
    auto f = open_out(a.plot_data);
    write_plot_data(f, rows, "sms");
  }
  bool agree = true;
  for (const auto& r : rows)
    if (r.algorithm == "brute")
      for (const auto& s : rows)
        if (s.algorithm == "sms" && s.n == r.n && s.checksum != r.checksum) agree = false;
  out << "bench ok sizes=" << a.config.ns.size() << " k=" << a.config.k;
  if (rows.size() > 1 && a.config.ns.size() > 1) out << " sms_slope=" << format_fixed(scaling_slope(rows, "sms"), 4);
  out << " brute_agrees=" << (agree ? "yes" : "no") << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal interval detection with top-K structured maximal sums", "smsloc"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Maximum worker threads")->check(CLI::PositiveNumber);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a seeded synthetic dataset");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--num-classes", gen.data.train.num_classes, "Number of classes")->capture_default_str();
  gen_cmd->add_option("--dim", gen.data.train.dim, "Feature dimension")->capture_default_str();
  gen_cmd->add_option("--train-clips", gen.data.train_clips, "Single-instance training clips")->capture_default_str();
  gen_cmd->add_option("--test-videos", gen.data.test_videos, "Multi-instance test videos")->capture_default_str();
  gen_cmd->add_option("--noise-std", gen.data.train.noise_std, "Background noise std")->capture_default_str();
  gen_cmd->add_option("--part-signal", gen.data.train.part_signal, "Part signature magnitude")->capture_default_str();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the linear frame scorer");
  train_cmd->add_option("--manifest", tr.manifest, "Training manifest")->required();
  train_cmd->add_option("--out", tr.model_out, "Model checkpoint to write")->required();
  train_cmd->add_option("--history", tr.history_out, "Per-epoch loss history (TSV)");
  train_cmd->add_option("--priors-out", tr.priors_out, "Duration priors fitted on the training windows");
  train_cmd->add_option("--classes", tr.classes, "Comma-separated class vocabulary (default: sorted manifest classes)");
  train_cmd->add_option("--epochs", tr.config.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--lr", tr.config.learning_rate, "Learning rate")->capture_default_str();
  train_cmd->add_option("--lambda", tr.config.lambda_cls, "Classification loss weight")->capture_default_str();
  train_cmd->add_option("--margin", tr.margin, "Margin mode")->check(CLI::IsMember({"gt-length", "fixed"}));
  train_cmd->add_option("--fixed-margin", tr.config.fixed_margin, "Margin for --margin fixed")->capture_default_str();
  train_cmd->add_option("--seed", tr.config.seed, "Random seed");
  train_cmd->add_option("--init-scale", tr.init_scale, "Uniform init half-width")->capture_default_str();
  train_cmd->add_flag("--no-balance", tr.no_balance, "Disable 1/|window| middle-frame balancing");
  train_cmd->add_flag("--jitter", tr.config.boundary_jitter, "Resample gt boundaries within 10% zones");
  train_cmd->add_flag("--decay", tr.config.step_decay, "Use learning_rate / epoch");
  train_cmd->add_flag("--freeze-bias", tr.config.freeze_bias, "Keep biases at their initial value");

  ScoreArgs sc;
  auto* score_cmd = app.add_subcommand("score", "Write per-class part scores for a set of videos");
  score_cmd->add_option("--model", sc.model, "Model checkpoint")->required();
  score_cmd->add_option("--manifest", sc.manifest, "Video manifest (id, feature path)")->required();
  score_cmd->add_option("--out-dir", sc.out_dir, "Output directory")->required();

  DetectArgs dt;
  auto* detect_cmd = app.add_subcommand("detect", "Detect action windows from part scores");
  detect_cmd->add_option("--scores", dt.scores_manifest, "Scores manifest written by `score`")->required();
  detect_cmd->add_option("--priors", dt.priors, "Duration priors written by `train`");
  detect_cmd->add_option("--out", dt.out, "Detections file to write")->required();
  detect_cmd->add_option("--k", dt.config.k, "Windows per snippet and class")->capture_default_str();
  detect_cmd->add_option("--fps", dt.config.fps, "Frames per second")->capture_default_str();
  detect_cmd->add_option("--snippet-seconds", dt.config.snippet_seconds, "Snippet duration")->capture_default_str();
  detect_cmd->add_option("--overlap-seconds", dt.config.overlap_seconds, "Overlap between snippets")->capture_default_str();
  detect_cmd->add_option("--nms-iou", dt.config.nms_iou, "NMS IoU threshold")->capture_default_str();
  detect_cmd->add_flag("--no-prior", dt.no_prior, "Ignore duration priors");
  detect_cmd->add_flag("--no-length-norm", dt.no_length_norm, "Do not divide scores by window length");
  detect_cmd->add_option("--mode", dt.mode, "sms or flat")->check(CLI::IsMember({"sms", "flat"}))->capture_default_str();
  detect_cmd->add_flag("--mean-center", dt.config.mean_center, "Flat mode: subtract each track's mean");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Average precision table");
  eval_cmd->add_option("--detections", ev.detections, "Detections file")->required();
  eval_cmd->add_option("--annotations", ev.annotations, "Ground-truth annotations")->required();
  eval_cmd->add_option("--sigma", ev.sigmas, "IoU thresholds")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--out", ev.out, "AP table to write (default: stdout)");

  BenchArgs bn;
  auto* bench_cmd = app.add_subcommand("bench", "Measure scaling of top-K inference");
  bench_cmd->add_option("--ns", bn.config.ns, "Increasing sequence lengths")->delimiter(',');
  bench_cmd->add_option("--k", bn.config.k, "K")->capture_default_str();
  bench_cmd->add_option("--reps", bn.config.reps, "Timed repetitions (>= 5)")->capture_default_str();
  bench_cmd->add_option("--seed", bn.config.seed, "Random seed");
  bench_cmd->add_option("--brute-cap", bn.config.brute_cap, "Largest n for exhaustive search")->capture_default_str();
  bench_cmd->add_option("--out", bn.out, "Report file (default: stdout)");
  bench_cmd->add_option("--plot-data", bn.plot_data, "Write 'n seconds' pairs for the sms rows");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) run_gen(gen, out);
    if (*train_cmd) run_train(tr, out);
    if (*score_cmd) run_score(sc, out);
    if (*detect_cmd) {
      dt.config.threads = threads;
      run_detect(dt, out);
    }
    if (*eval_cmd) run_eval(ev, out);
    if (*bench_cmd) run_bench(bn, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace smsloc::cli
