#include "smsloc/synth.hpp"

#include "smsloc/io.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace smsloc {

namespace {

void check_range(const IntRange& r, const char* what) {
  if (r.min > r.max) throw std::invalid_argument(std::string(what) + " range is empty");
}

int draw(const IntRange& r, std::mt19937_64& rng) { return std::uniform_int_distribution<int>(r.min, r.max)(rng); }

std::string numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d", prefix, i);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_classes < 1) throw std::invalid_argument("num_classes must be positive");
  if (dim < kNumParts * num_classes)
    throw std::invalid_argument("dim must be at least 3 * num_classes for the part signature");
  check_range(sequence_length, "sequence length");
  check_range(windows_per_sequence, "windows per sequence");
  check_range(window_length, "window length");
  if (sequence_length.min < 1) throw std::invalid_argument("sequences need at least one frame");
  if (windows_per_sequence.min < 0) throw std::invalid_argument("window count cannot be negative");
  if (window_length.min < 2) throw std::invalid_argument("planted windows need length >= 2");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
  const int k = windows_per_sequence.max;
  if (k > 0 && k * window_length.max + kMinGap * (k - 1) > sequence_length.min)
    throw std::invalid_argument("planted windows do not fit: " + std::to_string(k) + " windows of up to " +
                                std::to_string(window_length.max) + " frames in " +
                                std::to_string(sequence_length.min) + " frames");
}

SyntheticSequence generate_sequence(const SynthConfig& config, std::mt19937_64& rng) {
  config.validate();
  const int n = draw(config.sequence_length, rng);
  const int count = draw(config.windows_per_sequence, rng);

  SyntheticSequence out;
  out.features = FeatureMatrix::Zero(n, config.dim);
  if (config.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, config.noise_std);
    for (Eigen::Index t = 0; t < out.features.rows(); ++t)
      for (Eigen::Index j = 0; j < out.features.cols(); ++j) out.features(t, j) = noise(rng);
  }

  std::vector<int> lengths(count);
  std::vector<int> classes(count);
  int required = 0;
  for (int i = 0; i < count; ++i) {
    lengths[i] = draw(config.window_length, rng);
    classes[i] = draw({0, config.num_classes - 1}, rng);
    required += lengths[i] + (i > 0 ? kMinGap : 0);
  }
  // Spread the free frames over the count + 1 gaps.
  const int slack = n - required;
  std::vector<int> cuts(count);
  for (int& c : cuts) c = draw({0, slack}, rng);
  std::sort(cuts.begin(), cuts.end());

  int cursor = 1;
  int used_slack = 0;
  for (int i = 0; i < count; ++i) {
    cursor += cuts[i] - used_slack;
    used_slack = cuts[i];
    const Window w{cursor, cursor + lengths[i] - 1};
    const int base = kNumParts * classes[i];
    out.features(w.start - 1, base) += config.part_signal;
    for (int t = w.start + 1; t <= w.end - 1; ++t) out.features(t - 1, base + 1) += config.part_signal;
    out.features(w.end - 1, base + 2) += config.part_signal;
    out.annotations.push_back({w, classes[i]});
    cursor = w.end + 1 + kMinGap;
  }
  return out;
}

void DatasetConfig::validate() const {
  train.validate();
  test.validate();
  if (train.num_classes != test.num_classes || train.dim != test.dim)
    throw std::invalid_argument("train and test splits must share classes and dimension");
  if (train.windows_per_sequence.min != 1 || train.windows_per_sequence.max != 1)
    throw std::invalid_argument("training clips hold exactly one action instance");
  if (train_clips < 0 || test_videos < 0) throw std::invalid_argument("split sizes cannot be negative");
}

SyntheticDataset generate_dataset(const DatasetConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  SyntheticDataset ds;
  for (int c = 0; c < config.train.num_classes; ++c) ds.class_names.push_back("class_" + std::to_string(c));
  for (int i = 0; i < config.train_clips; ++i) ds.train.push_back({numbered("train", i), generate_sequence(config.train, rng)});
  for (int i = 0; i < config.test_videos; ++i) ds.test.push_back({numbered("test", i), generate_sequence(config.test, rng)});
  return ds;
}

void write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "train", ec);
  if (!ec) fs::create_directories(dir / "test", ec);
  if (ec) throw DataError(dir.string() + ": cannot create dataset directory: " + ec.message());

  std::vector<ManifestEntry> train_manifest, test_manifest;
  std::vector<Annotation> train_ann, test_ann;
  for (const auto& [id, seq] : dataset.train) {
    const fs::path rel = fs::path("train") / (id + ".feat");
    write_features(dir / rel, seq.features);
    const auto& a = seq.annotations.front();
    train_manifest.push_back({id, rel, a.window, dataset.class_names[a.class_id]});
    train_ann.push_back({id, dataset.class_names[a.class_id], a.window});
  }
  for (const auto& [id, seq] : dataset.test) {
    const fs::path rel = fs::path("test") / (id + ".feat");
    write_features(dir / rel, seq.features);
    test_manifest.push_back({id, rel, std::nullopt, {}});
    for (const auto& a : seq.annotations) test_ann.push_back({id, dataset.class_names[a.class_id], a.window});
  }
  write_manifest(dir / DatasetLayout::kTrainManifest, train_manifest);
  write_manifest(dir / DatasetLayout::kTestManifest, test_manifest);
  write_annotations(dir / DatasetLayout::kTrainAnnotations, train_ann);
  write_annotations(dir / DatasetLayout::kTestAnnotations, test_ann);
}

ModelParams signature_params(const SynthConfig& config, double gain) {
  ModelParams p = ModelParams::zeros(config.num_classes, config.dim);
  for (int c = 0; c < config.num_classes; ++c)
    for (Part part : {Part::Start, Part::Middle, Part::End}) {
      const auto r = ModelParams::row(c, part);
      p.weights(r, kNumParts * c + static_cast<int>(part)) = gain / config.part_signal;
      p.biases(r) = -gain / 2;
    }
  return p;
}

}  // namespace smsloc
