#pragma once

// Seeded synthetic sequences with planted action windows.
//
// Background frames are isotropic Gaussian noise. A planted window of class
// c adds `part_signal` to coordinate 3c on its start frame, 3c+1 on its
// middle frames and 3c+2 on its end frame, so with d >= 3C a linear scorer
// can separate every part of every class.

#include "smsloc/core.hpp"
#include "smsloc/model.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace smsloc {

struct IntRange {
  int min = 0;
  int max = 0;
};

struct SynthConfig {
  int num_classes = 3;
  int dim = 9;
  IntRange sequence_length{40, 80};
  IntRange windows_per_sequence{1, 1};
  IntRange window_length{8, 24};
  double noise_std = 0.3;
  double part_signal = 1.0;

  void validate() const;
};

struct PlantedWindow {
  Window window;
  int class_id = 0;
};

struct SyntheticSequence {
  FeatureMatrix features;
  std::vector<PlantedWindow> annotations;  // sorted by start
};

/// Minimum number of background frames between two planted windows.
inline constexpr int kMinGap = 2;

SyntheticSequence generate_sequence(const SynthConfig& config, std::mt19937_64& rng);

struct DatasetConfig {
  SynthConfig train{};  // single-instance clips
  SynthConfig test{3, 9, {300, 500}, {2, 5}, {8, 24}, 0.3, 1.0};
  int train_clips = 200;
  int test_videos = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct NamedSequence {
  std::string id;
  SyntheticSequence sequence;
};

struct SyntheticDataset {
  std::vector<std::string> class_names;
  std::vector<NamedSequence> train;
  std::vector<NamedSequence> test;
};

SyntheticDataset generate_dataset(const DatasetConfig& config);

/// Relative paths of what write_dataset produces.
struct DatasetLayout {
  static constexpr const char* kTrainManifest = "train_manifest.tsv";
  static constexpr const char* kTestManifest = "test_manifest.tsv";
  static constexpr const char* kTrainAnnotations = "train_annotations.tsv";
  static constexpr const char* kTestAnnotations = "test_annotations.tsv";
};

/// Feature files under dir/train and dir/test plus manifests and
/// annotation files at the top of `dir`.
void write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir);

/// The planting signature as model parameters: +signal·(1/signal) on the
/// matching coordinate, scaled by `gain`, with bias -gain/2 on every row.
ModelParams signature_params(const SynthConfig& config, double gain);

}  // namespace smsloc
