#pragma once

// Linear per-class, per-part frame scorer over feature vectors.

#include "smsloc/core.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace smsloc {

/// n frames × d features, one row per frame.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Weights are stored as a (3C × d) matrix whose row `3c + part` scores
/// part `part` of class `c`; biases follow the same row layout.
struct ModelParams {
  int num_classes = 0;
  int dim = 0;
  Eigen::MatrixXd weights;
  Eigen::VectorXd biases;
  std::vector<std::string> class_names;

  static ModelParams zeros(int num_classes, int dim);

  static constexpr Eigen::Index row(int class_id, Part part) noexcept {
    return Eigen::Index(class_id) * kNumParts + static_cast<int>(part);
  }

  void check_shape() const;
  int class_index(const std::string& name) const;  // -1 if unknown
};

/// Uniform weights in [-scale, scale] from a seeded mt19937_64; zero biases.
ModelParams init_params(int num_classes, int dim, std::uint64_t seed, double scale);

PartScores score_frames(const ModelParams& params, const FeatureMatrix& features, int class_id);

/// Scores for every class from one (n × d)(d × 3C) product.
std::vector<PartScores> score_all_classes(const ModelParams& params, const FeatureMatrix& features);

// Checkpoint: versioned JSON document, doubles written in shortest
// round-trip form so save/load is bit-exact.
inline constexpr int kCheckpointVersion = 1;
std::string checkpoint_to_string(const ModelParams& params);
ModelParams checkpoint_from_string(const std::string& text);
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace smsloc
