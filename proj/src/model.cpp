#include "smsloc/model.hpp"

#include "smsloc/io.hpp"

#include <json.hpp>

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace smsloc {

using nlohmann::json;

ModelParams ModelParams::zeros(int num_classes, int dim) {
  if (num_classes < 1 || dim < 1) throw std::invalid_argument("model needs at least one class and one feature");
  ModelParams p;
  p.num_classes = num_classes;
  p.dim = dim;
  p.weights = Eigen::MatrixXd::Zero(Eigen::Index(num_classes) * kNumParts, dim);
  p.biases = Eigen::VectorXd::Zero(Eigen::Index(num_classes) * kNumParts);
  for (int c = 0; c < num_classes; ++c) p.class_names.push_back("class_" + std::to_string(c));
  return p;
}

void ModelParams::check_shape() const {
  if (num_classes < 1 || dim < 1 || weights.rows() != Eigen::Index(num_classes) * kNumParts ||
      weights.cols() != dim || biases.size() != weights.rows() ||
      class_names.size() != static_cast<std::size_t>(num_classes))
    throw std::invalid_argument("model parameters have inconsistent shape");
}

int ModelParams::class_index(const std::string& name) const {
  for (std::size_t c = 0; c < class_names.size(); ++c)
    if (class_names[c] == name) return static_cast<int>(c);
  return -1;
}

ModelParams init_params(int num_classes, int dim, std::uint64_t seed, double scale) {
  ModelParams p = ModelParams::zeros(num_classes, dim);
  if (scale == 0.0) return p;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (Eigen::Index r = 0; r < p.weights.rows(); ++r)
    for (Eigen::Index c = 0; c < p.weights.cols(); ++c) p.weights(r, c) = dist(rng);
  return p;
}

PartScores score_frames(const ModelParams& params, const FeatureMatrix& features, int class_id) {
  if (features.cols() != params.dim)
    throw std::invalid_argument("feature dimension " + std::to_string(features.cols()) + " != model dimension " +
                                std::to_string(params.dim));
  if (class_id < 0 || class_id >= params.num_classes) throw std::invalid_argument("class id out of range");
  PartScores out;
  for (Part part : {Part::Start, Part::Middle, Part::End}) {
    const auto r = ModelParams::row(class_id, part);
    Track<double> t = features * params.weights.row(r).transpose();
    t.array() += params.biases(r);
    out.track(part) = std::move(t);
  }
  return out;
}

std::vector<PartScores> score_all_classes(const ModelParams& params, const FeatureMatrix& features) {
  if (features.cols() != params.dim)
    throw std::invalid_argument("feature dimension " + std::to_string(features.cols()) + " != model dimension " +
                                std::to_string(params.dim));
  Eigen::MatrixXd all = features * params.weights.transpose();
  all.rowwise() += params.biases.transpose();
  std::vector<PartScores> out;
  out.reserve(params.num_classes);
  for (int c = 0; c < params.num_classes; ++c)
    out.emplace_back(all.col(ModelParams::row(c, Part::Start)), all.col(ModelParams::row(c, Part::Middle)),
                     all.col(ModelParams::row(c, Part::End)));
  return out;
}

std::string checkpoint_to_string(const ModelParams& params) {
  params.check_shape();
  json weights = json::array();
  json biases = json::array();
  for (int c = 0; c < params.num_classes; ++c) {
    json per_class = json::array();
    json per_class_bias = json::array();
    for (Part part : {Part::Start, Part::Middle, Part::End}) {
      const auto r = ModelParams::row(c, part);
      std::vector<double> row(params.weights.cols());
      for (Eigen::Index j = 0; j < params.weights.cols(); ++j) row[j] = params.weights(r, j);
      per_class.push_back(row);
      per_class_bias.push_back(params.biases(r));
    }
    weights.push_back(std::move(per_class));
    biases.push_back(std::move(per_class_bias));
  }
  json doc = {{"format", "smsloc-linear-model"},
              {"version", kCheckpointVersion},
              {"num_classes", params.num_classes},
              {"dim", params.dim},
              {"parts", {"start", "middle", "end"}},
              {"class_names", params.class_names},
              {"weights", std::move(weights)},
              {"biases", std::move(biases)}};
  return doc.dump(1) + "\n";
}

ModelParams checkpoint_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "smsloc-linear-model") throw DataError("not a smsloc model checkpoint");
    if (doc.at("version").get<int>() != kCheckpointVersion)
      throw DataError("unsupported checkpoint version " + doc.at("version").dump());
    ModelParams p = ModelParams::zeros(doc.at("num_classes").get<int>(), doc.at("dim").get<int>());
    p.class_names = doc.at("class_names").get<std::vector<std::string>>();
    const auto& w = doc.at("weights");
    const auto& b = doc.at("biases");
    if (w.size() != static_cast<std::size_t>(p.num_classes) || b.size() != w.size())
      throw DataError("checkpoint weight tensor does not match num_classes");
    for (int c = 0; c < p.num_classes; ++c) {
      if (w[c].size() != kNumParts || b[c].size() != kNumParts) throw DataError("checkpoint needs 3 parts per class");
      for (int part = 0; part < kNumParts; ++part) {
        const auto row = w[c][part].get<std::vector<double>>();
        if (row.size() != static_cast<std::size_t>(p.dim)) throw DataError("checkpoint weight row has wrong length");
        const auto r = ModelParams::row(c, static_cast<Part>(part));
        for (int j = 0; j < p.dim; ++j) p.weights(r, j) = row[j];
        p.biases(r) = b[c][part].get<double>();
      }
    }
    p.check_shape();
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_to_string(params));
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_string(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace smsloc
