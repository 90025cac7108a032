#include "oracles.hpp"

#include "smsloc/io.hpp"
#include "smsloc/model.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <random>

using namespace smsloc;

namespace {

FeatureMatrix random_features(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  FeatureMatrix x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = g(rng);
  return x;
}

}  // namespace

TEST_CASE("init_params shape, range and determinism") {
  const auto a = init_params(4, 7, 11, 0.05);
  const auto b = init_params(4, 7, 11, 0.05);
  const auto c = init_params(4, 7, 12, 0.05);
  CHECK(a.weights.rows() == 12);
  CHECK(a.weights.cols() == 7);
  CHECK(a.biases.size() == 12);
  CHECK(a.class_names.size() == 4);
  CHECK(a.weights == b.weights);
  CHECK(a.weights != c.weights);
  CHECK(a.weights.cwiseAbs().maxCoeff() <= 0.05);
  CHECK(a.biases.isZero(0.0));
  CHECK(init_params(2, 3, 1, 0.0).weights.isZero(0.0));
}

TEST_CASE("scores are affine in the features") {
  ModelParams p = ModelParams::zeros(1, 1);
  p.weights.setConstant(2.0);
  p.biases.setConstant(1.0);
  FeatureMatrix x(2, 1);
  x << 1, 3;
  const auto s = score_frames(p, x, 0);
  for (Part part : {Part::Start, Part::Middle, Part::End}) {
    CHECK(s.track(part)(0) == 3.0);
    CHECK(s.track(part)(1) == 7.0);
  }
}

TEST_CASE("each class and part uses its own row") {
  ModelParams p = ModelParams::zeros(2, 2);
  p.weights(ModelParams::row(1, Part::Middle), 1) = 5.0;
  p.biases(ModelParams::row(0, Part::End)) = -1.0;
  FeatureMatrix x(1, 2);
  x << 0, 2;
  const auto all = score_all_classes(p, x);
  REQUIRE(all.size() == 2);
  CHECK(all[1].middle(0) == 10.0);
  CHECK(all[1].start(0) == 0.0);
  CHECK(all[0].end(0) == -1.0);
  CHECK(all[0].middle(0) == 0.0);
}

TEST_CASE("batched scoring agrees with the direct dot products") {
  std::mt19937_64 rng(2);
  auto p = init_params(3, 5, 9, 1.0);
  p.biases = Eigen::VectorXd::Random(9);
  const auto x = random_features(17, 5, rng);
  const auto all = score_all_classes(p, x);
  for (int c = 0; c < 3; ++c) {
    const auto one = score_frames(p, x, c);
    for (Part part : {Part::Start, Part::Middle, Part::End})
      for (int t = 0; t < 17; ++t) {
        const auto r = ModelParams::row(c, part);
        const double direct = p.weights.row(r).dot(x.row(t)) + p.biases(r);
        CHECK(oracle::close(all[c].track(part)(t), direct, 1e-12));
        CHECK(oracle::close(one.track(part)(t), direct, 1e-12));
      }
  }
}

TEST_CASE("scores are linear in the parameters") {
  std::mt19937_64 rng(6);
  const auto x = random_features(9, 4, rng);
  auto p = init_params(2, 4, 1, 1.0), q = init_params(2, 4, 2, 1.0);
  p.biases.setConstant(0.3);
  q.biases.setConstant(-0.8);
  ModelParams mix = p;
  mix.weights = 2.0 * p.weights - 3.0 * q.weights;
  mix.biases = 2.0 * p.biases - 3.0 * q.biases;
  const auto sp = score_frames(p, x, 1), sq = score_frames(q, x, 1), sm = score_frames(mix, x, 1);
  for (int t = 0; t < 9; ++t) CHECK(oracle::close(sm.middle(t), 2.0 * sp.middle(t) - 3.0 * sq.middle(t), 1e-12));
}

TEST_CASE("shape mismatches are rejected") {
  auto p = init_params(2, 3, 0, 1.0);
  FeatureMatrix x(4, 2);
  CHECK_THROWS_AS(score_frames(p, x, 0), std::invalid_argument);
  CHECK_THROWS_AS(score_frames(p, FeatureMatrix(4, 3), 2), std::invalid_argument);
}

TEST_CASE("checkpoint round trip is bit exact") {
  auto p = init_params(3, 6, 77, 1.0);
  p.biases = Eigen::VectorXd::Random(9) * 1e-7;
  p.weights(0, 0) = 1.0 / 3.0;
  p.weights(1, 1) = -0.0;
  p.class_names = {"walk", "run", "jump"};
  const auto back = checkpoint_from_string(checkpoint_to_string(p));
  CHECK(back.num_classes == 3);
  CHECK(back.dim == 6);
  CHECK(back.class_names == p.class_names);
  CHECK(back.weights == p.weights);
  CHECK(back.biases == p.biases);
  CHECK(back.class_index("run") == 1);
  CHECK(back.class_index("swim") == -1);

  const auto path = std::filesystem::temp_directory_path() / "smsloc_test_model.json";
  save_checkpoint(p, path);
  CHECK(load_checkpoint(path).weights == p.weights);
  std::filesystem::remove(path);
}

TEST_CASE("malformed checkpoints raise DataError") {
  CHECK_THROWS_AS(checkpoint_from_string("not json"), DataError);
  CHECK_THROWS_AS(checkpoint_from_string("{}"), DataError);
  const auto good = nlohmann::json::parse(checkpoint_to_string(init_params(2, 3, 0, 1.0)));
  auto doc = good;
  doc["version"] = 99;
  CHECK_THROWS_AS(checkpoint_from_string(doc.dump()), DataError);
  doc = good;
  doc["format"] = "other";
  CHECK_THROWS_AS(checkpoint_from_string(doc.dump()), DataError);
  doc = good;
  doc["weights"][1][2].erase(0);
  CHECK_THROWS_AS(checkpoint_from_string(doc.dump()), DataError);
  doc = good;
  doc["weights"][0][0][0] = "x";
  CHECK_THROWS_AS(checkpoint_from_string(doc.dump()), DataError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/smsloc/model.json"), DataError);
}
