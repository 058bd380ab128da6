#pragma once

// Linear epsilon-insensitive support vector regression, fit by stochastic
// subgradient descent on standardized features, plus the label scorer that
// applies it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsynth/candidates.hpp"
#include "newsynth/error.hpp"
#include "newsynth/lda.hpp"

namespace newsynth {

struct TrainingExample {
  std::string topic;
  std::string surface;
  FeatureVector features;
  double gold_score = 0;  // files carry 0..3; synthetic targets may be real-valued
};

struct SvrHyperparams {
  double epsilon = 0.1;
  double C = 1.0;
  int epochs = 500;
  std::uint64_t seed = 7;
};

struct RegressionModel {
  static constexpr int kVersion = 1;
  using Array = std::array<double, FeatureVector::kSize>;

  Array means{};
  Array stds{};
  Array weights{};
  double bias = 0.0;
  SvrHyperparams hyperparams;

  RegressionModel() { stds.fill(1.0); }

  double predict(const FeatureVector& f) const {
    double s = bias;
    for (std::size_t j = 0; j < FeatureVector::kSize; ++j) s += weights[j] * (f[j] - means[j]) / stds[j];
    return s;
  }
};

inline nlohmann::json model_to_json(const RegressionModel& m) {
  nlohmann::json names = nlohmann::json::array();
  for (auto n : FeatureVector::names) names.push_back(std::string(n));
  return {{"version", RegressionModel::kVersion},
          {"feature_names", names},
          {"means", m.means},
          {"stds", m.stds},
          {"weights", m.weights},
          {"bias", m.bias},
          {"hyperparams",
           {{"epsilon", m.hyperparams.epsilon},
            {"C", m.hyperparams.C},
            {"epochs", m.hyperparams.epochs},
            {"seed", m.hyperparams.seed}}}};
}

inline RegressionModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != RegressionModel::kVersion)
      throw Error("ModelFormat", "unsupported model version " + j.at("version").dump());
    const auto names = j.at("feature_names").get<std::vector<std::string>>();
    if (names.size() != FeatureVector::kSize) throw Error("ModelFormat", "model must list 12 features");
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] != FeatureVector::names[i])
        throw Error("ModelFormat", "unexpected feature name at position " + std::to_string(i) + ": " + names[i]);
    RegressionModel m;
    m.means = j.at("means").get<RegressionModel::Array>();
    m.stds = j.at("stds").get<RegressionModel::Array>();
    m.weights = j.at("weights").get<RegressionModel::Array>();
    m.bias = j.at("bias").get<double>();
    const auto& hp = j.at("hyperparams");
    m.hyperparams.epsilon = hp.at("epsilon").get<double>();
    m.hyperparams.C = hp.at("C").get<double>();
    m.hyperparams.epochs = hp.at("epochs").get<int>();
    m.hyperparams.seed = hp.at("seed").get<std::uint64_t>();
    for (double s : m.stds)
      if (!(s > 0)) throw Error("ModelFormat", "model stds must be positive");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error("ModelFormat", std::string("malformed model file: ") + e.what());
  }
}

inline RegressionModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("ModelFormat", "model file is not valid JSON: " + path, e.what());
  }
  return model_from_json(j);
}

inline void save_model(const RegressionModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoError", "cannot write model file: " + path, path);
  out << model_to_json(m).dump(2) << "\n";
}

// Minimizes  lambda/2 |w|^2 + mean_i max(0, |y_i - w.x_i - b| - epsilon)
// with lambda = 1/(C n), visiting examples in a seeded shuffled order and
// using step size 1/(C t) during epoch t. The bias is not regularized.
inline RegressionModel train(std::span<const TrainingExample> examples, const SvrHyperparams& hp = {}) {
  if (examples.size() < 2) throw Error("DegenerateData", "training needs at least two examples");
  const bool all_same = std::all_of(examples.begin(), examples.end(),
                                    [&](const TrainingExample& e) { return e.features == examples.front().features; });
  if (all_same) throw Error("DegenerateData", "all training feature vectors are identical");
  if (!(hp.C > 0) || hp.epochs < 1 || hp.epsilon < 0)
    throw Error("InvalidArgument", "require C > 0, epochs >= 1, epsilon >= 0");

  constexpr std::size_t D = FeatureVector::kSize;
  const std::size_t n = examples.size();
  RegressionModel model;
  model.hyperparams = hp;

  for (std::size_t j = 0; j < D; ++j) {
    double mean = 0;
    for (const auto& e : examples) mean += e.features[j];
    mean /= static_cast<double>(n);
    double var = 0;
    for (const auto& e : examples) var += (e.features[j] - mean) * (e.features[j] - mean);
    var /= static_cast<double>(n);
    model.means[j] = mean;
    model.stds[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  std::vector<std::array<double, D>> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < D; ++j) x[i][j] = (examples[i].features[j] - model.means[j]) / model.stds[j];
    y[i] = examples[i].gold_score;
  }

  const double lambda = 1.0 / (hp.C * static_cast<double>(n));
  std::array<double, D> w{};
  double b = 0.0;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(hp.seed);

  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) {
      const auto k = static_cast<std::size_t>(detail::unit_draw(rng) * static_cast<double>(i + 1));
      std::swap(order[i], order[k]);
    }
    const double eta = 1.0 / (hp.C * static_cast<double>(epoch));
    for (std::size_t idx : order) {
      double pred = b;
      for (std::size_t j = 0; j < D; ++j) pred += w[j] * x[idx][j];
      const double residual = y[idx] - pred;
      double g = 0.0;  // d loss / d pred
      if (residual > hp.epsilon) g = -1.0;
      else if (residual < -hp.epsilon) g = 1.0;
      for (std::size_t j = 0; j < D; ++j) w[j] -= eta * (lambda * w[j] + g * x[idx][j]);
      b -= eta * g;
    }
  }
  model.weights = w;
  model.bias = b;
  return model;
}

// Scores every candidate and sorts: score desc, then tf desc, then surface.
inline void predict_scores(const RegressionModel& model, std::vector<CandidateLabel>& candidates) {
  for (auto& c : candidates) c.predicted_score = model.predict(c.features);
  std::stable_sort(candidates.begin(), candidates.end(), [](const CandidateLabel& a, const CandidateLabel& b) {
    if (a.predicted_score != b.predicted_score) return a.predicted_score > b.predicted_score;
    if (a.tf != b.tf) return a.tf > b.tf;
    return a.surface < b.surface;
  });
}

}  // namespace newsynth
