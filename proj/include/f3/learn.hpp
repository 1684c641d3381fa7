#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "f3/common.hpp"
#include "f3/matrix.hpp"

namespace f3 {

enum class Algorithm : int { LogisticRegression, DecisionTree, RandomForest, GaussianNB, AdaBoost };

inline constexpr std::array<Algorithm, 5> kAllAlgorithms = {
    Algorithm::LogisticRegression, Algorithm::DecisionTree, Algorithm::RandomForest,
    Algorithm::GaussianNB, Algorithm::AdaBoost};

/// Short codes LR, DT, RF, GNB, AB.
std::string_view algorithm_code(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view code);

struct LogisticParams {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-4;
};

struct NaiveBayesParams {
  /// Variance floor as a fraction of the largest per-feature variance.
  double var_smoothing = 1e-9;
};

struct TreeParams {
  int max_depth = 0;  // 0: unlimited
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0 or >= d: every feature at every split
};

struct ForestParams {
  int trees = 100;
  bool bootstrap = true;
  std::size_t max_features = 0;  // 0: floor(sqrt(d)); >= d: every feature
  std::size_t min_samples_split = 2;
};

struct BoostParams {
  int estimators = 50;
};

struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::LogisticRegression;
  LogisticParams logistic;
  NaiveBayesParams naive_bayes;
  TreeParams tree;
  ForestParams forest;
  BoostParams boost;
  std::uint64_t seed = 0;
  /// Worker threads for forest fitting; results never depend on it.
  unsigned threads = 1;

  void validate() const;
};

// --- fitted parameter sets -----------------------------------------------

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  bool operator==(const LogisticModel&) const = default;
};

struct GaussianNBModel {
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> variance;
  bool operator==(const GaussianNBModel&) const = default;
};

/// Flat binary tree; node 0 is the root. feature < 0 marks a leaf.
struct DecisionTree {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;
  std::vector<double> fake_share;  // weighted share of Fake samples reaching the node

  std::size_t nodes() const { return feature.size(); }
  std::size_t leaf_for(const SparseMatrix::RowView& x) const;
  double fake_share_for(const SparseMatrix::RowView& x) const { return fake_share[leaf_for(x)]; }
  /// Leaf majority; an even split votes Trustful.
  Label vote(const SparseMatrix::RowView& x) const {
    return fake_share_for(x) > 0.5 ? Label::Fake : Label::Trustful;
  }
  std::size_t depth() const;
  bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  bool operator==(const ForestModel&) const = default;
};

struct BoostModel {
  std::vector<DecisionTree> stumps;
  std::vector<double> alpha;
  /// Weighted training error of each kept stump, parallel to alpha.
  std::vector<double> errors;
  bool operator==(const BoostModel&) const = default;
};

class TrainedModel {
 public:
  using Parameters =
      std::variant<LogisticModel, DecisionTree, ForestModel, GaussianNBModel, BoostModel>;

  TrainedModel(Algorithm algorithm, std::size_t dimension, Parameters params)
      : algorithm_(algorithm), dimension_(dimension), params_(std::move(params)) {}

  Algorithm algorithm() const { return algorithm_; }
  std::size_t dimension() const { return dimension_; }
  const Parameters& parameters() const { return params_; }

  template <typename T>
  const T& as() const { return std::get<T>(params_); }

  bool operator==(const TrainedModel&) const = default;

 private:
  Algorithm algorithm_;
  std::size_t dimension_;
  Parameters params_;
};

/// (P(Trustful), P(Fake)).
using ClassProbabilities = std::array<double, 2>;

TrainedModel train_model(const AlgorithmSpec& spec, const SparseMatrix& x,
                         std::span<const Label> y);

std::vector<ClassProbabilities> predict_proba(const TrainedModel& model, const SparseMatrix& x);
std::vector<Label> predict_label(const TrainedModel& model, const SparseMatrix& x);

/// Argmax with exact ties going to Trustful.
inline Label label_from_proba(const ClassProbabilities& p) {
  return p[1] > p[0] ? Label::Fake : Label::Trustful;
}

// --- exposed for verification ---------------------------------------------

struct LogisticObjective {
  double loss = 0.0;
  std::vector<double> grad_weights;
  double grad_bias = 0.0;
};

/// Mean log-loss plus (l2 / 2)·||w||² (bias unregularized) and its gradient.
LogisticObjective logistic_objective(const SparseMatrix& x, std::span<const Label> y,
                                     std::span<const double> weights, double bias, double l2);

/// Weighted Gini CART. Samples with zero weight are ignored.
DecisionTree grow_tree(const SparseMatrix& x, std::span<const Label> y,
                       std::span<const double> sample_weight, const TreeParams& params,
                       std::uint64_t seed);

/// Stump weight ln((1 - eps) / eps).
double boost_alpha(double weighted_error);

// --- serialization --------------------------------------------------------

inline constexpr std::string_view kModelFormatTag = "f3-model/1";

std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::string_view document);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace f3
