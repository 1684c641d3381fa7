#include "f3/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "f3/parallel.hpp"

namespace f3 {

std::string_view algorithm_code(Algorithm a) {
  switch (a) {
    case Algorithm::LogisticRegression: return "LR";
    case Algorithm::DecisionTree: return "DT";
    case Algorithm::RandomForest: return "RF";
    case Algorithm::GaussianNB: return "GNB";
    case Algorithm::AdaBoost: return "AB";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view code) {
  for (auto a : kAllAlgorithms) {
    if (algorithm_code(a) == code) return a;
  }
  return std::nullopt;
}

void AlgorithmSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid hyperparameter: ") + what);
  };
  require(logistic.learning_rate > 0.0 && std::isfinite(logistic.learning_rate),
          "learning_rate must be positive");
  require(logistic.epochs >= 1, "epochs must be >= 1");
  require(logistic.l2 >= 0.0, "l2 must be >= 0");
  require(naive_bayes.var_smoothing >= 0.0, "var_smoothing must be >= 0");
  require(tree.max_depth >= 0, "max_depth must be >= 0");
  require(tree.min_samples_split >= 2, "min_samples_split must be >= 2");
  require(forest.trees >= 1, "trees must be >= 1");
  require(forest.min_samples_split >= 2, "forest min_samples_split must be >= 2");
  require(boost.estimators >= 1, "estimators must be >= 1");
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot(const SparseMatrix::RowView& row, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t k = 0; k < row.index.size(); ++k) s += row.value[k] * w[row.index[k]];
  return s;
}

void check_dimension(const TrainedModel& model, const SparseMatrix& x) {
  if (x.cols() != model.dimension())
    throw std::invalid_argument("model expects " + std::to_string(model.dimension()) +
                                " features, got " + std::to_string(x.cols()));
}

LogisticModel train_logistic(const LogisticParams& p, const SparseMatrix& x,
                             std::span<const Label> y) {
  LogisticModel m;
  m.weights.assign(x.cols(), 0.0);
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    auto obj = logistic_objective(x, y, m.weights, m.bias, p.l2);
    for (std::size_t j = 0; j < m.weights.size(); ++j) m.weights[j] -= p.learning_rate * obj.grad_weights[j];
    m.bias -= p.learning_rate * obj.grad_bias;
  }
  return m;
}

GaussianNBModel train_gnb(const NaiveBayesParams& p, const SparseMatrix& x,
                          std::span<const Label> y) {
  const std::size_t d = x.cols();
  const std::size_t n = x.rows();
  std::array<std::size_t, 2> count{0, 0};
  std::array<std::vector<double>, 2> sum{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  std::vector<double> total_sum(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    int c = class_index(y[r]);
    ++count[c];
    auto row = x.row(r);
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      sum[c][row.index[k]] += row.value[k];
      total_sum[row.index[k]] += row.value[k];
    }
  }

  GaussianNBModel m;
  std::vector<double> total_mean(d);
  for (std::size_t j = 0; j < d; ++j) total_mean[j] = total_sum[j] / static_cast<double>(n);
  for (int c = 0; c < 2; ++c) {
    m.log_prior[c] = std::log(static_cast<double>(count[c]) / static_cast<double>(n));
    m.mean[c].resize(d);
    for (std::size_t j = 0; j < d; ++j) m.mean[c][j] = sum[c][j] / static_cast<double>(count[c]);
  }

  // Two-pass variances; implicit zeros contribute mean² each.
  std::array<std::vector<double>, 2> sq{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  std::array<std::vector<std::size_t>, 2> nz{std::vector<std::size_t>(d, 0),
                                             std::vector<std::size_t>(d, 0)};
  std::vector<double> total_sq(d, 0.0);
  std::vector<std::size_t> total_nz(d, 0);
  for (std::size_t r = 0; r < n; ++r) {
    int c = class_index(y[r]);
    auto row = x.row(r);
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      auto j = row.index[k];
      double dc = row.value[k] - m.mean[c][j];
      double dt = row.value[k] - total_mean[j];
      sq[c][j] += dc * dc;
      total_sq[j] += dt * dt;
      ++nz[c][j];
      ++total_nz[j];
    }
  }
  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double v = (total_sq[j] + static_cast<double>(n - total_nz[j]) * total_mean[j] * total_mean[j]) /
               static_cast<double>(n);
    max_var = std::max(max_var, v);
  }
  double floor = p.var_smoothing * max_var;
  if (floor <= 0.0) floor = std::max(p.var_smoothing, 1e-300);
  for (int c = 0; c < 2; ++c) {
    m.variance[c].resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      double mu = m.mean[c][j];
      double v = (sq[c][j] + static_cast<double>(count[c] - nz[c][j]) * mu * mu) /
                 static_cast<double>(count[c]);
      m.variance[c][j] = v + floor;
    }
  }
  return m;
}

ClassProbabilities gnb_proba(const GaussianNBModel& m, const SparseMatrix::RowView& row,
                             const std::array<double, 2>& base) {
  std::array<double, 2> joint = base;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      auto j = row.index[k];
      double x = row.value[k];
      double mu = m.mean[c][j];
      joint[c] -= (x * x - 2.0 * x * mu) / (2.0 * m.variance[c][j]);
    }
  }
  double top = std::max(joint[0], joint[1]);
  double e0 = std::exp(joint[0] - top), e1 = std::exp(joint[1] - top);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

// Log joint of the all-zero vector per class.
std::array<double, 2> gnb_base(const GaussianNBModel& m) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::array<double, 2> base{};
  for (int c = 0; c < 2; ++c) {
    double s = m.log_prior[c];
    for (std::size_t j = 0; j < m.mean[c].size(); ++j) {
      double var = m.variance[c][j];
      s -= 0.5 * std::log(kTwoPi * var) + m.mean[c][j] * m.mean[c][j] / (2.0 * var);
    }
    base[c] = s;
  }
  return base;
}

ForestModel train_forest(const AlgorithmSpec& spec, const SparseMatrix& x,
                         std::span<const Label> y) {
  const auto& p = spec.forest;
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  TreeParams tp;
  tp.min_samples_split = p.min_samples_split;
  tp.max_features = p.max_features == 0
                        ? std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))))
                        : p.max_features;
  if (tp.max_features >= d) tp.max_features = 0;

  ForestModel forest;
  forest.trees.resize(static_cast<std::size_t>(p.trees));
  parallel_for(forest.trees.size(), spec.threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = mix_seed(spec.seed + t);
    std::vector<double> weight(n, 1.0);
    if (p.bootstrap) {
      std::mt19937_64 rng(mix_seed(tree_seed, 0xB007));
      std::uniform_int_distribution<std::size_t> draw(0, n - 1);
      std::fill(weight.begin(), weight.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) weight[draw(rng)] += 1.0;
    }
    forest.trees[t] = grow_tree(x, y, weight, tp, tree_seed);
  });
  return forest;
}

std::vector<Label> tree_votes(const DecisionTree& tree, const SparseMatrix& x) {
  std::vector<Label> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = tree.vote(x.row(r));
  return out;
}

BoostModel train_boost(const AlgorithmSpec& spec, const SparseMatrix& x,
                       std::span<const Label> y) {
  const std::size_t n = x.rows();
  std::vector<double> weight(n, 1.0 / static_cast<double>(n));
  TreeParams stump;
  stump.max_depth = 1;
  BoostModel m;
  for (int t = 0; t < spec.boost.estimators; ++t) {
    auto tree = grow_tree(x, y, weight, stump, mix_seed(spec.seed + static_cast<std::uint64_t>(t)));
    auto votes = tree_votes(tree, x);
    double err = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mass += weight[i];
      if (votes[i] != y[i]) err += weight[i];
    }
    err /= mass;
    if (err >= 0.5) break;
    if (err <= 0.0) {
      m.stumps.push_back(std::move(tree));
      m.alpha.push_back(1.0);
      m.errors.push_back(0.0);
      break;
    }
    double alpha = boost_alpha(err);
    m.stumps.push_back(std::move(tree));
    m.alpha.push_back(alpha);
    m.errors.push_back(err);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (votes[i] != y[i]) weight[i] *= std::exp(alpha);
      total += weight[i];
    }
    for (auto& w : weight) w /= total;
  }
  return m;
}

}  // namespace

double boost_alpha(double weighted_error) {
  return std::log((1.0 - weighted_error) / weighted_error);
}

LogisticObjective logistic_objective(const SparseMatrix& x, std::span<const Label> y,
                                     std::span<const double> weights, double bias, double l2) {
  if (weights.size() != x.cols() || y.size() != x.rows())
    throw std::invalid_argument("logistic_objective: dimension mismatch");
  LogisticObjective out;
  out.grad_weights.assign(x.cols(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    double z = dot(row, weights) + bias;
    double target = y[r] == Label::Fake ? 1.0 : 0.0;
    out.loss += (softplus(z) - target * z) * inv_n;
    double residual = (sigmoid(z) - target) * inv_n;
    for (std::size_t k = 0; k < row.index.size(); ++k) out.grad_weights[row.index[k]] += residual * row.value[k];
    out.grad_bias += residual;
  }
  double norm2 = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    norm2 += weights[j] * weights[j];
    out.grad_weights[j] += l2 * weights[j];
  }
  out.loss += 0.5 * l2 * norm2;
  return out;
}

TrainedModel train_model(const AlgorithmSpec& spec, const SparseMatrix& x,
                         std::span<const Label> y) {
  spec.validate();
  if (y.size() != x.rows())
    throw std::invalid_argument("train_model: " + std::to_string(x.rows()) + " rows but " +
                                std::to_string(y.size()) + " labels");
  if (x.rows() < 2) throw TrainingError("train_model: need at least two samples");
  if (!x.all_finite()) throw ValidationError("train_model: non-finite feature value");
  bool has0 = std::find(y.begin(), y.end(), Label::Trustful) != y.end();
  bool has1 = std::find(y.begin(), y.end(), Label::Fake) != y.end();
  if (!has0 || !has1) throw TrainingError("train_model: both classes must be present");

  const std::size_t d = x.cols();
  switch (spec.algorithm) {
    case Algorithm::LogisticRegression:
      return {spec.algorithm, d, train_logistic(spec.logistic, x, y)};
    case Algorithm::GaussianNB:
      return {spec.algorithm, d, train_gnb(spec.naive_bayes, x, y)};
    case Algorithm::DecisionTree: {
      std::vector<double> weight(x.rows(), 1.0);
      return {spec.algorithm, d, grow_tree(x, y, weight, spec.tree, mix_seed(spec.seed))};
    }
    case Algorithm::RandomForest:
      return {spec.algorithm, d, train_forest(spec, x, y)};
    case Algorithm::AdaBoost:
      return {spec.algorithm, d, train_boost(spec, x, y)};
  }
  throw std::invalid_argument("train_model: unknown algorithm");
}

std::vector<ClassProbabilities> predict_proba(const TrainedModel& model, const SparseMatrix& x) {
  check_dimension(model, x);
  std::vector<ClassProbabilities> out(x.rows());
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LogisticModel>) {
          for (std::size_t r = 0; r < x.rows(); ++r) {
            double p = sigmoid(dot(x.row(r), m.weights) + m.bias);
            out[r] = {1.0 - p, p};
          }
        } else if constexpr (std::is_same_v<M, GaussianNBModel>) {
          auto base = gnb_base(m);
          for (std::size_t r = 0; r < x.rows(); ++r) out[r] = gnb_proba(m, x.row(r), base);
        } else if constexpr (std::is_same_v<M, DecisionTree>) {
          for (std::size_t r = 0; r < x.rows(); ++r) {
            double p = m.fake_share_for(x.row(r));
            out[r] = {1.0 - p, p};
          }
        } else if constexpr (std::is_same_v<M, ForestModel>) {
          for (std::size_t r = 0; r < x.rows(); ++r) {
            std::size_t fake = 0;
            for (const auto& tree : m.trees) fake += tree.vote(x.row(r)) == Label::Fake ? 1 : 0;
            double p = static_cast<double>(fake) / static_cast<double>(m.trees.size());
            out[r] = {1.0 - p, p};
          }
        } else {
          double total = std::accumulate(m.alpha.begin(), m.alpha.end(), 0.0);
          for (std::size_t r = 0; r < x.rows(); ++r) {
            if (total <= 0.0) {
              out[r] = {0.5, 0.5};
              continue;
            }
            double fake = 0.0;
            for (std::size_t t = 0; t < m.stumps.size(); ++t) {
              if (m.stumps[t].vote(x.row(r)) == Label::Fake) fake += m.alpha[t];
            }
            double p = fake / total;
            out[r] = {1.0 - p, p};
          }
        }
      },
      model.parameters());
  return out;
}

std::vector<Label> predict_label(const TrainedModel& model, const SparseMatrix& x) {
  auto proba = predict_proba(model, x);
  std::vector<Label> out(proba.size());
  std::transform(proba.begin(), proba.end(), out.begin(), label_from_proba);
  return out;
}

// --- serialization --------------------------------------------------------

namespace {

using nlohmann::ordered_json;

ordered_json tree_to_json(const DecisionTree& t) {
  ordered_json j;
  j["feature"] = t.feature;
  j["threshold"] = t.threshold;
  j["left"] = t.left;
  j["right"] = t.right;
  j["fake_share"] = t.fake_share;
  return j;
}

DecisionTree tree_from_json(const nlohmann::json& j) {
  DecisionTree t;
  j.at("feature").get_to(t.feature);
  j.at("threshold").get_to(t.threshold);
  j.at("left").get_to(t.left);
  j.at("right").get_to(t.right);
  j.at("fake_share").get_to(t.fake_share);
  const auto n = static_cast<std::int32_t>(t.feature.size());
  if (n == 0 || t.threshold.size() != t.feature.size() || t.left.size() != t.feature.size() ||
      t.right.size() != t.feature.size() || t.fake_share.size() != t.feature.size())
    throw Error("model document: inconsistent tree arrays");
  for (std::int32_t i = 0; i < n; ++i) {
    if (t.feature[i] >= 0 && (t.left[i] <= i || t.right[i] <= i || t.left[i] >= n || t.right[i] >= n))
      throw Error("model document: invalid tree child index");
  }
  return t;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  ordered_json j;
  j["format"] = kModelFormatTag;
  j["algorithm"] = algorithm_code(model.algorithm());
  j["dimension"] = model.dimension();
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LogisticModel>) {
          j["weights"] = m.weights;
          j["bias"] = m.bias;
        } else if constexpr (std::is_same_v<M, GaussianNBModel>) {
          j["log_prior"] = m.log_prior;
          j["mean"] = m.mean;
          j["variance"] = m.variance;
        } else if constexpr (std::is_same_v<M, DecisionTree>) {
          j["tree"] = tree_to_json(m);
        } else if constexpr (std::is_same_v<M, ForestModel>) {
          auto& trees = j["trees"] = ordered_json::array();
          for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
        } else {
          auto& stumps = j["stumps"] = ordered_json::array();
          for (const auto& t : m.stumps) stumps.push_back(tree_to_json(t));
          j["alpha"] = m.alpha;
          j["errors"] = m.errors;
        }
      },
      model.parameters());
  return j.dump();
}

TrainedModel deserialize_model(std::string_view document) {
  try {
    auto j = nlohmann::json::parse(document);
    if (j.at("format") != kModelFormatTag) throw Error("model document: unsupported format");
    auto algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (!algorithm) throw Error("model document: unknown algorithm");
    auto dimension = j.at("dimension").get<std::size_t>();
    switch (*algorithm) {
      case Algorithm::LogisticRegression: {
        LogisticModel m;
        j.at("weights").get_to(m.weights);
        j.at("bias").get_to(m.bias);
        if (m.weights.size() != dimension) throw Error("model document: weight dimension");
        return {*algorithm, dimension, m};
      }
      case Algorithm::GaussianNB: {
        GaussianNBModel m;
        j.at("log_prior").get_to(m.log_prior);
        j.at("mean").get_to(m.mean);
        j.at("variance").get_to(m.variance);
        for (int c = 0; c < 2; ++c) {
          if (m.mean[c].size() != dimension || m.variance[c].size() != dimension)
            throw Error("model document: gaussian dimension");
        }
        return {*algorithm, dimension, m};
      }
      case Algorithm::DecisionTree:
        return {*algorithm, dimension, tree_from_json(j.at("tree"))};
      case Algorithm::RandomForest: {
        ForestModel m;
        for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
        if (m.trees.empty()) throw Error("model document: empty forest");
        return {*algorithm, dimension, m};
      }
      case Algorithm::AdaBoost: {
        BoostModel m;
        for (const auto& t : j.at("stumps")) m.stumps.push_back(tree_from_json(t));
        j.at("alpha").get_to(m.alpha);
        j.at("errors").get_to(m.errors);
        if (m.alpha.size() != m.stumps.size()) throw Error("model document: alpha count");
        return {*algorithm, dimension, m};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model document: ") + e.what());
  }
  throw Error("model document: unknown algorithm");
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write model file '" + path.string() + "'");
  out << serialize_model(model) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace f3
