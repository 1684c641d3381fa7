#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "f3/learn.hpp"

using namespace f3;

namespace {

struct Problem {
  SparseMatrix x;
  std::vector<Label> y;
};

// Two noisy Gaussian blobs; `sep` is the mean gap along every axis.
Problem blobs(std::size_t n, std::size_t d, double sep, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  Problem p{SparseMatrix(d), {}};
  for (std::size_t i = 0; i < n; ++i) {
    Label l = i % 2 ? Label::Fake : Label::Trustful;
    std::vector<double> row(d);
    for (auto& v : row) v = g(rng) + (l == Label::Fake ? sep : 0.0);
    p.x.add_row(row);
    p.y.push_back(l);
  }
  return p;
}

AlgorithmSpec spec_for(Algorithm a, std::uint64_t seed = 1) {
  AlgorithmSpec s;
  s.algorithm = a;
  s.seed = seed;
  return s;
}

double accuracy(const TrainedModel& m, const Problem& p) {
  auto pred = predict_label(m, p.x);
  double ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == p.y[i];
  return ok / static_cast<double>(pred.size());
}

DecisionTree leaf(double fake_share) {
  return DecisionTree{{-1}, {0.0}, {-1}, {-1}, {fake_share}};
}

// Direct Gaussian posterior: per-class population mean/variance + floor, Bayes rule.
std::array<double, 2> gnb_oracle(const std::vector<std::vector<double>>& rows, const std::vector<Label>& y,
                                 const std::vector<double>& q, double smoothing) {
  const std::size_t d = rows[0].size();
  double max_var = 0;
  for (std::size_t j = 0; j < d; ++j) {
    double m = 0;
    for (const auto& r : rows) m += r[j];
    m /= static_cast<double>(rows.size());
    double v = 0;
    for (const auto& r : rows) v += (r[j] - m) * (r[j] - m);
    max_var = std::max(max_var, v / static_cast<double>(rows.size()));
  }
  const double eps = smoothing * max_var;
  std::array<double, 2> like{};
  for (int c = 0; c < 2; ++c) {
    std::vector<const std::vector<double>*> members;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (class_index(y[i]) == c) members.push_back(&rows[i]);
    }
    const double nc = static_cast<double>(members.size());
    double l = std::log(nc / static_cast<double>(rows.size()));
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0;
      for (auto* r : members) m += (*r)[j];
      m /= nc;
      double v = 0;
      for (auto* r : members) v += ((*r)[j] - m) * ((*r)[j] - m);
      v = v / nc + eps;
      l += -(q[j] - m) * (q[j] - m) / (2 * v) - 0.5 * std::log(2 * std::numbers::pi * v);
    }
    like[c] = l;
  }
  // log-space Bayes rule; a one-member class has only the floor as variance
  double p1 = 1.0 / (1.0 + std::exp(like[0] - like[1]));
  return {1.0 - p1, p1};
}

}  // namespace

TEST_CASE("algorithm codes") {
  CHECK(algorithm_code(Algorithm::AdaBoost) == "AB");
  CHECK(parse_algorithm("GNB") == Algorithm::GaussianNB);
  CHECK_FALSE(parse_algorithm("SVM").has_value());
}

TEST_CASE("label from probabilities") {
  CHECK(label_from_proba({0.2, 0.8}) == Label::Fake);
  CHECK(label_from_proba({0.5, 0.5}) == Label::Trustful);
  CHECK(label_from_proba({0.9, 0.1}) == Label::Trustful);
}

TEST_CASE("training preconditions") {
  auto p = blobs(10, 2, 3.0, 1);
  std::vector<Label> one_class(10, Label::Fake);
  CHECK_THROWS_AS(train_model(spec_for(Algorithm::LogisticRegression), p.x, one_class), TrainingError);
  std::vector<Label> short_y(9, Label::Fake);
  CHECK_THROWS_AS(train_model(spec_for(Algorithm::GaussianNB), p.x, short_y), std::invalid_argument);
  SparseMatrix single(1);
  single.add_row(std::vector<double>{1.0});
  std::vector<Label> y1{Label::Fake};
  CHECK_THROWS_AS(train_model(spec_for(Algorithm::DecisionTree), single, y1), TrainingError);

  SparseMatrix bad(1);
  bad.add_row(std::vector<double>{1.0});
  bad.add_row(std::vector<double>{std::numeric_limits<double>::infinity()});
  std::vector<Label> y2{Label::Fake, Label::Trustful};
  for (auto a : kAllAlgorithms) CHECK_THROWS_AS(train_model(spec_for(a), bad, y2), ValidationError);

  auto s = spec_for(Algorithm::RandomForest);
  s.forest.trees = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  auto l = spec_for(Algorithm::LogisticRegression);
  l.logistic.learning_rate = -1;
  CHECK_THROWS_AS(l.validate(), std::invalid_argument);
}

TEST_CASE("prediction dimension must match") {
  auto p = blobs(20, 3, 2.0, 2);
  auto m = train_model(spec_for(Algorithm::LogisticRegression), p.x, p.y);
  SparseMatrix other(2);
  other.add_row(std::vector<double>{1, 1});
  CHECK_THROWS_AS(predict_proba(m, other), std::invalid_argument);
}

TEST_CASE("logistic regression with zero parameters is indifferent") {
  TrainedModel m(Algorithm::LogisticRegression, 3, LogisticModel{{0, 0, 0}, 0.0});
  auto p = blobs(5, 3, 1.0, 3);
  for (auto pr : predict_proba(m, p.x)) {
    CHECK(pr[0] == 0.5);
    CHECK(pr[1] == 0.5);
  }
}

TEST_CASE("logistic gradient matches central finite differences") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = blobs(12, 4, 0.7, 100 + trial);
    std::vector<double> w(4);
    for (auto& v : w) v = g(rng);
    double b = g(rng);
    const double l2 = 0.05;
    auto obj = logistic_objective(p.x, p.y, w, b, l2);
    const double h = 1e-6;
    for (std::size_t j = 0; j <= w.size(); ++j) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (j < w.size()) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      double fd = (logistic_objective(p.x, p.y, wp, bp, l2).loss - logistic_objective(p.x, p.y, wm, bm, l2).loss) /
                  (2 * h);
      double an = j < w.size() ? obj.grad_weights[j] : obj.grad_bias;
      double rel = std::abs(fd - an) / std::max(std::abs(an), 1e-8);
      CHECK(rel <= 1e-5);
    }
  }
}

TEST_CASE("logistic regression learns a separable problem") {
  auto p = blobs(200, 3, 4.0, 8);
  auto m = train_model(spec_for(Algorithm::LogisticRegression), p.x, p.y);
  CHECK(accuracy(m, p) > 0.95);
  for (auto pr : predict_proba(m, p.x)) CHECK(pr[0] + pr[1] == doctest::Approx(1.0));
}

TEST_CASE("Gaussian NB on the symmetric 1-D example") {
  SparseMatrix x(1);
  for (double v : {1.0, 3.0, -1.0, -3.0}) x.add_row(std::vector<double>{v});
  std::vector<Label> y{Label::Trustful, Label::Trustful, Label::Fake, Label::Fake};
  auto m = train_model(spec_for(Algorithm::GaussianNB), x, y);
  SparseMatrix q(1);
  q.add_row(std::vector<double>{0.0});
  auto pr = predict_proba(m, q)[0];
  CHECK(std::abs(pr[0] - 0.5) <= 1e-12);
  CHECK(std::abs(pr[1] - 0.5) <= 1e-12);
}

TEST_CASE("Gaussian NB equals the closed-form posterior on tiny problems") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 3 + trial % 2;  // 3 or 4 points
    std::size_t d = 1 + trial % 3;
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& r : rows) {
      for (auto& v : r) v = g(rng);
    }
    if (trial % 5 == 0) rows[0][0] = 0.0;  // implicit zero in the sparse path
    std::vector<Label> y(n, Label::Trustful);
    y[0] = Label::Fake;
    if (n == 4) y[3] = Label::Fake;
    auto x = SparseMatrix::from_dense(rows, d);
    auto m = train_model(spec_for(Algorithm::GaussianNB), x, y);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> q(d);
      for (auto& v : q) v = g(rng);
      if (k == 0) std::fill(q.begin(), q.end(), 0.0);
      SparseMatrix qm(d);
      qm.add_row(q);
      auto got = predict_proba(m, qm)[0];
      auto want = gnb_oracle(rows, y, q, 1e-9);
      CHECK(std::abs(got[0] - want[0]) <= 1e-9);
      CHECK(std::abs(got[1] - want[1]) <= 1e-9);
    }
  }
}

TEST_CASE("decision tree reaches purity on separable data") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto p = blobs(150, 3, 6.0, seed);
    auto m = train_model(spec_for(Algorithm::DecisionTree, seed), p.x, p.y);
    CHECK(accuracy(m, p) == 1.0);
  }
  // XOR needs depth 2
  SparseMatrix x(2);
  std::vector<Label> y;
  for (auto [a, b] : {std::pair{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}}) {
    x.add_row(std::vector<double>{a, b});
    y.push_back(a == b ? Label::Trustful : Label::Fake);
  }
  auto m = train_model(spec_for(Algorithm::DecisionTree), x, y);
  CHECK(predict_label(m, x) == y);
}

TEST_CASE("noisy labels: a pure tree still fits every distinct point") {
  auto p = blobs(120, 2, 0.3, 44);
  auto m = train_model(spec_for(Algorithm::DecisionTree), p.x, p.y);
  CHECK(accuracy(m, p) == 1.0);
}

TEST_CASE("tree depth and sample weights") {
  auto p = blobs(60, 2, 0.5, 4);
  TreeParams tp;
  tp.max_depth = 1;
  std::vector<double> w(60, 1.0);
  auto stump = grow_tree(p.x, p.y, w, tp, 1);
  CHECK(stump.depth() <= 1);
  CHECK(stump.nodes() <= 3);
  // zero-weight samples are ignored
  std::vector<double> half(60, 0.0);
  for (std::size_t i = 0; i < 30; ++i) half[i] = 1.0;
  SparseMatrix first(2);
  for (std::size_t i = 0; i < 30; ++i) first.add_row(p.x.dense_row(i));
  std::vector<Label> fy(p.y.begin(), p.y.begin() + 30);
  std::vector<double> ones(30, 1.0);
  CHECK(grow_tree(p.x, p.y, half, TreeParams{}, 1) == grow_tree(first, fy, ones, TreeParams{}, 1));
}

TEST_CASE("single-tree unbootstrapped full-feature forest equals the decision tree") {
  for (std::uint64_t seed : {1u, 9u, 123u}) {
    auto p = blobs(120, 5, 0.8, seed);
    auto f = spec_for(Algorithm::RandomForest, seed);
    f.forest.trees = 1;
    f.forest.bootstrap = false;
    f.forest.max_features = 5;
    auto forest = train_model(f, p.x, p.y);
    auto tree = train_model(spec_for(Algorithm::DecisionTree, seed), p.x, p.y);
    CHECK(forest.as<ForestModel>().trees[0] == tree.as<DecisionTree>());
    auto q = blobs(50, 5, 0.8, seed + 1000);
    CHECK(predict_label(forest, q.x) == predict_label(tree, q.x));
    CHECK(predict_proba(forest, q.x) == predict_proba(tree, q.x));
  }
}

TEST_CASE("forest probability is the vote share") {
  ForestModel f{{leaf(1.0), leaf(0.9), leaf(0.2)}};
  TrainedModel m(Algorithm::RandomForest, 1, f);
  SparseMatrix x(1);
  x.add_row(std::vector<double>{0.3});
  auto pr = predict_proba(m, x)[0];
  CHECK(pr[0] == doctest::Approx(1.0 / 3.0));
  CHECK(pr[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("forest is independent of thread count and repeatable") {
  auto p = blobs(200, 6, 0.6, 77);
  auto s = spec_for(Algorithm::RandomForest, 5);
  s.forest.trees = 20;
  auto a = train_model(s, p.x, p.y);
  s.threads = 4;
  auto b = train_model(s, p.x, p.y);
  CHECK(a == b);
  s.seed = 6;
  CHECK_FALSE(train_model(s, p.x, p.y) == a);
}

TEST_CASE("AdaBoost alpha") {
  CHECK(std::abs(boost_alpha(0.25) - std::log(3.0)) <= 1e-15);
  CHECK(boost_alpha(0.25) == doctest::Approx(1.0986).epsilon(1e-4));
  CHECK(boost_alpha(0.5) == 0.0);
}

TEST_CASE("AdaBoost training error bound") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto p = blobs(200, 4, 0.9, 300 + seed);
    auto m = train_model(spec_for(Algorithm::AdaBoost, seed), p.x, p.y);
    const auto& b = m.as<BoostModel>();
    REQUIRE(!b.errors.empty());
    CHECK(b.errors.size() == b.alpha.size());
    CHECK(b.stumps.size() <= 50);
    double bound = 1.0, prev = 1.0;
    for (double e : b.errors) {
      CHECK(e < 0.5);
      bound *= 2.0 * std::sqrt(e * (1.0 - e));
      CHECK(bound <= prev);
      prev = bound;
    }
    for (const auto& s : b.stumps) CHECK(s.depth() <= 1);
    CHECK(1.0 - accuracy(m, p) <= bound + 1e-12);
  }
}

TEST_CASE("AdaBoost stops on a perfect stump") {
  SparseMatrix x(1);
  std::vector<Label> y;
  for (int i = 0; i < 10; ++i) {
    x.add_row(std::vector<double>{static_cast<double>(i)});
    y.push_back(i < 5 ? Label::Trustful : Label::Fake);
  }
  auto m = train_model(spec_for(Algorithm::AdaBoost), x, y);
  CHECK(m.as<BoostModel>().stumps.size() == 1);
  CHECK(predict_label(m, x) == y);
}

TEST_CASE("probabilities are distributions for every learner") {
  auto p = blobs(80, 3, 1.0, 12);
  auto q = blobs(30, 3, 1.0, 13);
  for (auto a : kAllAlgorithms) {
    auto s = spec_for(a);
    s.forest.trees = 10;
    auto m = train_model(s, p.x, p.y);
    CHECK(m == train_model(s, p.x, p.y));
    for (auto pr : predict_proba(m, q.x)) {
      CHECK(pr[0] >= 0);
      CHECK(pr[1] >= 0);
      CHECK(pr[0] + pr[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("model serialization round-trips exactly") {
  auto p = blobs(80, 3, 1.0, 14);
  auto dir = std::filesystem::temp_directory_path() / "f3_model_test";
  std::filesystem::create_directories(dir);
  for (auto a : kAllAlgorithms) {
    auto s = spec_for(a);
    s.forest.trees = 5;
    auto m = train_model(s, p.x, p.y);
    auto doc = serialize_model(m);
    CHECK(doc.find(kModelFormatTag) != std::string::npos);
    auto back = deserialize_model(doc);
    CHECK(back == m);
    CHECK(predict_proba(back, p.x) == predict_proba(m, p.x));
    auto path = dir / (std::string(algorithm_code(a)) + ".json");
    save_model(m, path);
    CHECK(load_model(path) == m);
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS(deserialize_model("{\"format\":\"other\"}"));
  CHECK_THROWS(deserialize_model("not json"));
}
