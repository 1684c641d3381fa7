// Acceptance checks. Prints one PASS/FAIL line per criterion; detail lines
// are indented underneath. Exit status is nonzero when any criterion fails.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "f3/cli.hpp"
#include "f3/corpus.hpp"
#include "f3/eval.hpp"
#include "f3/learn.hpp"
#include "f3/stats.hpp"
#include "f3/text.hpp"

using namespace f3;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeed = 0;

struct Verdict {
  bool ok = true;
  std::vector<std::string> lines;

  void check(bool cond, std::string what) {
    ok = ok && cond;
    lines.push_back(fmt::format("    [{}] {}", cond ? "ok" : "FAILED", what));
  }
  void note(std::string what) { lines.push_back("    " + what); }
};

int failures = 0;

void report(int number, const std::string& title, const Verdict& v) {
  fmt::print("{} criterion {}: {}\n", v.ok ? "PASS" : "FAIL", number, title);
  for (const auto& l : v.lines) fmt::print("{}\n", l);
  std::fflush(stdout);
  if (!v.ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// --- criterion 1 ------------------------------------------------------------

Verdict statistical_reproduction() {
  Verdict v;
  auto t0 = Clock::now();
  const std::vector<std::vector<double>> scores = {
      {0.79, 0.81, 0.82, 0.72, 0.82},
      {0.73, 0.73, 0.78, 0.69, 0.79},
      {0.78, 0.81, 0.81, 0.71, 0.82},
      {0.78, 0.81, 0.81, 0.69, 0.82},
  };
  auto ranks = tie_average_ranks(scores);
  auto friedman = friedman_test(ranks, 0.05);
  double cd = nemenyi_cd(5, 4, 0.05);
  auto pairs = nemenyi_pairs(ranks, cd);
  auto holm = holm_stepdown(ranks, worst_ranked(ranks), 0.05);
  double elapsed = seconds_since(t0);

  const double printed[] = {3.87, 2.87, 2.12, 5.0, 1.12};
  bool ranks_ok = true;
  std::string shown;
  for (std::size_t j = 0; j < 5; ++j) {
    // printed values truncate the .xx5 averages
    ranks_ok = ranks_ok && std::abs(std::floor(ranks.average[j] * 100 + 1e-9) / 100 - printed[j]) < 1e-9;
    shown += fmt::format("{}{:.3f}", j ? ", " : "", ranks.average[j]);
  }
  v.check(ranks_ok, "average ranks (" + shown + ") match 3.87, 2.87, 2.12, 5, 1.12 at two decimals");
  v.check(std::abs(friedman.chi_square - 14.5) <= 0.01, fmt::format("chi2_F = {:.4f} (14.5 +- 0.01)", friedman.chi_square));
  v.check(std::abs(friedman.f_statistic - 29.0) <= 0.1, fmt::format("F_F = {:.4f} (29.0 +- 0.1)", friedman.f_statistic));
  v.check(std::abs(friedman.f_critical - 3.26) <= 0.01, fmt::format("F_crit = {:.4f} (3.26 +- 0.01)", friedman.f_critical));
  v.check(friedman.reject, "Friedman null rejected");
  v.check(std::abs(cd - 3.05) <= 0.01, fmt::format("CD = {:.4f} (3.05 +- 0.01)", cd));
  bool gnb_ab = false;
  for (const auto& p : pairs) {
    if ((p.first == 3 && p.second == 4) || (p.first == 4 && p.second == 3)) gnb_ab = p.significant;
  }
  v.check(gnb_ab, "Nemenyi flags GNB vs AB");

  std::map<std::size_t, HolmStep> by_method;
  for (const auto& s : holm.steps) by_method[s.method] = s;
  const auto& ab = by_method[4];
  const auto& rf = by_method[2];
  v.check(holm.control == 3, "Holm control is GNB (worst ranked)");
  v.check(ab.reject && std::abs(ab.p - 0.0005) <= 0.0002 && std::abs(ab.adjusted_alpha - 0.0125) < 1e-12,
          fmt::format("Holm AB: p = {:.5f} vs {:.4f}, rejected", ab.p, ab.adjusted_alpha));
  v.check(rf.reject && std::abs(rf.p - 0.010) <= 0.001 && std::abs(rf.adjusted_alpha - 0.05 / 3) < 1e-12,
          fmt::format("Holm RF: p = {:.5f} vs {:.4f}, rejected", rf.p, rf.adjusted_alpha));
  v.check(!by_method[1].reject && !by_method[0].reject,
          fmt::format("Holm retains DT (p = {:.4f}) and LR (p = {:.4f})", by_method[1].p, by_method[0].p));
  v.check(elapsed < 1.0, fmt::format("runtime {:.4f} s (< 1 s)", elapsed));
  return v;
}

// --- criterion 2 ------------------------------------------------------------

struct SyntheticRuns {
  Dataset dataset;
  ExperimentTable full;      // 4 cities + pooled, full groups, 5 algorithms
  double full_seconds = 0;
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> per_city;  // (city, groups) -> algo -> F1
};

GridSpec base_grid(std::vector<City> cities, std::vector<GroupSet> groups) {
  GridSpec g;
  g.cities = std::move(cities);
  g.group_sets = std::move(groups);
  for (auto a : kAllAlgorithms) {
    AlgorithmSpec s;
    s.algorithm = a;
    g.algorithms.push_back(s);
  }
  g.folds = 10;
  g.seed = kSeed;
  g.threads = worker_threads();
  return g;
}

SyntheticRuns run_synthetic() {
  SyntheticRuns r;
  r.dataset = synthesize_dataset(kSeed, reference_city_sizes(), reference_profile_stats());

  auto t0 = Clock::now();
  r.full = run_experiment_grid(r.dataset, base_grid({kAllCities.begin(), kAllCities.end()}, {GroupSet::all_user()}));
  r.full_seconds = seconds_since(t0);
  for (const auto& row : r.full.rows) r.per_city[{row.city, row.groups.to_string()}][std::string(algorithm_code(row.algorithm))] = row.mean_f1;

  // single groups, city by city (the pooled scope only appears with several cities)
  std::vector<GroupSet> singles;
  for (auto g : kUserGroups) singles.push_back(GroupSet{g});
  singles.push_back(GroupSet{FeatureGroup::ReviewCentric});
  for (auto c : kAllCities) {
    auto t = run_experiment_grid(r.dataset, base_grid({c}, singles));
    for (const auto& row : t.rows) r.per_city[{row.city, row.groups.to_string()}][std::string(algorithm_code(row.algorithm))] = row.mean_f1;
  }
  return r;
}

Verdict synthetic_mirror(const SyntheticRuns& r) {
  Verdict v;
  v.note(fmt::format("dataset: {} reviews, seed {}, {} worker thread(s)", r.dataset.size(), kSeed, worker_threads()));
  const std::string full = GroupSet::all_user().to_string();

  for (auto c : kAllCities) {
    std::string city(to_string(c));
    double ab = r.per_city.at({city, full}).at("AB");
    v.check(ab >= 0.80, fmt::format("{} AB {} mean F1 {:.4f} >= 0.80", city, full, ab));
  }
  for (auto c : kAllCities) {
    std::string city(to_string(c));
    for (auto a : kAllAlgorithms) {
      std::string code(algorithm_code(a));
      double f = r.per_city.at({city, "R"}).at(code);
      v.check(f >= 0.40 && f <= 0.60, fmt::format("{} {} R-only mean F1 {:.4f} in [0.40, 0.60]", city, code, f));
    }
  }
  for (auto c : kAllCities) {
    std::string city(to_string(c));
    for (auto a : kAllAlgorithms) {
      std::string code(algorithm_code(a));
      double whole = r.per_city.at({city, full}).at(code);
      double best = 0;
      std::string best_group;
      for (const char* g : {"P", "S", "RA", "T", "R"}) {
        double f = r.per_city.at({city, g}).at(code);
        if (f > best) {
          best = f;
          best_group = g;
        }
      }
      v.check(whole >= best - 0.02, fmt::format("{} {} full {:.4f} >= best single ({}) {:.4f} - 0.02", city, code,
                                                 whole, best_group, best));
    }
  }
  v.check(r.full.rows.size() == 25, fmt::format("full grid has {} rows (5 scopes x 5 algorithms)", r.full.rows.size()));
  v.check(r.full_seconds < 300, fmt::format("full grid took {:.1f} s (< 300 s)", r.full_seconds));
  return v;
}

// --- criterion 3 ------------------------------------------------------------

struct Problem {
  SparseMatrix x;
  std::vector<Label> y;
};

Problem blobs(std::size_t n, std::size_t d, double sep, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  Problem p{SparseMatrix(d), {}};
  for (std::size_t i = 0; i < n; ++i) {
    Label l = i % 2 ? Label::Fake : Label::Trustful;
    std::vector<double> row(d);
    for (auto& val : row) val = g(rng) + (l == Label::Fake ? sep : 0.0);
    p.x.add_row(row);
    p.y.push_back(l);
  }
  return p;
}

AlgorithmSpec spec(Algorithm a, std::uint64_t seed) {
  AlgorithmSpec s;
  s.algorithm = a;
  s.seed = seed;
  return s;
}

Verdict learner_oracles() {
  Verdict v;
  // GNB vs the Gaussian posterior written out directly
  double gnb_worst = 0;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0, 2);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4, d = 1 + trial % 3;
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& r : rows) {
      for (auto& x : r) x = g(rng);
    }
    std::vector<Label> y{Label::Trustful, Label::Fake, Label::Trustful, Label::Fake};
    auto m = train_model(spec(Algorithm::GaussianNB, 1), SparseMatrix::from_dense(rows, d), y);
    double max_var = 0;
    for (std::size_t j = 0; j < d; ++j) {
      double mu = 0, var = 0;
      for (const auto& r : rows) mu += r[j] / n;
      for (const auto& r : rows) var += (r[j] - mu) * (r[j] - mu) / n;
      max_var = std::max(max_var, var);
    }
    std::vector<double> q(d);
    for (auto& x : q) x = g(rng);
    double logp[2];
    for (int c = 0; c < 2; ++c) {
      logp[c] = std::log(0.5);
      for (std::size_t j = 0; j < d; ++j) {
        double a = rows[c][j], b = rows[c + 2][j];
        double mu = (a + b) / 2, var = (a - b) * (a - b) / 4 + 1e-9 * max_var;
        logp[c] += -0.5 * std::log(2 * std::numbers::pi * var) - (q[j] - mu) * (q[j] - mu) / (2 * var);
      }
    }
    double want = 1 / (1 + std::exp(logp[0] - logp[1]));
    SparseMatrix qm(d);
    qm.add_row(q);
    gnb_worst = std::max(gnb_worst, std::abs(predict_proba(m, qm)[0][1] - want));
  }
  v.check(gnb_worst <= 1e-9, fmt::format("GNB vs closed-form posterior on 4-point problems: max error {:.2e}", gnb_worst));

  // LR gradient vs central differences
  double lr_worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto p = blobs(15, 5, 0.5, 50 + trial);
    std::vector<double> w(5);
    for (auto& x : w) x = g(rng) / 2;
    double b = g(rng) / 2;
    auto obj = logistic_objective(p.x, p.y, w, b, 1e-2);
    for (std::size_t j = 0; j <= w.size(); ++j) {
      const double h = 1e-6;
      auto wp = w, wm = w;
      double bp = b, bm = b;
      (j < w.size() ? wp[j] : bp) += h;
      (j < w.size() ? wm[j] : bm) -= h;
      double fd = (logistic_objective(p.x, p.y, wp, bp, 1e-2).loss - logistic_objective(p.x, p.y, wm, bm, 1e-2).loss) / (2 * h);
      double an = j < w.size() ? obj.grad_weights[j] : obj.grad_bias;
      lr_worst = std::max(lr_worst, std::abs(fd - an) / std::max(std::abs(an), 1e-8));
    }
  }
  v.check(lr_worst <= 1e-5, fmt::format("LR gradient vs central differences: max relative error {:.2e}", lr_worst));

  // CART purity
  double worst_acc = 1;
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto p = blobs(300, 4, 5.0, 900 + s);
    auto m = train_model(spec(Algorithm::DecisionTree, s), p.x, p.y);
    auto pred = predict_label(m, p.x);
    double ok = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == p.y[i];
    worst_acc = std::min(worst_acc, ok / pred.size());
  }
  v.check(worst_acc == 1.0, fmt::format("CART training accuracy on separable data: {:.4f}", worst_acc));

  // AdaBoost bound over all 50 rounds
  auto noisy = blobs(400, 3, 0.6, 77);
  auto ab = train_model(spec(Algorithm::AdaBoost, 3), noisy.x, noisy.y).as<BoostModel>();
  bool monotone = true;
  double bound = 1;
  for (double e : ab.errors) {
    double next = bound * 2 * std::sqrt(e * (1 - e));
    monotone = monotone && next <= bound;
    bound = next;
  }
  v.check(ab.errors.size() == 50 && monotone,
          fmt::format("AdaBoost bound non-increasing over {} rounds (final {:.4f})", ab.errors.size(), bound));

  // RF(1 tree, no bootstrap, all features) == DT
  bool same = true;
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto p = blobs(200, 6, 0.7, 40 + s);
    auto f = spec(Algorithm::RandomForest, s);
    f.forest.trees = 1;
    f.forest.bootstrap = false;
    f.forest.max_features = 6;
    auto forest = train_model(f, p.x, p.y);
    auto tree = train_model(spec(Algorithm::DecisionTree, s), p.x, p.y);
    auto q = blobs(100, 6, 0.7, 140 + s);
    same = same && forest.as<ForestModel>().trees[0] == tree.as<DecisionTree>() &&
           predict_label(forest, q.x) == predict_label(tree, q.x);
  }
  v.check(same, "RF with one unbootstrapped full-feature tree equals DT");
  return v;
}

// --- criterion 4 ------------------------------------------------------------

Verdict partition_invariants(const SyntheticRuns& r) {
  Verdict v;
  bool folds_ok = true;
  for (const auto& scope : r.full.scopes) {
    std::vector<int> seen(scope.examples.size(), 0);
    std::size_t lo[2] = {SIZE_MAX, SIZE_MAX}, hi[2] = {0, 0};
    for (const auto& fold : scope.plan.folds) {
      std::size_t count[2] = {0, 0};
      for (auto i : fold) {
        ++seen[i];
        ++count[class_index(r.dataset.review(scope.examples[i]).label)];
      }
      for (int c = 0; c < 2; ++c) {
        lo[c] = std::min(lo[c], count[c]);
        hi[c] = std::max(hi[c], count[c]);
      }
    }
    bool exhaustive = std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
    folds_ok = folds_ok && exhaustive && hi[0] - lo[0] <= 1 && hi[1] - lo[1] <= 1 && scope.plan.size() == 10;
  }
  v.check(folds_ok, fmt::format("{} scopes: ten folds, disjoint, exhaustive, per-class sizes within 1",
                                r.full.scopes.size()));

  // fit the fold pipeline on NewYork fold 0, then perturb test rows / one training row
  const auto& scope = r.full.scopes[1];
  const GroupSet groups = GroupSet::parse("P,S,RA,T,R");
  std::vector<std::vector<double>> user;
  std::vector<TokenList> docs;
  for (auto i : scope.examples) {
    user.push_back(extract_f3(r.dataset.profile(i), groups).values);
    docs.push_back(tokenize(r.dataset.review(i).text));
  }
  auto fit_on = [&](const std::vector<std::vector<double>>& u, const std::vector<TokenList>& d) {
    auto train = scope.plan.train_indices(0);
    std::vector<std::vector<double>> tu;
    std::vector<TokenList> td;
    for (auto i : train) {
      tu.push_back(u[i]);
      td.push_back(d[i]);
    }
    return FoldFeaturizer::fit(tu, td, groups, 2, 2);
  };
  auto same_stats = [](const FoldFeaturizer& a, const FoldFeaturizer& b) {
    const auto& sa = *a.scaler();
    const auto& sb = *b.scaler();
    for (std::size_t j = 0; j < sa.dimension(); ++j) {
      if (sa.min(j) != sb.min(j) || sa.max(j) != sb.max(j)) return false;
    }
    const auto& va = a.vectorizer()->vocabulary();
    const auto& vb = b.vectorizer()->vocabulary();
    if (va.size() != vb.size()) return false;
    for (std::size_t t = 0; t < va.size(); ++t) {
      if (va.term(t) != vb.term(t) || va.idf(t) != vb.idf(t)) return false;
    }
    return true;
  };
  auto base = fit_on(user, docs);
  auto pu = user;
  auto pd = docs;
  for (auto i : scope.plan.test_indices(0)) {
    for (auto& x : pu[i]) x = x * 1000 + 12345;
    pd[i] = TokenList{"perturbed", "test", "only", "perturbed", "test", "only"};
  }
  v.check(same_stats(base, fit_on(pu, pd)), "scaler bounds and vocabulary unchanged when test-fold rows are perturbed");
  auto tu = user;
  auto td = docs;
  auto first_train = scope.plan.train_indices(0).front();
  for (auto& x : tu[first_train]) x = x * 1000 + 12345;
  td[first_train] = TokenList{"perturbed", "test", "only"};
  v.check(!same_stats(base, fit_on(tu, td)), "the same perturbation of one training row does change them");
  return v;
}

// --- criterion 5 ------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int s = execute_command(args, out, err);
  if (s != 0) fmt::print("    cli error: {}", err.str());
  return s;
}

// Runs `args` into `dir` twice; the first output tree is moved aside so both
// runs see the same paths.
bool twice_identical(const fs::path& root, const std::string& name, std::vector<std::string> args,
                     std::vector<std::string> second_extra, std::vector<std::string> files, Verdict& v) {
  const fs::path dir = root / name, first = root / (name + ".first");
  args.push_back("--out");
  args.push_back(dir.string());
  if (cli(args) != 0) {
    v.check(false, name + ": first run failed");
    return false;
  }
  fs::rename(dir, first);
  auto again = args;
  again.insert(again.end(), second_extra.begin(), second_extra.end());
  if (cli(again) != 0) {
    v.check(false, name + ": second run failed");
    return false;
  }
  bool same = true;
  for (const auto& f : files) same = same && fs::exists(dir / f) && slurp(first / f) == slurp(dir / f);
  std::string list;
  for (const auto& f : files) list += (list.empty() ? "" : ", ") + f;
  v.check(same, name + (second_extra.empty() ? "" : " (second run threaded)") + ": " + list);
  return same;
}

Verdict determinism() {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / "f3_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string threads = std::to_string(std::max(2u, worker_threads()));

  twice_identical(root, "synth", {"synth", "--seed", "5", "--per-class", "80"}, {}, {"dataset.jsonl", "config.ini"}, v);
  const std::string data = (root / "synth.first/dataset.jsonl").string();
  twice_identical(root, "featurize", {"featurize", "--data", data, "--groups", "P,S,RA,T,R"}, {},
                  {"features.csv", "features.manifest", "review_tfidf.svm", "vocabulary.tsv", "config.ini"}, v);
  std::vector<std::string> exp{"experiment", "--data", data, "--seed", "5", "--groups", "P,S,RA,T", "--groups", "R",
                               "--groups", "T", "--folds", "5"};
  twice_identical(root, "experiment", exp, {},
                  {"results.csv", "summary.csv", "experiment.json", "config.ini"}, v);
  twice_identical(root, "experiment-par", exp, {"--threads", threads},
                  {"results.csv", "summary.csv", "experiment.json"}, v);
  const std::string summary = (root / "experiment.first/summary.csv").string();
  twice_identical(root, "stats", {"stats", "--scores", summary, "--groups", "P,S,RA,T", "--include-pooled"}, {},
                  {"stats.json", "stats.txt", "config.ini"}, v);
  twice_identical(root, "report", {"report", "--summary", summary, "--data", data}, {}, {"report.txt", "config.ini"}, v);
  twice_identical(root, "replay", {"experiment", "--config", (root / "experiment.first/config.ini").string()}, {},
                  {"results.csv", "summary.csv", "experiment.json"}, v);
  v.check(slurp(root / "replay/results.csv") == slurp(root / "experiment/results.csv"),
          "experiment replayed from its recorded config.ini matches");
  fs::remove_all(root);
  return v;
}

// --- criterion 6 ------------------------------------------------------------

Verdict numeric_kernels() {
  Verdict v;
  auto simpson = [](double z) {
    const int n = 20000;
    const double a = -12.0, h = (z - a) / n;
    auto f = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2 * std::numbers::pi); };
    double s = f(a) + f(z);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
  };
  double worst = 0;
  for (double z = -8; z <= 8.0001; z += 0.01) worst = std::max(worst, std::abs(normal_cdf(z) - simpson(z)));
  v.check(worst <= 1e-7, fmt::format("normal CDF vs Simpson integration on [-8, 8]: max error {:.2e}", worst));

  double q = f_quantile(0.95, 4, 12);
  v.check(std::abs(q - 3.26) <= 0.01, fmt::format("F(4, 12) 0.95 quantile = {:.5f} (3.26 +- 0.01)", q));

  std::vector<TokenList> docs{{"good", "phone"}, {"bad", "phone"}};
  auto [vocab, vecs] = tfidf_fit_transform(docs, 1, 1);
  const double idf_phone = std::log(3.0 / 3.0) + 1, idf_good = std::log(3.0 / 2.0) + 1;
  const double norm = std::sqrt(idf_good * idf_good + idf_phone * idf_phone);
  bool ok = vocab.size() == 3 && std::abs(vocab.idf(vocab.index_of("phone")) - idf_phone) <= 1e-12 &&
            std::abs(vocab.idf(vocab.index_of("good")) - idf_good) <= 1e-12 &&
            std::abs(vocab.idf(vocab.index_of("bad")) - idf_good) <= 1e-12;
  double err = 0;
  for (std::size_t d = 0; d < 2; ++d) {
    for (const auto& e : vecs[d]) {
      double want = (vocab.term(e.index) == "phone" ? idf_phone : idf_good) / norm;
      err = std::max(err, std::abs(e.weight - want));
    }
    ok = ok && vecs[d].size() == 2;
  }
  v.check(ok && err <= 1e-12,
          fmt::format("two-document idf (1, {:.10f}) and normalized weights: max error {:.2e}", idf_good, err));
  return v;
}

}  // namespace

int main() {
  try {
    report(1, "statistical reproduction of the four-city comparison", statistical_reproduction());
    report(3, "learner oracles", learner_oracles());
    report(6, "numeric kernels", numeric_kernels());
    report(5, "CLI determinism", determinism());
    auto t0 = Clock::now();
    auto runs = run_synthetic();
    fmt::print("    (synthetic experiments took {:.1f} s)\n", seconds_since(t0));
    report(2, "synthetic mirror properties", synthetic_mirror(runs));
    report(4, "partition invariants", partition_invariants(runs));
  } catch (const std::exception& e) {
    fmt::print("FAIL acceptance aborted: {}\n", e.what());
    return 2;
  }
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
