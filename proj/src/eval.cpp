#include "f3/eval.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "f3/parallel.hpp"

namespace f3 {

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f != fold) out.insert(out.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldPlan stratified_folds(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_folds: k must be >= 2");
  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[class_index(labels[i])].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (members[c].size() < k)
      throw std::invalid_argument(fmt::format("stratified_folds: class {} has {} members, fewer than k={}",
                                              to_string(label_from_index(c)), members[c].size(), k));
  }
  FoldPlan plan;
  plan.folds.resize(k);
  std::mt19937_64 rng(seed);
  // Class 1 continues where class 0 stopped so total fold sizes stay even.
  std::size_t offset = 0;
  for (int c = 0; c < 2; ++c) {
    std::shuffle(members[c].begin(), members[c].end(), rng);
    for (std::size_t i = 0; i < members[c].size(); ++i) plan.folds[(offset + i) % k].push_back(members[c][i]);
    offset = (offset + members[c].size()) % k;
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

BinaryScores f1_binary(std::span<const Label> predicted, std::span<const Label> actual,
                       Label positive) {
  if (predicted.size() != actual.size())
    throw std::invalid_argument("f1_binary: predictions and labels differ in length");
  if (predicted.empty()) throw std::invalid_argument("f1_binary: no predictions");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    bool p = predicted[i] == positive, a = actual[i] == positive;
    tp += p && a;
    fp += p && !a;
    fn += !p && a;
  }
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  BinaryScores s;
  s.precision = ratio(tp, tp + fp);
  s.recall = ratio(tp, tp + fn);
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

// --- fold featurizer ------------------------------------------------------

FoldFeaturizer FoldFeaturizer::fit(std::span<const std::vector<double>> user_rows,
                                   std::span<const TokenList> docs, GroupSet groups, int ngram,
                                   std::size_t min_df) {
  FoldFeaturizer f;
  if (groups.has_user_groups()) {
    f.scaler_ = MinMaxScaler::fit(user_rows);
    f.user_dimension_ = f.scaler_->dimension();
  }
  if (groups.contains(FeatureGroup::ReviewCentric)) {
    f.vectorizer_ = TfidfVectorizer::fit(docs, ngram, min_df);
  }
  return f;
}

std::size_t FoldFeaturizer::dimension() const {
  return user_dimension_ + (vectorizer_ ? vectorizer_->vocabulary().size() : 0);
}

SparseMatrix FoldFeaturizer::transform(std::span<const std::vector<double>> user_rows,
                                       std::span<const TokenList> docs) const {
  const std::size_t n = scaler_ ? user_rows.size() : docs.size();
  if (scaler_ && vectorizer_ && user_rows.size() != docs.size())
    throw std::invalid_argument("FoldFeaturizer: user rows and documents differ in count");
  SparseMatrix m(dimension());
  std::vector<SparseEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    entries.clear();
    if (scaler_) {
      auto scaled = scaler_->apply(user_rows[i]);
      for (std::size_t j = 0; j < scaled.size(); ++j) {
        if (scaled[j] != 0.0) entries.push_back({static_cast<std::uint32_t>(j), scaled[j]});
      }
    }
    if (vectorizer_) {
      for (const auto& e : vectorizer_->transform(docs[i])) {
        entries.push_back({static_cast<std::uint32_t>(user_dimension_ + e.index), e.weight});
      }
    }
    m.add_row(entries);
  }
  return m;
}

// --- grid -----------------------------------------------------------------

namespace {

template <typename T>
std::vector<T> gather(std::span<const T> source, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(source[i]);
  return out;
}

std::uint64_t scope_key(const std::string& city) {
  if (city == kPooledScope) return 99;
  return 100 + static_cast<std::uint64_t>(*parse_city(city));
}

std::uint64_t group_key(GroupSet g) {
  std::uint64_t key = 0;
  for (auto grp : g.groups()) key |= 1ull << static_cast<int>(grp);
  return key;
}

}  // namespace

ExperimentTable run_experiment_grid(const Dataset& dataset, const GridSpec& spec) {
  ExperimentTable table;
  if (spec.cities.empty() || spec.group_sets.empty() || spec.algorithms.empty()) return table;
  for (const auto& a : spec.algorithms) a.validate();
  for (const auto& g : spec.group_sets) {
    if (g.empty()) throw std::invalid_argument("experiment grid: empty feature group set");
  }

  // Scopes.
  std::vector<std::string> scope_names;
  if (spec.cities.size() > 1) scope_names.emplace_back(kPooledScope);
  for (auto c : spec.cities) scope_names.emplace_back(to_string(c));

  std::vector<Label> all_labels(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) all_labels[i] = dataset.review(i).label;

  for (const auto& name : scope_names) {
    ScopePlan scope;
    scope.city = name;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      City c = dataset.review(i).city;
      bool wanted = name == kPooledScope
                        ? std::find(spec.cities.begin(), spec.cities.end(), c) != spec.cities.end()
                        : to_string(c) == name;
      if (wanted) scope.examples.push_back(i);
    }
    auto labels = gather<Label>(all_labels, scope.examples);
    scope.fold_seed = mix_seed(spec.seed, scope_key(name));
    try {
      scope.plan = stratified_folds(labels, spec.folds, scope.fold_seed);
    } catch (const std::exception& e) {
      throw std::invalid_argument("experiment grid: scope " + name + ": " + e.what());
    }
    table.scopes.push_back(std::move(scope));
  }

  // Result rows in grid order.
  const std::size_t n_groups = spec.group_sets.size();
  const std::size_t n_algos = spec.algorithms.size();
  for (const auto& scope : table.scopes) {
    for (const auto& g : spec.group_sets) {
      for (const auto& a : spec.algorithms) {
        ExperimentResult row;
        row.city = scope.city;
        row.groups = g;
        row.algorithm = a.algorithm;
        row.fold_seed = scope.fold_seed;
        row.model_seed = mix_seed(mix_seed(mix_seed(spec.seed, scope_key(scope.city)), group_key(g)),
                                  static_cast<std::uint64_t>(a.algorithm) + 7 * a.seed);
        row.folds.resize(spec.folds);
        table.rows.push_back(std::move(row));
      }
    }
  }

  // Per-scope inputs shared by every group set.
  std::vector<std::vector<Label>> scope_labels;
  std::vector<std::vector<TokenList>> scope_tokens;
  bool any_text = std::any_of(spec.group_sets.begin(), spec.group_sets.end(), [](GroupSet g) {
    return g.contains(FeatureGroup::ReviewCentric);
  });
  for (const auto& scope : table.scopes) {
    scope_labels.push_back(gather<Label>(all_labels, scope.examples));
    std::vector<TokenList> tokens;
    if (any_text) {
      tokens.reserve(scope.examples.size());
      for (auto i : scope.examples) tokens.push_back(tokenize(dataset.review(i).text));
    }
    scope_tokens.push_back(std::move(tokens));
  }
  std::vector<std::vector<std::vector<std::vector<double>>>> scope_user(table.scopes.size());
  for (std::size_t si = 0; si < table.scopes.size(); ++si) {
    scope_user[si].resize(n_groups);
    for (std::size_t gi = 0; gi < n_groups; ++gi) {
      if (!spec.group_sets[gi].has_user_groups()) continue;
      auto& rows = scope_user[si][gi];
      rows.reserve(table.scopes[si].examples.size());
      for (auto i : table.scopes[si].examples)
        rows.push_back(extract_f3(dataset.profile(i), spec.group_sets[gi]).values);
    }
  }

  // One job per (scope, group set, fold); each trains every algorithm on the
  // same fold matrices.
  const std::size_t n_scopes = table.scopes.size();
  const std::size_t n_jobs = n_scopes * n_groups * spec.folds;
  parallel_for(n_jobs, spec.threads, [&](std::size_t job) {
    const std::size_t fold = job % spec.folds;
    const std::size_t gi = (job / spec.folds) % n_groups;
    const std::size_t si = job / (spec.folds * n_groups);
    const auto& scope = table.scopes[si];
    const GroupSet groups = spec.group_sets[gi];
    auto cell_name = [&](std::string_view algo) {
      return fmt::format("cell ({}, {}, {}, fold {})", scope.city, groups.to_string(), algo, fold);
    };

    std::optional<FoldFeaturizer> featurizer;
    SparseMatrix train_x, test_x;
    try {
      const auto& user = scope_user[si][gi];
      const auto train = scope.plan.train_indices(fold);
      const auto& test = scope.plan.test_indices(fold);
      auto pick_rows = [&](const std::vector<std::size_t>& idx) {
        return user.empty() ? std::vector<std::vector<double>>{}
                            : gather<std::vector<double>>(user, idx);
      };
      auto pick_docs = [&](const std::vector<std::size_t>& idx) {
        return groups.contains(FeatureGroup::ReviewCentric)
                   ? gather<TokenList>(scope_tokens[si], idx)
                   : std::vector<TokenList>{};
      };
      auto train_user = pick_rows(train), test_user = pick_rows(test);
      auto train_docs = pick_docs(train), test_docs = pick_docs(test);
      featurizer = FoldFeaturizer::fit(train_user, train_docs, groups, spec.ngram, spec.min_df);
      train_x = featurizer->transform(train_user, train_docs);
      test_x = featurizer->transform(test_user, test_docs);
    } catch (const std::exception& e) {
      // featurization is shared by every algorithm of the cell
      std::string algos;
      for (const auto& a : spec.algorithms) algos += (algos.empty() ? "" : "/") + std::string(algorithm_code(a.algorithm));
      throw Error(cell_name(algos) + ": " + e.what());
    }
    const auto train_y = gather<Label>(scope_labels[si], scope.plan.train_indices(fold));
    const auto test_y = gather<Label>(scope_labels[si], scope.plan.test_indices(fold));

    for (std::size_t ai = 0; ai < n_algos; ++ai) {
      auto& row = table.rows[(si * n_groups + gi) * n_algos + ai];
      AlgorithmSpec algo = spec.algorithms[ai];
      algo.seed = mix_seed(row.model_seed, fold);
      algo.threads = 1;
      try {
        auto model = train_model(algo, train_x, train_y);
        row.folds[fold] = f1_binary(predict_label(model, test_x), test_y);
      } catch (const std::exception& e) {
        throw Error(cell_name(algorithm_code(algo.algorithm)) + ": " + e.what());
      }
    }
  });

  for (auto& row : table.rows) {
    double total = 0.0;
    for (const auto& f : row.folds) total += f.f1;
    row.mean_f1 = total / static_cast<double>(row.folds.size());
  }
  return table;
}

void write_results_csv(std::ostream& out, std::span<const ExperimentResult> rows) {
  out << "city,groups,algorithm,fold,precision,recall,f1\n";
  for (const auto& r : rows) {
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      out << fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f}\n", r.city, r.groups.to_string(),
                         algorithm_code(r.algorithm), f, r.folds[f].precision, r.folds[f].recall,
                         r.folds[f].f1);
    }
  }
}

void write_summary_csv(std::ostream& out, std::span<const ExperimentResult> rows) {
  out << "city,groups,algorithm,folds,fold_seed,model_seed,mean_f1\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{:.6f}\n", r.city, r.groups.to_string(),
                       algorithm_code(r.algorithm), r.folds.size(), r.fold_seed, r.model_seed,
                       r.mean_f1);
  }
}

std::string experiment_report_json(const ExperimentTable& table, const GridSpec& spec) {
  nlohmann::ordered_json j;
  j["format"] = "f3-experiment/1";
  j["seed"] = spec.seed;
  j["folds"] = spec.folds;
  j["ngram"] = spec.ngram;
  j["min_df"] = spec.min_df;
  auto& scopes = j["scopes"] = nlohmann::ordered_json::array();
  for (const auto& s : table.scopes) {
    nlohmann::ordered_json js;
    js["city"] = s.city;
    js["fold_seed"] = s.fold_seed;
    js["examples"] = s.examples.size();
    std::vector<std::size_t> assignment(s.examples.size(), 0);
    for (std::size_t f = 0; f < s.plan.size(); ++f) {
      for (auto pos : s.plan.folds[f]) assignment[pos] = f;
    }
    js["fold_of_example"] = assignment;
    scopes.push_back(std::move(js));
  }
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json jr;
    jr["city"] = r.city;
    jr["groups"] = r.groups.to_string();
    jr["algorithm"] = algorithm_code(r.algorithm);
    jr["model_seed"] = r.model_seed;
    std::vector<double> f1;
    for (const auto& f : r.folds) f1.push_back(f.f1);
    jr["fold_f1"] = f1;
    jr["mean_f1"] = r.mean_f1;
    rows.push_back(std::move(jr));
  }
  return j.dump(2) + "\n";
}

}  // namespace f3
