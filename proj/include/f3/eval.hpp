#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "f3/corpus.hpp"
#include "f3/features.hpp"
#include "f3/learn.hpp"
#include "f3/matrix.hpp"
#include "f3/text.hpp"

namespace f3 {

/// Disjoint folds covering every example index; each fold sorted ascending.
struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;

  std::size_t size() const { return folds.size(); }
  std::vector<std::size_t> train_indices(std::size_t fold) const;
  const std::vector<std::size_t>& test_indices(std::size_t fold) const { return folds[fold]; }
};

/// Class-wise shuffled round-robin assignment.
FoldPlan stratified_folds(std::span<const Label> labels, std::size_t k, std::uint64_t seed);

struct BinaryScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

BinaryScores f1_binary(std::span<const Label> predicted, std::span<const Label> actual,
                       Label positive = Label::Fake);

/// Feature pipeline fitted on one training fold: min-max bounds for the user
/// block and the TF-IDF vocabulary for the review block.
class FoldFeaturizer {
 public:
  static FoldFeaturizer fit(std::span<const std::vector<double>> user_rows,
                            std::span<const TokenList> docs, GroupSet groups, int ngram,
                            std::size_t min_df);

  SparseMatrix transform(std::span<const std::vector<double>> user_rows,
                         std::span<const TokenList> docs) const;

  std::size_t dimension() const;
  const std::optional<MinMaxScaler>& scaler() const { return scaler_; }
  const std::optional<TfidfVectorizer>& vectorizer() const { return vectorizer_; }

 private:
  std::optional<MinMaxScaler> scaler_;
  std::optional<TfidfVectorizer> vectorizer_;
  std::size_t user_dimension_ = 0;
};

struct GridSpec {
  std::vector<City> cities;
  std::vector<GroupSet> group_sets;
  std::vector<AlgorithmSpec> algorithms;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int ngram = 2;
  std::size_t min_df = 2;
};

inline constexpr std::string_view kPooledScope = "All";

struct ExperimentResult {
  std::string city;  // city name or "All"
  GroupSet groups;
  Algorithm algorithm = Algorithm::LogisticRegression;
  std::uint64_t fold_seed = 0;
  std::uint64_t model_seed = 0;
  std::vector<BinaryScores> folds;
  double mean_f1 = 0.0;
};

struct ScopePlan {
  std::string city;
  std::vector<std::size_t> examples;  // dataset indices
  std::uint64_t fold_seed = 0;
  FoldPlan plan;                      // over positions in `examples`
};

struct ExperimentTable {
  std::vector<ExperimentResult> rows;
  std::vector<ScopePlan> scopes;
};

/// Scopes are the pooled "All" row (only when more than one city is
/// requested) followed by each city; rows are ordered scope, group set,
/// algorithm. Seeds derive from cell coordinates, never from scheduling.
ExperimentTable run_experiment_grid(const Dataset& dataset, const GridSpec& spec);

void write_results_csv(std::ostream& out, std::span<const ExperimentResult> rows);
void write_summary_csv(std::ostream& out, std::span<const ExperimentResult> rows);
std::string experiment_report_json(const ExperimentTable& table, const GridSpec& spec);

}  // namespace f3
