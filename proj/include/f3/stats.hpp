#pragma once

#include <optional>
#include <string>
#include <vector>

namespace f3 {

/// Scores of k methods on N datasets and their tie-averaged ranks
/// (rank 1 = highest score).
struct RankMatrix {
  std::vector<std::vector<double>> scores;
  std::vector<std::vector<double>> ranks;
  std::vector<double> average;

  std::size_t datasets() const { return scores.size(); }
  std::size_t methods() const { return average.size(); }
};

RankMatrix tie_average_ranks(const std::vector<std::vector<double>>& scores);

struct FriedmanResult {
  std::size_t datasets = 0;
  std::size_t methods = 0;
  double alpha = 0.05;
  double chi_square = 0.0;
  /// Friedman F; +infinity when chi_square reaches N(k - 1).
  double f_statistic = 0.0;
  bool f_unbounded = false;
  double f_critical = 0.0;  // F(k-1, (k-1)(N-1)) upper-alpha quantile
  bool reject = false;
};

FriedmanResult friedman_test(const RankMatrix& ranks, double alpha);

/// Two-tailed Studentized-range based q_alpha for k in [2, 10], alpha 0.05 or 0.10.
double nemenyi_q(std::size_t k, double alpha);
double nemenyi_cd(std::size_t k, std::size_t n, double alpha);

struct PairwiseDifference {
  std::size_t first = 0;
  std::size_t second = 0;
  double difference = 0.0;  // |R_first - R_second|
  bool significant = false;
};

std::vector<PairwiseDifference> nemenyi_pairs(const RankMatrix& ranks, double cd);

struct HolmStep {
  std::size_t method = 0;
  double z = 0.0;
  double p = 0.0;
  double adjusted_alpha = 0.0;
  bool reject = false;
};

struct HolmResult {
  std::size_t control = 0;
  std::vector<HolmStep> steps;  // ascending p
};

HolmResult holm_stepdown(const RankMatrix& ranks, std::size_t control, double alpha);

/// Index of the method with the largest average rank (first on ties).
std::size_t worst_ranked(const RankMatrix& ranks);

struct PosthocResult {
  double critical_difference = 0.0;
  std::vector<PairwiseDifference> pairs;
  HolmResult holm;
};

// --- numeric kernels ------------------------------------------------------

double normal_cdf(double z);
/// I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
double f_cdf(double x, double d1, double d2);
/// Inverse of f_cdf by bisection (absolute tolerance 1e-9).
double f_quantile(double p, double d1, double d2);

// --- report ---------------------------------------------------------------

struct StatsReport {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  RankMatrix ranks;
  FriedmanResult friedman;
  PosthocResult posthoc;
};

/// Full comparison: ranks, Friedman, Nemenyi and Holm. The Holm control
/// defaults to the worst-ranked method.
StatsReport compare_methods(std::vector<std::string> methods, std::vector<std::string> datasets,
                            const std::vector<std::vector<double>>& scores, double alpha,
                            std::optional<std::size_t> control = std::nullopt);

std::string stats_report_json(const StatsReport& report);
std::string render_stats_text(const StatsReport& report);

}  // namespace f3
