#include "f3/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace f3 {

RankMatrix tie_average_ranks(const std::vector<std::vector<double>>& scores) {
  if (scores.empty()) throw std::invalid_argument("tie_average_ranks: no datasets");
  const std::size_t k = scores.front().size();
  if (k < 2) throw std::invalid_argument("tie_average_ranks: need at least two methods");
  RankMatrix m;
  m.scores = scores;
  m.average.assign(k, 0.0);
  for (const auto& row : scores) {
    if (row.size() != k) throw std::invalid_argument("tie_average_ranks: ragged score matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("tie_average_ranks: non-finite score");
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    std::vector<double> ranks(k);
    std::size_t i = 0;
    while (i < k) {
      std::size_t j = i;
      while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
      // Positions i..j (0-based) share the mean of ranks i+1..j+1.
      double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
      i = j + 1;
    }
    for (std::size_t c = 0; c < k; ++c) m.average[c] += ranks[c];
    m.ranks.push_back(std::move(ranks));
  }
  for (auto& r : m.average) r /= static_cast<double>(scores.size());
  return m;
}

FriedmanResult friedman_test(const RankMatrix& ranks, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("friedman_test: alpha must be in (0,1)");
  const auto n = static_cast<double>(ranks.datasets());
  const auto k = static_cast<double>(ranks.methods());
  if (ranks.datasets() < 1 || ranks.methods() < 2)
    throw std::invalid_argument("friedman_test: need N >= 1 and k >= 2");
  FriedmanResult r;
  r.datasets = ranks.datasets();
  r.methods = ranks.methods();
  r.alpha = alpha;
  double sum_sq = 0.0;
  for (double rj : ranks.average) sum_sq += rj * rj;
  r.chi_square = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
  if (std::abs(r.chi_square) < 1e-12) r.chi_square = 0.0;

  const double bound = n * (k - 1.0);
  const double d1 = k - 1.0, d2 = (k - 1.0) * (n - 1.0);
  r.f_critical = d2 > 0.0 ? f_quantile(1.0 - alpha, d1, d2) : std::numeric_limits<double>::infinity();
  if (r.chi_square >= bound - 1e-12 * bound) {
    r.f_statistic = std::numeric_limits<double>::infinity();
    r.f_unbounded = true;
    r.reject = d2 > 0.0;  // one dataset: no denominator df, nothing to test
  } else {
    r.f_statistic = (n - 1.0) * r.chi_square / (bound - r.chi_square);
    r.reject = r.f_statistic > r.f_critical;
  }
  return r;
}

double nemenyi_q(std::size_t k, double alpha) {
  // q_alpha for k = 2..10.
  static constexpr double kQ05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
  static constexpr double kQ10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};
  if (k < 2 || k > 10) throw std::invalid_argument(fmt::format("nemenyi: unsupported k={}", k));
  if (std::abs(alpha - 0.05) < 1e-12) return kQ05[k - 2];
  if (std::abs(alpha - 0.10) < 1e-12) return kQ10[k - 2];
  throw std::invalid_argument(fmt::format("nemenyi: unsupported alpha={}", alpha));
}

double nemenyi_cd(std::size_t k, std::size_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("nemenyi: N must be positive");
  const auto kd = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n)));
}

std::vector<PairwiseDifference> nemenyi_pairs(const RankMatrix& ranks, double cd) {
  std::vector<PairwiseDifference> out;
  for (std::size_t i = 0; i < ranks.methods(); ++i) {
    for (std::size_t j = i + 1; j < ranks.methods(); ++j) {
      double diff = std::abs(ranks.average[i] - ranks.average[j]);
      out.push_back({i, j, diff, diff >= cd});
    }
  }
  return out;
}

std::size_t worst_ranked(const RankMatrix& ranks) {
  return static_cast<std::size_t>(std::max_element(ranks.average.begin(), ranks.average.end()) -
                                  ranks.average.begin());
}

HolmResult holm_stepdown(const RankMatrix& ranks, std::size_t control, double alpha) {
  const std::size_t k = ranks.methods();
  if (control >= k) throw std::invalid_argument("holm_stepdown: control index out of range");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("holm_stepdown: alpha must be in (0,1)");
  const auto kd = static_cast<double>(k);
  const double se = std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(ranks.datasets())));
  HolmResult out;
  out.control = control;
  for (std::size_t j = 0; j < k; ++j) {
    if (j == control) continue;
    HolmStep s;
    s.method = j;
    s.z = (ranks.average[control] - ranks.average[j]) / se;
    s.p = std::erfc(std::abs(s.z) / std::sqrt(2.0));
    out.steps.push_back(s);
  }
  std::stable_sort(out.steps.begin(), out.steps.end(),
                   [](const HolmStep& a, const HolmStep& b) { return a.p < b.p; });
  bool still_rejecting = true;
  for (std::size_t i = 0; i < out.steps.size(); ++i) {
    auto& s = out.steps[i];
    s.adjusted_alpha = alpha / static_cast<double>(k - 1 - i);
    still_rejecting = still_rejecting && s.p < s.adjusted_alpha;
    s.reject = still_rejecting;
  }
  return out;
}

// --- numeric kernels ------------------------------------------------------

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double md = m, m2 = 2.0 * m;
    double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete beta: a and b must be positive");
  if (std::isnan(x)) return x;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_cdf(double x, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("f_cdf: degrees of freedom must be positive");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return regularized_incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

double f_quantile(double p, double d1, double d2) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("f_quantile: p must be in (0,1)");
  double lo = 0.0, hi = 1.0;
  while (f_cdf(hi, d1, d2) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > 1e-9) {
    double mid = lo + (hi - lo) / 2.0;
    if (f_cdf(mid, d1, d2) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2.0;
}

// --- report ---------------------------------------------------------------

StatsReport compare_methods(std::vector<std::string> methods, std::vector<std::string> datasets,
                            const std::vector<std::vector<double>>& scores, double alpha,
                            std::optional<std::size_t> control) {
  StatsReport r;
  r.ranks = tie_average_ranks(scores);
  if (methods.size() != r.ranks.methods() || datasets.size() != r.ranks.datasets())
    throw std::invalid_argument("compare_methods: name lists do not match the score matrix");
  r.methods = std::move(methods);
  r.datasets = std::move(datasets);
  r.friedman = friedman_test(r.ranks, alpha);
  r.posthoc.critical_difference = nemenyi_cd(r.ranks.methods(), r.ranks.datasets(), alpha);
  r.posthoc.pairs = nemenyi_pairs(r.ranks, r.posthoc.critical_difference);
  r.posthoc.holm = holm_stepdown(r.ranks, control.value_or(worst_ranked(r.ranks)), alpha);
  return r;
}

std::string stats_report_json(const StatsReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "f3-stats/1";
  j["alpha"] = r.friedman.alpha;
  j["methods"] = r.methods;
  j["datasets"] = r.datasets;
  auto& table = j["ranks"] = ordered_json::array();
  for (std::size_t i = 0; i < r.ranks.datasets(); ++i) {
    ordered_json row;
    row["dataset"] = r.datasets[i];
    row["scores"] = r.ranks.scores[i];
    row["ranks"] = r.ranks.ranks[i];
    table.push_back(std::move(row));
  }
  j["average_ranks"] = r.ranks.average;
  ordered_json fr;
  fr["N"] = r.friedman.datasets;
  fr["k"] = r.friedman.methods;
  fr["chi_square"] = r.friedman.chi_square;
  if (r.friedman.f_unbounded) {
    fr["f_statistic"] = "inf";
  } else {
    fr["f_statistic"] = r.friedman.f_statistic;
  }
  fr["df1"] = r.friedman.methods - 1;
  fr["df2"] = (r.friedman.methods - 1) * (r.friedman.datasets - 1);
  fr["f_critical"] = r.friedman.f_critical;
  fr["reject"] = r.friedman.reject;
  j["friedman"] = fr;
  ordered_json ne;
  ne["critical_difference"] = r.posthoc.critical_difference;
  auto& pairs = ne["pairs"] = ordered_json::array();
  for (const auto& p : r.posthoc.pairs) {
    ordered_json jp;
    jp["first"] = r.methods[p.first];
    jp["second"] = r.methods[p.second];
    jp["difference"] = p.difference;
    jp["significant"] = p.significant;
    pairs.push_back(std::move(jp));
  }
  j["nemenyi"] = ne;
  ordered_json ho;
  ho["control"] = r.methods[r.posthoc.holm.control];
  auto& steps = ho["steps"] = ordered_json::array();
  for (const auto& s : r.posthoc.holm.steps) {
    ordered_json js;
    js["method"] = r.methods[s.method];
    js["z"] = s.z;
    js["p"] = s.p;
    js["adjusted_alpha"] = s.adjusted_alpha;
    js["reject"] = s.reject;
    steps.push_back(std::move(js));
  }
  j["holm"] = ho;
  return j.dump(2) + "\n";
}

std::string render_stats_text(const StatsReport& r) {
  std::string out;
  auto line = [&](const std::string& s) { out += s + '\n'; };
  std::size_t width = 8;
  for (const auto& d : r.datasets) width = std::max(width, d.size() + 2);

  line("Classifier comparison over " + std::to_string(r.ranks.datasets()) + " datasets");
  std::string header = fmt::format("{:<{}}", "dataset", width);
  for (const auto& m : r.methods) header += fmt::format("{:>10}", m);
  line(header);
  for (std::size_t i = 0; i < r.ranks.datasets(); ++i) {
    std::string row = fmt::format("{:<{}}", r.datasets[i], width);
    for (std::size_t c = 0; c < r.ranks.methods(); ++c)
      row += fmt::format("{:>10}", fmt::format("{:.2f}({:g})", r.ranks.scores[i][c], r.ranks.ranks[i][c]));
    line(row);
  }
  std::string avg = fmt::format("{:<{}}", "avg rank", width);
  for (double a : r.ranks.average) avg += fmt::format("{:>10.3f}", a);
  line(avg);
  line("");

  const auto& f = r.friedman;
  line(fmt::format("Friedman: chi2_F = {:.4f} (df {}), F_F = {}, critical F({},{}) at alpha {:g} = {:.4f}",
                   f.chi_square, f.methods - 1,
                   f.f_unbounded ? std::string("inf") : fmt::format("{:.4f}", f.f_statistic),
                   f.methods - 1, (f.methods - 1) * (f.datasets - 1), f.alpha, f.f_critical));
  line(f.reject ? "  null hypothesis rejected: the methods do not perform equally"
                : "  null hypothesis retained");
  line("");

  line(fmt::format("Nemenyi: q_alpha = {:.3f}, CD = {:.4f}",
                   nemenyi_q(r.ranks.methods(), f.alpha), r.posthoc.critical_difference));
  bool any = false;
  for (const auto& p : r.posthoc.pairs) {
    if (!p.significant) continue;
    any = true;
    line(fmt::format("  {} vs {}: |diff| = {:.4f} >= CD, significant", r.methods[p.first],
                     r.methods[p.second], p.difference));
  }
  if (!any) line("  no pair differs by at least CD");
  line("");

  line("Holm step-down against " + r.methods[r.posthoc.holm.control] + ":");
  for (const auto& s : r.posthoc.holm.steps) {
    line(fmt::format("  {:<6} z = {:>8.4f}  p = {:.6f}  alpha/i = {:.6f}  {}", r.methods[s.method],
                     s.z, s.p, s.adjusted_alpha, s.reject ? "reject" : "retain"));
  }
  return out;
}

}  // namespace f3
