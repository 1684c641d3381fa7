#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "f3/stats.hpp"

namespace f3 {

/// Runs one batch command (synth | featurize | experiment | stats | report).
/// Returns the process exit status; diagnostics go to `err`.
int execute_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int execute_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// One row of a summary table: mean F1 of an algorithm on a (city, groups) cell.
struct SummaryRow {
  std::string city;
  std::string groups;
  std::string algorithm;
  double mean_f1 = 0.0;
};

/// Reads a summary CSV (columns city, groups, algorithm, mean_f1; others ignored).
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

struct ScoreTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  std::vector<std::vector<double>> scores;
};

/// Datasets are (city, groups) cells in first-seen order, methods the
/// algorithms in first-seen order. The pooled "All" scope is skipped unless
/// `include_pooled`. Every cell must score every algorithm.
ScoreTable pivot_scores(const std::vector<SummaryRow>& rows, bool include_pooled,
                        const std::string& groups_filter = "");

}  // namespace f3
