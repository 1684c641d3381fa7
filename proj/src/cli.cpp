#include "f3/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "f3/corpus.hpp"
#include "f3/eval.hpp"
#include "f3/features.hpp"
#include "f3/learn.hpp"
#include "f3/text.hpp"

namespace f3 {

namespace fs = std::filesystem;

// --- summary tables -------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<SummaryRow> read_summary_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open score table '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty score table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  auto column = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(1, std::string("score table lacks column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_city = column("city"), c_groups = column("groups"), c_algo = column("algorithm"),
             c_f1 = column("mean_f1");
  std::vector<SummaryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError(line_no, fmt::format("expected {} cells, found {}", header.size(), cells.size()));
    SummaryRow row{cells[c_city], cells[c_groups], cells[c_algo], 0.0};
    try {
      std::size_t used = 0;
      row.mean_f1 = std::stod(cells[c_f1], &used);
      if (used != cells[c_f1].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(line_no, "mean_f1 is not a number: '" + cells[c_f1] + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ScoreTable pivot_scores(const std::vector<SummaryRow>& rows, bool include_pooled,
                        const std::string& groups_filter) {
  std::vector<std::pair<std::string, std::string>> cells;
  std::vector<std::string> methods;
  std::map<std::pair<std::size_t, std::size_t>, double> value;
  std::string filter;
  if (!groups_filter.empty()) filter = GroupSet::parse(groups_filter).to_string();
  for (const auto& r : rows) {
    if (!include_pooled && r.city == kPooledScope) continue;
    if (!filter.empty() && GroupSet::parse(r.groups).to_string() != filter) continue;
    auto key = std::make_pair(r.city, r.groups);
    auto ci = std::find(cells.begin(), cells.end(), key);
    if (ci == cells.end()) ci = cells.insert(cells.end(), key);
    auto mi = std::find(methods.begin(), methods.end(), r.algorithm);
    if (mi == methods.end()) mi = methods.insert(methods.end(), r.algorithm);
    auto slot = std::make_pair(static_cast<std::size_t>(ci - cells.begin()),
                               static_cast<std::size_t>(mi - methods.begin()));
    if (!value.emplace(slot, r.mean_f1).second)
      throw Error("score table repeats (" + r.city + ", " + r.groups + ", " + r.algorithm + ")");
  }
  bool several_groups = false;
  for (const auto& c : cells) several_groups = several_groups || c.second != cells.front().second;

  ScoreTable t;
  t.methods = methods;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    t.datasets.push_back(several_groups ? cells[i].first + "[" + cells[i].second + "]" : cells[i].first);
    std::vector<double> row;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      auto it = value.find({i, m});
      if (it == value.end())
        throw Error("score table has no " + methods[m] + " score for " + t.datasets.back());
      row.push_back(it->second);
    }
    t.scores.push_back(std::move(row));
  }
  return t;
}

// --- command plumbing -----------------------------------------------------

namespace {

/// Output files held in memory and written together; a failed commit removes
/// whatever it already wrote.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
  }

  void commit() {
    fs::create_directories(dir_);
    std::vector<fs::path> written;
    try {
      for (const auto& [name, content] : files_) {
        fs::path target = dir_ / name;
        fs::path tmp = target;
        tmp += ".tmp";
        {
          std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
          if (!out) throw Error("cannot write '" + tmp.string() + "'");
          out << content;
          out.flush();
          if (!out) throw Error("write failed for '" + tmp.string() + "'");
        }
        written.push_back(tmp);
        fs::rename(tmp, target);
        written.back() = target;
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<City> parse_cities(const std::vector<std::string>& names) {
  std::vector<City> out;
  for (const auto& n : names) {
    auto c = parse_city(n);
    if (!c) throw CLI::ValidationError("--city", "unknown city '" + n + "'");
    if (std::find(out.begin(), out.end(), *c) == out.end()) out.push_back(*c);
  }
  return out;
}

std::vector<CitySize> synth_sizes(const std::vector<City>& cities, std::optional<std::int64_t> per_class) {
  std::vector<CitySize> out;
  for (const auto& s : reference_city_sizes()) {
    if (!cities.empty() && std::find(cities.begin(), cities.end(), s.city) == cities.end()) continue;
    CitySize size = s;
    if (per_class) size.trustful = size.fake = *per_class;
    out.push_back(size);
  }
  return out;
}

std::string csv_number(double v) { return fmt::format("{:.10g}", v); }

struct SynthOptions {
  std::uint64_t seed = 0;
  std::vector<std::string> cities;
  std::int64_t per_class = -1;
  std::string out;
};

struct FeaturizeOptions {
  std::string data;
  std::string groups = "P,S,RA,T";
  int ngram = 2;
  std::size_t min_df = 2;
  std::string out;
};

struct ExperimentOptions {
  std::string data;
  std::uint64_t seed = 0;
  std::int64_t per_class = -1;
  std::vector<std::string> cities;
  std::vector<std::string> groups;
  bool subsets = false;
  std::vector<std::string> algos;
  std::size_t folds = 10;
  unsigned threads = 1;
  int ngram = 2;
  std::size_t min_df = 2;
  AlgorithmSpec hyper;
  std::string out;
};

struct StatsOptions {
  std::string scores;
  double alpha = 0.05;
  std::string control;
  std::string groups;
  bool include_pooled = false;
  std::string out;
};

struct ReportOptions {
  std::string summary;
  std::string data;
  double alpha = 0.05;
  std::size_t top_words = 5;
  std::string out;
};

Dataset experiment_dataset(const ExperimentOptions& o, const std::vector<City>& cities) {
  if (!o.data.empty()) return load_dataset(o.data);
  std::optional<std::int64_t> per_class;
  if (o.per_class >= 0) per_class = o.per_class;
  auto sizes = synth_sizes(cities, per_class);
  return synthesize_dataset(o.seed, sizes, reference_profile_stats());
}

StatsReport stats_from_summary(const std::vector<SummaryRow>& rows, double alpha,
                               const std::string& control, const std::string& groups,
                               bool include_pooled) {
  auto table = pivot_scores(rows, include_pooled, groups);
  if (table.datasets.empty()) throw Error("score table has no rows to compare");
  std::optional<std::size_t> control_index;
  if (!control.empty()) {
    auto it = std::find(table.methods.begin(), table.methods.end(), control);
    if (it == table.methods.end()) throw Error("control method '" + control + "' not in score table");
    control_index = static_cast<std::size_t>(it - table.methods.begin());
  }
  return compare_methods(table.methods, table.datasets, table.scores, alpha, control_index);
}

void run_synth(const SynthOptions& o, const std::string& config, std::ostream& out) {
  auto cities = parse_cities(o.cities);
  std::optional<std::int64_t> per_class;
  if (o.per_class >= 0) per_class = o.per_class;
  auto dataset = synthesize_dataset(o.seed, synth_sizes(cities, per_class), reference_profile_stats());
  std::ostringstream file;
  write_dataset(dataset, file);
  OutputSet outputs(o.out);
  outputs.add("dataset.jsonl", file.str());
  outputs.add("config.ini", config);
  outputs.commit();
  out << fmt::format("synthesized {} reviews ({} trustful, {} fake) -> {}\n", dataset.size(),
                     dataset.count(Label::Trustful), dataset.count(Label::Fake),
                     (fs::path(o.out) / "dataset.jsonl").string());
}

void run_featurize(const FeaturizeOptions& o, const std::string& config, std::ostream& out) {
  auto dataset = load_dataset(o.data);
  auto groups = GroupSet::parse(o.groups);
  OutputSet outputs(o.out);

  std::vector<FeatureInfo> manifest;
  for (const auto& f : user_feature_manifest()) {
    if (groups.contains(f.group)) manifest.push_back(f);
  }
  std::ostringstream csv;
  csv << "review_id,city,label";
  for (const auto& f : manifest) csv << ',' << f.name;
  csv << '\n';
  if (groups.has_user_groups()) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto& r = dataset.review(i);
      csv << r.review_id << ',' << to_string(r.city) << ',' << to_string(r.label);
      for (double v : extract_f3(dataset.profile(i), groups).values) csv << ',' << csv_number(v);
      csv << '\n';
    }
  }
  outputs.add("features.csv", csv.str());

  if (groups.contains(FeatureGroup::ReviewCentric)) {
    // Whole-dataset vocabulary: for inspection only; experiments refit per fold.
    std::vector<TokenList> docs;
    for (const auto& r : dataset.reviews()) docs.push_back(tokenize(r.text));
    auto [vocab, vectors] = tfidf_fit_transform(docs, o.ngram, o.min_df);
    std::ostringstream svm, terms;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      svm << class_index(dataset.review(i).label);
      for (const auto& e : vectors[i]) svm << ' ' << e.index << ':' << csv_number(e.weight);
      svm << '\n';
    }
    for (std::size_t t = 0; t < vocab.size(); ++t) {
      terms << t << '\t' << vocab.term(t) << '\t' << vocab.document_frequency(t) << '\t'
            << csv_number(vocab.idf(t)) << '\n';
    }
    outputs.add("review_tfidf.svm", svm.str());
    outputs.add("vocabulary.tsv", terms.str());
  }
  std::ostringstream man;
  write_feature_manifest(man, manifest);
  outputs.add("features.manifest", man.str());
  outputs.add("config.ini", config);
  outputs.commit();
  out << fmt::format("featurized {} reviews with groups {} -> {}\n", dataset.size(), groups.to_string(),
                     o.out);
}

void run_experiment(const ExperimentOptions& o, const std::string& config, std::ostream& out) {
  GridSpec grid;
  grid.cities = parse_cities(o.cities);
  for (const auto& g : o.groups) grid.group_sets.push_back(GroupSet::parse(g));
  if (o.subsets) {
    for (const auto& g : GroupSet::user_subsets()) {
      if (std::find(grid.group_sets.begin(), grid.group_sets.end(), g) == grid.group_sets.end())
        grid.group_sets.push_back(g);
    }
  }
  if (grid.group_sets.empty()) grid.group_sets.push_back(GroupSet::all_user());
  std::vector<std::string> algos = o.algos;
  if (algos.empty()) {
    for (auto a : kAllAlgorithms) algos.emplace_back(algorithm_code(a));
  }
  for (const auto& code : algos) {
    auto a = parse_algorithm(code);
    if (!a) throw CLI::ValidationError("--algo", "unknown algorithm '" + code + "'");
    AlgorithmSpec spec = o.hyper;
    spec.algorithm = *a;
    spec.validate();
    grid.algorithms.push_back(spec);
  }
  grid.folds = o.folds;
  grid.seed = o.seed;
  grid.threads = o.threads;
  grid.ngram = o.ngram;
  grid.min_df = o.min_df;

  auto dataset = experiment_dataset(o, grid.cities);
  if (grid.cities.empty()) {
    for (auto c : kAllCities) {
      if (dataset.count(c) > 0) grid.cities.push_back(c);
    }
  }
  auto table = run_experiment_grid(dataset, grid);

  std::ostringstream results, summary;
  write_results_csv(results, table.rows);
  write_summary_csv(summary, table.rows);
  OutputSet outputs(o.out);
  outputs.add("results.csv", results.str());
  outputs.add("summary.csv", summary.str());
  outputs.add("experiment.json", experiment_report_json(table, grid));
  outputs.add("config.ini", config);
  outputs.commit();
  for (const auto& r : table.rows) {
    out << fmt::format("{:<13} {:<12} {:<4} mean F1 {:.4f}\n", r.city, r.groups.to_string(),
                       algorithm_code(r.algorithm), r.mean_f1);
  }
}

void run_stats(const StatsOptions& o, const std::string& config, std::ostream& out) {
  auto report = stats_from_summary(read_summary_csv(o.scores), o.alpha, o.control, o.groups,
                                   o.include_pooled);
  auto text = render_stats_text(report);
  OutputSet outputs(o.out);
  outputs.add("stats.json", stats_report_json(report));
  outputs.add("stats.txt", text);
  outputs.add("config.ini", config);
  outputs.commit();
  out << text;
}

std::string render_summary_pivot(const std::vector<SummaryRow>& rows) {
  std::vector<std::pair<std::string, std::string>> cells;
  std::vector<std::string> methods;
  std::map<std::pair<std::pair<std::string, std::string>, std::string>, double> value;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.city, r.groups);
    if (std::find(cells.begin(), cells.end(), key) == cells.end()) cells.push_back(key);
    if (std::find(methods.begin(), methods.end(), r.algorithm) == methods.end()) methods.push_back(r.algorithm);
    value[{key, r.algorithm}] = r.mean_f1;
  }
  std::string s = fmt::format("{:<14}{:<14}", "city", "features");
  for (const auto& m : methods) s += fmt::format("{:>8}", m);
  s += '\n';
  for (const auto& c : cells) {
    s += fmt::format("{:<14}{:<14}", c.first, c.second);
    for (const auto& m : methods) {
      auto it = value.find({c, m});
      s += it == value.end() ? fmt::format("{:>8}", "-") : fmt::format("{:>8.3f}", it->second);
    }
    s += '\n';
  }
  return s;
}

void run_report(const ReportOptions& o, const std::string& config, std::ostream& out) {
  auto rows = read_summary_csv(o.summary);
  std::string text = "Mean F-score per cell (averaged over cross-validation folds)\n\n";
  text += render_summary_pivot(rows);

  std::vector<std::string> group_sets;
  for (const auto& r : rows) {
    if (std::find(group_sets.begin(), group_sets.end(), r.groups) == group_sets.end())
      group_sets.push_back(r.groups);
  }
  for (const auto& g : group_sets) {
    text += "\n== Statistical comparison, features " + g + " ==\n";
    try {
      auto report = stats_from_summary(rows, o.alpha, "", g, false);
      if (report.ranks.datasets() < 2) {
        text += "(needs at least two datasets)\n";
        continue;
      }
      text += render_stats_text(report);
    } catch (const std::exception& e) {
      text += std::string("(not computed: ") + e.what() + ")\n";
    }
  }

  if (!o.data.empty()) {
    auto dataset = load_dataset(o.data);
    text += fmt::format("\n== {} most frequent words by city and class ==\n", o.top_words);
    for (auto c : kAllCities) {
      if (dataset.count(c) == 0) continue;
      auto trust = frequent_terms(dataset, c, Label::Trustful, o.top_words);
      auto fake = frequent_terms(dataset, c, Label::Fake, o.top_words);
      for (std::size_t i = 0; i < std::max(trust.size(), fake.size()); ++i) {
        text += fmt::format("{:<14}{:<16}{:<16}\n", i == 0 ? std::string(to_string(c)) : "",
                            i < trust.size() ? trust[i].term : "", i < fake.size() ? fake[i].term : "");
      }
    }
  }
  OutputSet outputs(o.out);
  outputs.add("report.txt", text);
  outputs.add("config.ini", config);
  outputs.commit();
  out << text;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

/// Replaces `--config PATH` with the file's key=value pairs as flags, placed
/// after the subcommand. Keys also given explicitly are left to the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::size_t> at;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      at = i;
      path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      at = i;
      path = args[i].substr(9);
      break;
    }
  }
  if (!at) return args;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i == *at) {
      if (args[i] == "--config") ++i;
      continue;
    }
    rest.push_back(args[i]);
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  auto items = CLI::ConfigINI().from_config(in);

  std::vector<std::string> injected;
  for (const auto& item : items) {
    if (!item.parents.empty() || item.name == "++" || item.name == "--") continue;
    if (item.name == "config") throw Error("config file '" + path + "' may not name another config");
    if (given_on_command_line(rest, item.name)) continue;
    for (const auto& v : item.inputs) {
      if (v.empty()) continue;  // unset option
      injected.push_back("--" + item.name + "=" + v);
    }
  }
  // first positional token is the subcommand
  auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
  if (sub == rest.end()) throw Error("--config needs a subcommand");
  rest.insert(sub + 1, injected.begin(), injected.end());
  return rest;
}

}  // namespace

int execute_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"F3 fake-review detection pipeline", "f3"};
  app.require_subcommand(1);

  auto configured = [](CLI::App* sub) {
    // expanded into flags by expand_config before parsing
    sub->add_option("--config", "Flat key=value configuration file; flags override it")->configurable(false);
  };

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Synthesize a labeled dataset");
  configured(c_synth);
  c_synth->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  c_synth->add_option("--city", synth.cities, "City to include (repeatable; default all)");
  c_synth->add_option("--per-class", synth.per_class, "Reviews per class per city (default: reference sizes)")
      ->check(CLI::Range(std::int64_t{-1}, std::int64_t{100000000}));
  c_synth->add_option("--out", synth.out, "Output directory")->required();

  FeaturizeOptions feat;
  auto* c_feat = app.add_subcommand("featurize", "Write feature matrices and manifest");
  configured(c_feat);
  c_feat->add_option("--data", feat.data, "Dataset file")->required();
  c_feat->add_option("--groups", feat.groups, "Feature groups, comma list of P,S,RA,T,R")->capture_default_str();
  c_feat->add_option("--ngram", feat.ngram, "Review n-gram order (1 or 2)")->check(CLI::Range(1, 2))->capture_default_str();
  c_feat->add_option("--min-df", feat.min_df, "Minimum document frequency")->capture_default_str();
  c_feat->add_option("--out", feat.out, "Output directory")->required();

  ExperimentOptions exp;
  auto* c_exp = app.add_subcommand("experiment", "Run the cross-validated experiment grid");
  configured(c_exp);
  c_exp->add_option("--data", exp.data, "Dataset file (default: synthesize from --seed)");
  c_exp->add_option("--seed", exp.seed, "Random seed")->capture_default_str();
  c_exp->add_option("--per-class", exp.per_class, "Synthetic reviews per class per city")
      ->check(CLI::Range(std::int64_t{-1}, std::int64_t{100000000}));
  c_exp->add_option("--city", exp.cities, "City (repeatable; default every city in the data)");
  c_exp->add_option("--groups", exp.groups, "Feature group set, comma list (repeatable)");
  c_exp->add_flag("--subsets", exp.subsets, "Add all 15 user-centric group subsets");
  c_exp->add_option("--algo", exp.algos, "Algorithm LR|DT|RF|GNB|AB (repeatable; default all)");
  c_exp->add_option("--folds", exp.folds, "Cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
  c_exp->add_option("--threads", exp.threads, "Worker threads")->check(CLI::Range(1, 256))->capture_default_str();
  c_exp->add_option("--ngram", exp.ngram, "Review n-gram order")->check(CLI::Range(1, 2))->capture_default_str();
  c_exp->add_option("--min-df", exp.min_df, "Minimum document frequency")->capture_default_str();
  c_exp->add_option("--lr-rate", exp.hyper.logistic.learning_rate, "LR learning rate")->capture_default_str();
  c_exp->add_option("--lr-epochs", exp.hyper.logistic.epochs, "LR epochs")->capture_default_str();
  c_exp->add_option("--lr-l2", exp.hyper.logistic.l2, "LR L2 strength")->capture_default_str();
  c_exp->add_option("--gnb-var-smoothing", exp.hyper.naive_bayes.var_smoothing, "GNB variance floor fraction")
      ->capture_default_str();
  c_exp->add_option("--rf-trees", exp.hyper.forest.trees, "Random forest size")->capture_default_str();
  c_exp->add_option("--ab-estimators", exp.hyper.boost.estimators, "AdaBoost stumps")->capture_default_str();
  c_exp->add_option("--out", exp.out, "Output directory")->required();

  StatsOptions st;
  auto* c_stats = app.add_subcommand("stats", "Friedman, Nemenyi and Holm tests on a summary table");
  configured(c_stats);
  c_stats->add_option("--scores", st.scores, "Summary CSV (city,groups,algorithm,...,mean_f1)")->required();
  c_stats->add_option("--alpha", st.alpha, "Significance level")->capture_default_str();
  c_stats->add_option("--control", st.control, "Holm control algorithm (default: worst ranked)");
  c_stats->add_option("--groups", st.groups, "Only rows with this feature group set");
  c_stats->add_flag("--include-pooled", st.include_pooled, "Treat the pooled All row as a dataset");
  c_stats->add_option("--out", st.out, "Output directory")->required();

  ReportOptions rep;
  auto* c_rep = app.add_subcommand("report", "Render a combined human-readable summary");
  configured(c_rep);
  c_rep->add_option("--summary", rep.summary, "Summary CSV from an experiment run")->required();
  c_rep->add_option("--data", rep.data, "Dataset file for the frequent-word table");
  c_rep->add_option("--alpha", rep.alpha, "Significance level")->capture_default_str();
  c_rep->add_option("--top-words", rep.top_words, "Words per city and class")->capture_default_str();
  c_rep->add_option("--out", rep.out, "Output directory")->required();

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args);
  } catch (const std::exception& e) {
    err << "f3: " << e.what() << '\n';
    return 2;
  }
  std::vector<const char*> argv;
  argv.reserve(expanded.size() + 1);
  static const char* kProgram = "f3";
  argv.push_back(kProgram);
  for (const auto& a : expanded) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (c_synth->parsed()) {
      run_synth(synth, c_synth->config_to_str(true, false), out);
    } else if (c_feat->parsed()) {
      run_featurize(feat, c_feat->config_to_str(true, false), out);
    } else if (c_exp->parsed()) {
      run_experiment(exp, c_exp->config_to_str(true, false), out);
    } else if (c_stats->parsed()) {
      run_stats(st, c_stats->config_to_str(true, false), out);
    } else if (c_rep->parsed()) {
      run_report(rep, c_rep->config_to_str(true, false), out);
    }
  } catch (const CLI::Error& e) {
    err << "f3: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "f3: invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "f3: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int execute_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return execute_command(args, out, err);
}

}  // namespace f3
