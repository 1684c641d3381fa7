#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "f3/learn.hpp"

namespace f3 {

std::size_t DecisionTree::leaf_for(const SparseMatrix::RowView& x) const {
  std::size_t node = 0;
  while (feature[node] >= 0) {
    double v = x.at(static_cast<std::uint32_t>(feature[node]));
    node = static_cast<std::size_t>(v <= threshold[node] ? left[node] : right[node]);
  }
  return node;
}

std::size_t DecisionTree::depth() const {
  if (feature.empty()) return 0;
  std::vector<std::size_t> level(feature.size(), 0);
  std::size_t deepest = 0;
  // Children always have larger ids than their parent.
  for (std::size_t n = 0; n < feature.size(); ++n) {
    deepest = std::max(deepest, level[n]);
    if (feature[n] >= 0) {
      level[static_cast<std::size_t>(left[n])] = level[n] + 1;
      level[static_cast<std::size_t>(right[n])] = level[n] + 1;
    }
  }
  return deepest;
}

namespace {

struct Entry {
  std::uint32_t col;
  double value;
  std::uint32_t row;
};

struct Split {
  std::uint32_t feature = 0;
  double threshold = 0.0;
  double score = -1.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const SparseMatrix& x, std::span<const Label> y, std::span<const double> w,
              const TreeParams& params, std::uint64_t seed)
      : x_(x), y_(y), w_(w), params_(params), rng_(seed) {
    const std::size_t d = x.cols();
    all_features_ = params.max_features == 0 || params.max_features >= d;
    if (!all_features_) selected_.assign(d, 0);
    row_value_.assign(x.rows(), 0.0);
    row_stamp_.assign(x.rows(), 0);
  }

  DecisionTree build() {
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      if (w_[r] > 0.0) rows_.push_back(static_cast<std::uint32_t>(r));
    }
    add_node();
    struct Task {
      std::size_t node, begin, end;
      int depth;
    };
    std::vector<Task> stack{{0, 0, rows_.size(), 0}};
    while (!stack.empty()) {
      Task t = stack.back();
      stack.pop_back();

      std::array<double, 2> total{0.0, 0.0};
      for (std::size_t i = t.begin; i < t.end; ++i) total[class_index(y_[rows_[i]])] += w_[rows_[i]];
      const double mass = total[0] + total[1];
      tree_.fake_share[t.node] = mass > 0.0 ? total[1] / mass : 0.0;

      const std::size_t n = t.end - t.begin;
      if (n < params_.min_samples_split || total[0] == 0.0 || total[1] == 0.0) continue;
      if (params_.max_depth > 0 && t.depth >= params_.max_depth) continue;

      auto split = best_split(t.begin, t.end, total);
      if (!split) continue;

      const std::uint32_t stamp = ++row_epoch_;
      for (const auto& e : entries_) {
        if (e.col == split->feature) {
          row_value_[e.row] = e.value;
          row_stamp_[e.row] = stamp;
        }
      }
      auto goes_left = [&](std::uint32_t r) {
        double v = row_stamp_[r] == stamp ? row_value_[r] : 0.0;
        return v <= split->threshold;
      };
      auto mid = std::stable_partition(rows_.begin() + static_cast<long>(t.begin),
                                       rows_.begin() + static_cast<long>(t.end), goes_left);
      const std::size_t mid_index = static_cast<std::size_t>(mid - rows_.begin());

      std::size_t l = add_node();
      std::size_t r = add_node();
      tree_.feature[t.node] = static_cast<std::int32_t>(split->feature);
      tree_.threshold[t.node] = split->threshold;
      tree_.left[t.node] = static_cast<std::int32_t>(l);
      tree_.right[t.node] = static_cast<std::int32_t>(r);
      stack.push_back({r, mid_index, t.end, t.depth + 1});
      stack.push_back({l, t.begin, mid_index, t.depth + 1});
    }
    return std::move(tree_);
  }

 private:
  std::size_t add_node() {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.fake_share.push_back(0.0);
    return tree_.feature.size() - 1;
  }

  void sample_features() {
    // Floyd's sampling of max_features distinct columns.
    const std::size_t d = x_.cols();
    const std::size_t k = params_.max_features;
    ++feature_epoch_;
    for (std::size_t j = d - k; j < d; ++j) {
      std::uniform_int_distribution<std::size_t> pick(0, j);
      std::size_t t = pick(rng_);
      if (selected_[t] == feature_epoch_) t = j;
      selected_[t] = feature_epoch_;
    }
  }

  std::optional<Split> best_split(std::size_t begin, std::size_t end,
                                  const std::array<double, 2>& total) {
    if (!all_features_) sample_features();
    entries_.clear();
    for (std::size_t i = begin; i < end; ++i) {
      auto r = rows_[i];
      auto view = x_.row(r);
      for (std::size_t k = 0; k < view.index.size(); ++k) {
        auto col = view.index[k];
        if (all_features_ || selected_[col] == feature_epoch_) entries_.push_back({col, view.value[k], r});
      }
    }
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      if (a.col != b.col) return a.col < b.col;
      if (a.value != b.value) return a.value < b.value;
      return a.row < b.row;
    });

    const std::size_t n = end - begin;
    Split best;
    bool found = false;
    std::size_t g = 0;
    while (g < entries_.size()) {
      std::size_t h = g;
      std::array<double, 2> nonzero{0.0, 0.0};
      while (h < entries_.size() && entries_[h].col == entries_[g].col) {
        nonzero[class_index(y_[entries_[h].row])] += w_[entries_[h].row];
        ++h;
      }
      const std::size_t zero_rows = n - (h - g);
      std::array<double, 2> zero{0.0, 0.0};
      if (zero_rows > 0) {
        zero = {std::max(0.0, total[0] - nonzero[0]), std::max(0.0, total[1] - nonzero[1])};
      }

      std::array<double, 2> left{0.0, 0.0};
      bool has_prev = false;
      double prev = 0.0;
      auto visit = [&](double value, double w0, double w1) {
        if (has_prev && value > prev) {
          const double l_mass = left[0] + left[1];
          const double r0 = total[0] - left[0], r1 = total[1] - left[1];
          const double r_mass = r0 + r1;
          if (l_mass > 0.0 && r_mass > 0.0) {
            double score = (left[0] * left[0] + left[1] * left[1]) / l_mass +
                           (r0 * r0 + r1 * r1) / r_mass;
            if (!found || score > best.score + 1e-12 * std::abs(best.score)) {
              double t = prev + (value - prev) / 2.0;
              if (!(t < value)) t = prev;
              best = {entries_[g].col, t, score};
              found = true;
            }
          }
        }
        left[0] += w0;
        left[1] += w1;
        prev = value;
        has_prev = true;
      };

      bool zero_done = zero_rows == 0;
      for (std::size_t k = g; k < h; ++k) {
        const auto& e = entries_[k];
        if (!zero_done && e.value > 0.0) {
          visit(0.0, zero[0], zero[1]);
          zero_done = true;
        }
        double wk = w_[e.row];
        if (y_[e.row] == Label::Fake) {
          visit(e.value, 0.0, wk);
        } else {
          visit(e.value, wk, 0.0);
        }
      }
      if (!zero_done) visit(0.0, zero[0], zero[1]);
      g = h;
    }
    if (!found) return std::nullopt;
    return best;
  }

  const SparseMatrix& x_;
  std::span<const Label> y_;
  std::span<const double> w_;
  TreeParams params_;
  std::mt19937_64 rng_;
  bool all_features_ = true;

  DecisionTree tree_;
  std::vector<std::uint32_t> rows_;
  std::vector<Entry> entries_;
  std::vector<std::uint32_t> selected_;
  std::uint32_t feature_epoch_ = 0;
  std::vector<double> row_value_;
  std::vector<std::uint32_t> row_stamp_;
  std::uint32_t row_epoch_ = 0;
};

}  // namespace

DecisionTree grow_tree(const SparseMatrix& x, std::span<const Label> y,
                       std::span<const double> sample_weight, const TreeParams& params,
                       std::uint64_t seed) {
  if (y.size() != x.rows() || sample_weight.size() != x.rows())
    throw std::invalid_argument("grow_tree: sample count mismatch");
  return TreeBuilder(x, y, sample_weight, params, seed).build();
}

}  // namespace f3
