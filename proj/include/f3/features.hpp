#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "f3/corpus.hpp"
#include "f3/text.hpp"

namespace f3 {

enum class FeatureGroup : int { Personal, Social, ReviewActivity, Trust, ReviewCentric };

inline constexpr std::array<FeatureGroup, 4> kUserGroups = {
    FeatureGroup::Personal, FeatureGroup::Social, FeatureGroup::ReviewActivity,
    FeatureGroup::Trust};

/// Short code used in flags and result tables: P, S, RA, T, R.
std::string_view group_code(FeatureGroup g);

/// Set of feature groups; iteration order is the canonical P, S, RA, T, R.
class GroupSet {
 public:
  constexpr GroupSet() = default;
  constexpr GroupSet(std::initializer_list<FeatureGroup> groups) {
    for (auto g : groups) insert(g);
  }

  static GroupSet all_user() { return {FeatureGroup::Personal, FeatureGroup::Social,
                                       FeatureGroup::ReviewActivity, FeatureGroup::Trust}; }

  /// Parses "P,S,RA,T,R" (comma or '+' separated, any order).
  static GroupSet parse(std::string_view text);

  /// All 15 nonempty subsets of the user-centric groups, smallest first.
  static std::vector<GroupSet> user_subsets();

  constexpr void insert(FeatureGroup g) { bits_ |= bit(g); }
  constexpr bool contains(FeatureGroup g) const { return (bits_ & bit(g)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  bool has_user_groups() const { return (bits_ & 0x0F) != 0; }
  std::size_t size() const;
  std::vector<FeatureGroup> groups() const;

  /// Canonical "P+S+RA+T" rendering.
  std::string to_string() const;

  constexpr bool operator==(const GroupSet&) const = default;

 private:
  static constexpr std::uint8_t bit(FeatureGroup g) {
    return static_cast<std::uint8_t>(1u << static_cast<int>(g));
  }
  std::uint8_t bits_ = 0;
};

struct FeatureInfo {
  std::string name;
  FeatureGroup group;
};

/// The 21 user-centric features in canonical order.
std::span<const FeatureInfo> user_feature_manifest();

/// Text manifest: a version line then "index<TAB>name<TAB>group" rows.
void write_feature_manifest(std::ostream& out, std::span<const FeatureInfo> features);

struct F3Vector {
  std::vector<double> values;
  std::vector<FeatureGroup> groups;
  std::vector<std::string> names;

  std::size_t size() const { return values.size(); }
};

/// User-centric features of the selected groups, in canonical order.
/// ReviewCentric in `groups` contributes nothing here; see append_review_centric.
F3Vector extract_f3(const UserProfileRecord& profile, GroupSet groups);

/// Appends the dense TF-IDF vector of a review after the user block.
void append_review_centric(F3Vector& vector, const SparseVector& tfidf, const Vocabulary& vocab);

/// Per-feature bounds learned from training vectors only.
class MinMaxScaler {
 public:
  static MinMaxScaler fit(std::span<const std::vector<double>> training);

  std::size_t dimension() const { return min_.size(); }
  double min(std::size_t i) const { return min_[i]; }
  double max(std::size_t i) const { return max_[i]; }

  /// (x - min) / (max - min), clamped to [0, 1]; constant features map to 0.
  std::vector<double> apply(std::span<const double> x) const;

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

}  // namespace f3
