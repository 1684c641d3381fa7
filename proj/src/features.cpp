#include "f3/features.hpp"

#include <algorithm>
#include <bit>
#include <ostream>

namespace f3 {

std::string_view group_code(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Personal: return "P";
    case FeatureGroup::Social: return "S";
    case FeatureGroup::ReviewActivity: return "RA";
    case FeatureGroup::Trust: return "T";
    case FeatureGroup::ReviewCentric: return "R";
  }
  return "?";
}

GroupSet GroupSet::parse(std::string_view text) {
  GroupSet set;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find_first_of(",+", pos);
    if (end == std::string_view::npos) end = text.size();
    auto code = text.substr(pos, end - pos);
    while (!code.empty() && code.front() == ' ') code.remove_prefix(1);
    while (!code.empty() && code.back() == ' ') code.remove_suffix(1);
    if (!code.empty()) {
      bool found = false;
      for (int g = 0; g <= static_cast<int>(FeatureGroup::ReviewCentric); ++g) {
        if (group_code(static_cast<FeatureGroup>(g)) == code) {
          set.insert(static_cast<FeatureGroup>(g));
          found = true;
        }
      }
      if (!found) throw std::invalid_argument("unknown feature group '" + std::string(code) + "'");
    }
    pos = end + 1;
  }
  if (set.empty()) throw std::invalid_argument("empty feature group set '" + std::string(text) + "'");
  return set;
}

std::vector<GroupSet> GroupSet::user_subsets() {
  std::vector<GroupSet> out;
  for (unsigned mask = 1; mask < 16; ++mask) {
    GroupSet s;
    s.bits_ = static_cast<std::uint8_t>(mask);
    out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const GroupSet& a, const GroupSet& b) { return a.size() < b.size(); });
  return out;
}

std::size_t GroupSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<FeatureGroup> GroupSet::groups() const {
  std::vector<FeatureGroup> out;
  for (int g = 0; g <= static_cast<int>(FeatureGroup::ReviewCentric); ++g) {
    if (contains(static_cast<FeatureGroup>(g))) out.push_back(static_cast<FeatureGroup>(g));
  }
  return out;
}

std::string GroupSet::to_string() const {
  std::string out;
  for (auto g : groups()) {
    if (!out.empty()) out += '+';
    out += group_code(g);
  }
  return out;
}

std::span<const FeatureInfo> user_feature_manifest() {
  using G = FeatureGroup;
  static const std::vector<FeatureInfo> kFeatures = {
      {"profile_description", G::Personal},
      {"bookmark_lists", G::Personal},
      {"lists", G::Personal},
      {"review_updates", G::Personal},
      {"friends_friends", G::Social},
      {"friends_reviews", G::Social},
      {"has_photo", G::Social},
      {"followers", G::Social},
      {"friends", G::Social},
      {"votes_cool", G::Social},
      {"votes_useful", G::Social},
      {"votes_funny", G::Social},
      {"review_count", G::ReviewActivity},
      {"share_5_stars", G::ReviewActivity},
      {"share_4_stars", G::ReviewActivity},
      {"share_3_stars", G::ReviewActivity},
      {"share_2_stars", G::ReviewActivity},
      {"share_1_star", G::ReviewActivity},
      {"average_rating", G::ReviewActivity},
      {"photos", G::Trust},
      {"tips", G::Trust},
  };
  return kFeatures;
}

void write_feature_manifest(std::ostream& out, std::span<const FeatureInfo> features) {
  out << "# f3 feature manifest v1\n";
  for (std::size_t i = 0; i < features.size(); ++i) {
    out << i << '\t' << features[i].name << '\t' << group_code(features[i].group) << '\n';
  }
}

namespace {

std::array<double, kProfileFieldCount> raw_user_features(const UserProfileRecord& u) {
  std::array<double, kProfileFieldCount> v{};
  auto d = [](auto x) { return static_cast<double>(x); };
  v[0] = u.has_profile_description ? 1.0 : 0.0;
  v[1] = d(u.bookmark_lists);
  v[2] = d(u.lists);
  v[3] = d(u.review_updates);
  v[4] = u.friends_mean_friends;
  v[5] = u.friends_mean_reviews;
  v[6] = u.has_photo ? 1.0 : 0.0;
  v[7] = d(u.followers);
  v[8] = d(u.friends);
  v[9] = d(u.votes_cool);
  v[10] = d(u.votes_useful);
  v[11] = d(u.votes_funny);
  v[12] = d(u.review_count);
  if (u.review_count > 0) {
    double total = d(u.review_count);
    double weighted = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      v[13 + i] = d(u.rating_hist[i]) / total;
      weighted += d(5 - static_cast<int>(i)) * d(u.rating_hist[i]);
    }
    v[18] = weighted / total;
  }
  v[19] = d(u.photos);
  v[20] = d(u.tips);
  return v;
}

}  // namespace

F3Vector extract_f3(const UserProfileRecord& profile, GroupSet groups) {
  if (groups.empty()) throw std::invalid_argument("extract_f3: empty group set");
  auto raw = raw_user_features(profile);
  auto manifest = user_feature_manifest();
  F3Vector out;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!groups.contains(manifest[i].group)) continue;
    out.values.push_back(raw[i]);
    out.groups.push_back(manifest[i].group);
    out.names.push_back(manifest[i].name);
  }
  return out;
}

void append_review_centric(F3Vector& vector, const SparseVector& tfidf, const Vocabulary& vocab) {
  const std::size_t base = vector.values.size();
  vector.values.resize(base + vocab.size(), 0.0);
  vector.groups.resize(base + vocab.size(), FeatureGroup::ReviewCentric);
  vector.names.reserve(base + vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) vector.names.push_back("tfidf:" + vocab.term(i));
  for (const auto& e : tfidf) {
    if (e.index >= vocab.size()) throw std::invalid_argument("tfidf index outside vocabulary");
    vector.values[base + e.index] = e.weight;
  }
}

MinMaxScaler MinMaxScaler::fit(std::span<const std::vector<double>> training) {
  if (training.empty()) throw std::invalid_argument("minmax_fit: no training vectors");
  MinMaxScaler s;
  s.min_ = training.front();
  s.max_ = training.front();
  for (const auto& x : training) {
    if (x.size() != s.min_.size()) throw std::invalid_argument("minmax_fit: ragged vectors");
    for (std::size_t i = 0; i < x.size(); ++i) {
      s.min_[i] = std::min(s.min_[i], x[i]);
      s.max_[i] = std::max(s.max_[i], x[i]);
    }
  }
  return s;
}

std::vector<double> MinMaxScaler::apply(std::span<const double> x) const {
  if (x.size() != min_.size())
    throw std::invalid_argument("minmax_apply: dimension " + std::to_string(x.size()) +
                                " does not match fitted " + std::to_string(min_.size()));
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double range = max_[i] - min_[i];
    if (range > 0.0) out[i] = std::clamp((x[i] - min_[i]) / range, 0.0, 1.0);
  }
  return out;
}

}  // namespace f3
