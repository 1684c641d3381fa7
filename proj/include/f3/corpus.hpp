#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "f3/common.hpp"

namespace f3 {

struct ReviewRecord {
  std::string review_id;
  std::string business_id;
  std::string user_id;
  City city = City::NewYork;
  std::string text;
  int stars = 1;
  std::chrono::year_month_day date{};
  Label label = Label::Trustful;

  bool operator==(const ReviewRecord&) const = default;
};

/// Raw reviewer profile as scraped from the reviewer's page.
struct UserProfileRecord {
  std::string user_id;
  bool has_profile_description = false;
  std::int64_t bookmark_lists = 0;
  std::int64_t lists = 0;
  std::int64_t review_updates = 0;
  double friends_mean_friends = 0.0;
  double friends_mean_reviews = 0.0;
  bool has_photo = false;
  std::int64_t followers = 0;
  std::int64_t friends = 0;
  std::int64_t votes_cool = 0;
  std::int64_t votes_useful = 0;
  std::int64_t votes_funny = 0;
  std::int64_t review_count = 0;
  std::array<std::int64_t, 5> rating_hist{};  // 5 stars first, 1 star last
  std::int64_t photos = 0;
  std::int64_t tips = 0;

  bool operator==(const UserProfileRecord&) const = default;
};

enum class Provenance { Ingested, Synthetic };

/// Reviews paired with their authors' profiles. Immutable once built; the
/// constructor enforces unique review ids and resolvable user ids.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ReviewRecord> reviews, std::vector<UserProfileRecord> profiles,
          Provenance provenance, std::optional<City> city_filter = std::nullopt);

  std::size_t size() const { return reviews_.size(); }
  bool empty() const { return reviews_.empty(); }

  const ReviewRecord& review(std::size_t i) const { return reviews_[i]; }
  const UserProfileRecord& profile(std::size_t i) const { return profiles_[profile_of_[i]]; }

  std::span<const ReviewRecord> reviews() const { return reviews_; }
  std::span<const UserProfileRecord> profiles() const { return profiles_; }

  std::size_t count(Label label) const;
  std::size_t count(City city, Label label) const;
  std::size_t count(City city) const { return count(city, Label::Trustful) + count(city, Label::Fake); }

  Provenance provenance() const { return provenance_; }
  const std::optional<City>& city_filter() const { return city_filter_; }

  /// Subset restricted to one city; profiles not referenced are dropped.
  Dataset filter(City city) const;

  bool operator==(const Dataset& other) const;

 private:
  std::vector<ReviewRecord> reviews_;
  std::vector<UserProfileRecord> profiles_;
  std::vector<std::size_t> profile_of_;
  Provenance provenance_ = Provenance::Ingested;
  std::optional<City> city_filter_;
  std::array<std::array<std::size_t, 2>, 4> counts_{};
};

inline constexpr std::string_view kDatasetFormatTag = "f3/1";

Dataset load_dataset(const std::filesystem::path& path);
Dataset read_dataset(std::istream& in);
void write_dataset(const Dataset& dataset, std::ostream& out);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// --- synthesis ------------------------------------------------------------

/// The 21 selected user-profile features, in their canonical table order.
enum class ProfileField : int {
  ProfileDescription,
  BookmarkLists,
  Lists,
  ReviewUpdates,
  FriendsFriends,
  FriendsReviews,
  HasPhoto,
  Followers,
  Friends,
  VotesCool,
  VotesUseful,
  VotesFunny,
  ReviewCount,
  Share5,
  Share4,
  Share3,
  Share2,
  Share1,
  AverageRating,
  Photos,
  Tips,
};
inline constexpr std::size_t kProfileFieldCount = 21;

struct FieldStats {
  double mean = 0.0;
  double std = 0.0;
  double max = 0.0;
};

/// Generator parameters: per class (indexed by class_index) per field.
struct ProfileStats {
  std::array<std::array<FieldStats, kProfileFieldCount>, 2> fields{};

  const FieldStats& at(Label label, ProfileField f) const {
    return fields[class_index(label)][static_cast<std::size_t>(f)];
  }
  FieldStats& at(Label label, ProfileField f) {
    return fields[class_index(label)][static_cast<std::size_t>(f)];
  }
};

/// Distribution summary of the scraped consumer-electronics reviewers.
ProfileStats reference_profile_stats();

struct CitySize {
  City city;
  std::int64_t trustful = 0;
  std::int64_t fake = 0;
};

/// Per-city class sizes of the scraped corpus.
std::vector<CitySize> reference_city_sizes();

/// Fixed filler vocabulary for synthetic review text.
std::span<const std::string_view> filler_vocabulary();

Dataset synthesize_dataset(std::uint64_t seed, std::span<const CitySize> sizes,
                           const ProfileStats& stats);

}  // namespace f3
