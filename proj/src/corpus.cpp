#include "f3/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

namespace f3 {

using nlohmann::json;
using nlohmann::ordered_json;

// --- Dataset --------------------------------------------------------------

Dataset::Dataset(std::vector<ReviewRecord> reviews, std::vector<UserProfileRecord> profiles,
                 Provenance provenance, std::optional<City> city_filter)
    : reviews_(std::move(reviews)),
      profiles_(std::move(profiles)),
      provenance_(provenance),
      city_filter_(city_filter) {
  std::unordered_map<std::string, std::size_t> by_user;
  by_user.reserve(profiles_.size());
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    if (!by_user.emplace(profiles_[i].user_id, i).second)
      throw IntegrityError("duplicate user_id '" + profiles_[i].user_id + "'");
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(reviews_.size());
  profile_of_.reserve(reviews_.size());
  for (const auto& r : reviews_) {
    if (!seen.insert(r.review_id).second)
      throw IntegrityError("duplicate review_id '" + r.review_id + "'");
    auto it = by_user.find(r.user_id);
    if (it == by_user.end())
      throw IntegrityError("review '" + r.review_id + "' references unknown user_id '" +
                           r.user_id + "'");
    profile_of_.push_back(it->second);
    ++counts_[static_cast<int>(r.city)][class_index(r.label)];
  }
}

std::size_t Dataset::count(Label label) const {
  std::size_t n = 0;
  for (const auto& c : counts_) n += c[class_index(label)];
  return n;
}

std::size_t Dataset::count(City city, Label label) const {
  return counts_[static_cast<int>(city)][class_index(label)];
}

Dataset Dataset::filter(City city) const {
  std::vector<ReviewRecord> reviews;
  std::vector<UserProfileRecord> profiles;
  std::vector<bool> kept(profiles_.size(), false);
  for (std::size_t i = 0; i < reviews_.size(); ++i) {
    if (reviews_[i].city != city) continue;
    reviews.push_back(reviews_[i]);
    kept[profile_of_[i]] = true;
  }
  for (std::size_t p = 0; p < profiles_.size(); ++p) {
    if (kept[p]) profiles.push_back(profiles_[p]);
  }
  return Dataset(std::move(reviews), std::move(profiles), provenance_, city);
}

bool Dataset::operator==(const Dataset& other) const {
  return provenance_ == other.provenance_ && city_filter_ == other.city_filter_ &&
         reviews_ == other.reviews_ && profiles_ == other.profiles_;
}

// --- file format ----------------------------------------------------------

namespace {

std::string_view provenance_name(Provenance p) {
  return p == Provenance::Synthetic ? "Synthetic" : "Ingested";
}

std::string format_date(const std::chrono::year_month_day& d) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view s) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (std::sscanf(std::string(s).c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

template <typename T>
T optional_field(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return it->get<T>();
}

std::int64_t count_field(const json& obj, const char* key) {
  auto v = optional_field<std::int64_t>(obj, key, 0);
  if (v < 0) throw std::domain_error(std::string("negative count '") + key + "'");
  return v;
}

double real_field(const json& obj, const char* key) {
  auto v = optional_field<double>(obj, key, 0.0);
  if (!(v >= 0.0) || !std::isfinite(v))
    throw std::domain_error(std::string("field '") + key + "' must be a finite nonnegative number");
  return v;
}

UserProfileRecord parse_profile(const json& obj) {
  UserProfileRecord u;
  u.user_id = obj.at("user_id").get<std::string>();
  u.has_profile_description = optional_field(obj, "has_profile_description", false);
  u.bookmark_lists = count_field(obj, "bookmark_lists");
  u.lists = count_field(obj, "lists");
  u.review_updates = count_field(obj, "review_updates");
  u.friends_mean_friends = real_field(obj, "friends_mean_friends");
  u.friends_mean_reviews = real_field(obj, "friends_mean_reviews");
  u.has_photo = optional_field(obj, "has_photo", false);
  u.followers = count_field(obj, "followers");
  u.friends = count_field(obj, "friends");
  u.votes_cool = count_field(obj, "votes_cool");
  u.votes_useful = count_field(obj, "votes_useful");
  u.votes_funny = count_field(obj, "votes_funny");
  u.review_count = count_field(obj, "review_count");
  if (auto it = obj.find("rating_hist"); it != obj.end()) {
    auto hist = it->get<std::vector<std::int64_t>>();
    if (hist.size() != 5) throw std::domain_error("rating_hist must have 5 entries");
    for (std::size_t i = 0; i < 5; ++i) {
      if (hist[i] < 0) throw std::domain_error("negative rating_hist entry");
      u.rating_hist[i] = hist[i];
    }
  }
  u.photos = count_field(obj, "photos");
  u.tips = count_field(obj, "tips");
  return u;
}

ReviewRecord parse_review(const json& obj) {
  ReviewRecord r;
  r.review_id = obj.at("review_id").get<std::string>();
  r.business_id = optional_field<std::string>(obj, "business_id", "");
  r.user_id = obj.at("user_id").get<std::string>();
  auto city = parse_city(obj.at("city").get<std::string>());
  if (!city) throw std::domain_error("unknown city '" + obj.at("city").get<std::string>() + "'");
  r.city = *city;
  r.text = optional_field<std::string>(obj, "text", "");
  r.stars = obj.at("stars").get<int>();
  if (r.stars < 1 || r.stars > 5) throw std::domain_error("stars must be in [1,5]");
  auto date = parse_date(obj.at("date").get<std::string>());
  if (!date) throw std::domain_error("date must be YYYY-MM-DD");
  r.date = *date;
  auto label = parse_label(obj.at("label").get<std::string>());
  if (!label) throw std::domain_error("label must be Trustful or Fake");
  r.label = *label;
  return r;
}

void check_histogram(const UserProfileRecord& u) {
  if (u.review_count == 0) return;
  std::int64_t total = 0;
  for (auto h : u.rating_hist) total += h;
  if (total != u.review_count)
    throw IntegrityError("user '" + u.user_id + "': rating_hist sums to " +
                         std::to_string(total) + " but review_count is " +
                         std::to_string(u.review_count));
}

ordered_json profile_to_json(const UserProfileRecord& u) {
  ordered_json j;
  j["record"] = "user";
  j["user_id"] = u.user_id;
  j["has_profile_description"] = u.has_profile_description;
  j["bookmark_lists"] = u.bookmark_lists;
  j["lists"] = u.lists;
  j["review_updates"] = u.review_updates;
  j["friends_mean_friends"] = u.friends_mean_friends;
  j["friends_mean_reviews"] = u.friends_mean_reviews;
  j["has_photo"] = u.has_photo;
  j["followers"] = u.followers;
  j["friends"] = u.friends;
  j["votes_cool"] = u.votes_cool;
  j["votes_useful"] = u.votes_useful;
  j["votes_funny"] = u.votes_funny;
  j["review_count"] = u.review_count;
  j["rating_hist"] = u.rating_hist;
  j["photos"] = u.photos;
  j["tips"] = u.tips;
  return j;
}

ordered_json review_to_json(const ReviewRecord& r) {
  ordered_json j;
  j["record"] = "review";
  j["review_id"] = r.review_id;
  j["business_id"] = r.business_id;
  j["user_id"] = r.user_id;
  j["city"] = to_string(r.city);
  j["text"] = r.text;
  j["stars"] = r.stars;
  j["date"] = format_date(r.date);
  j["label"] = to_string(r.label);
  return j;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  std::vector<ReviewRecord> reviews;
  std::vector<UserProfileRecord> profiles;
  Provenance provenance = Provenance::Ingested;
  std::optional<City> city_filter;
  bool header_seen = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed record: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "record is not a key-value object");
    try {
      if (!header_seen) {
        auto tag = obj.find("format");
        if (tag == obj.end() || *tag != kDatasetFormatTag)
          throw ParseError(line_no, "missing or unsupported format header (expected f3/1)");
        auto prov = optional_field<std::string>(obj, "provenance", "Ingested");
        if (prov == "Synthetic") {
          provenance = Provenance::Synthetic;
        } else if (prov != "Ingested") {
          throw ParseError(line_no, "unknown provenance '" + prov + "'");
        }
        if (auto cf = obj.find("city_filter"); cf != obj.end() && !cf->is_null()) {
          city_filter = parse_city(cf->get<std::string>());
          if (!city_filter) throw ParseError(line_no, "unknown city filter");
        }
        header_seen = true;
        continue;
      }
      auto kind = obj.at("record").get<std::string>();
      if (kind == "user") {
        profiles.push_back(parse_profile(obj));
        check_histogram(profiles.back());
      } else if (kind == "review") {
        reviews.push_back(parse_review(obj));
      } else {
        throw ParseError(line_no, "unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const std::domain_error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return Dataset(std::move(reviews), std::move(profiles), provenance, city_filter);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file '" + path.string() + "'");
  return read_dataset(in);
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  ordered_json header;
  header["format"] = kDatasetFormatTag;
  header["provenance"] = provenance_name(dataset.provenance());
  if (dataset.city_filter()) header["city_filter"] = to_string(*dataset.city_filter());
  out << header.dump() << '\n';
  for (const auto& u : dataset.profiles()) out << profile_to_json(u).dump() << '\n';
  for (const auto& r : dataset.reviews()) out << review_to_json(r).dump() << '\n';
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write dataset file '" + path.string() + "'");
  write_dataset(dataset, out);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

// --- synthesis ------------------------------------------------------------

ProfileStats reference_profile_stats() {
  // {mean, std, max} for trustful then fake reviewers.
  static constexpr std::array<std::array<FieldStats, kProfileFieldCount>, 2> kTable = {{
      {{
          {0.19, 0.39, 1.0},
          {36.47, 183.19, 5842.0},
          {1.45, 15.67, 712.0},
          {4.22, 20.80, 562.0},
          {231.75, 417.09, 5000.0},
          {80.6, 189.99, 2603.0},
          {0.76, 0.43, 1.0},
          {6.18, 45.34, 1782.0},
          {70.86, 260.70, 5000.0},
          {155.91, 1169.02, 35842.0},
          {231.35, 1449.30, 51012.0},
          {136.18, 1010.25, 32844.0},
          {77.71, 328.41, 11225.0},
          {0.37, 0.31, 1.0},
          {0.13, 0.16, 0.83},
          {0.06, 0.09, 1.0},
          {0.05, 0.08, 0.8},
          {0.12, 0.17, 1.0},
          {2.79, 1.78, 5.0},
          {127.39, 1135.01, 57761.0},
          {24.29, 269.99, 16364.0},
      }},
      {{
          {0.06, 0.24, 1.0},
          {2.09, 27.74, 1717.0},
          {0.04, 0.58, 30.0},
          {0.34, 2.52, 85.0},
          {66.77, 269.39, 13699.0},
          {26.70, 121.96, 2885.0},
          {0.41, 0.49, 1.0},
          {0.38, 5.02, 263.0},
          {13.90, 106.14, 5000.0},
          {5.41, 112.61, 5440.0},
          {8.58, 128.43, 6170.0},
          {4.35, 92.27, 4184.0},
          {7.78, 42.14, 1404.0},
          {0.14, 0.27, 1.0},
          {0.05, 0.13, 1.0},
          {0.02, 0.07, 0.8},
          {0.02, 0.06, 0.6},
          {0.07, 0.18, 1.0},
          {1.1, 1.74, 5.0},
          {5.60, 141.04, 7599.0},
          {1.27, 18.56, 1040.0},
      }},
  }};
  ProfileStats stats;
  stats.fields = kTable;
  return stats;
}

std::vector<CitySize> reference_city_sizes() {
  return {{City::NewYork, 2472, 2472},
          {City::LosAngeles, 3776, 3776},
          {City::Miami, 1409, 1409},
          {City::SanFrancisco, 1799, 1799}};
}

std::span<const std::string_view> filler_vocabulary() {
  static constexpr std::array<std::string_view, 200> kWords = {
      "phone",     "store",     "service",   "screen",    "time",      "great",
      "customer",  "back",      "place",     "one",       "repair",    "staff",
      "battery",   "laptop",    "fixed",     "price",     "day",       "new",
      "good",      "help",      "helpful",   "shop",     "friendly",  "fast",
      "called",    "appointment", "warranty", "case",      "charger",   "cable",
      "computer",  "tablet",    "camera",    "speaker",   "headphones", "tv",
      "manager",   "employee",  "line",      "wait",      "hours",     "minutes",
      "week",      "month",     "year",      "money",     "deal",      "sale",
      "return",    "refund",    "exchange",  "receipt",   "order",     "online",
      "shipping",  "delivery",  "package",   "box",       "item",      "product",
      "quality",   "broken",    "cracked",   "glass",     "replace",   "replacement",
      "part",      "parts",     "model",     "brand",     "apple",     "samsung",
      "iphone",    "android",   "software",  "update",    "data",      "backup",
      "water",     "damage",    "button",    "port",      "charging",  "power",
      "issue",     "problem",   "question",  "answer",    "experience", "visit",
      "location",  "parking",   "mall",      "street",    "downtown",  "neighborhood",
      "recommend", "definitely", "never",    "always",    "again",     "really",
      "very",      "super",     "quick",     "slow",      "easy",      "hard",
      "cheap",     "expensive", "fair",      "honest",    "rude",      "nice",
      "polite",    "professional", "knowledgeable", "technician", "tech",  "guy",
      "owner",     "team",      "people",    "everyone",  "someone",   "thing",
      "things",    "work",      "works",     "working",   "job",       "done",
      "same",      "next",      "first",     "last",      "best",      "worst",
      "better",    "worse",     "amazing",   "awesome",   "terrible",  "horrible",
      "excellent", "perfect",   "okay",      "fine",      "decent",    "bad",
      "love",      "happy",     "satisfied", "disappointed", "frustrated", "impressed",
      "selection", "inventory", "stock",     "accessories", "cover",   "protector",
      "plan",      "carrier",   "contract",  "account",   "bill",      "upgrade",
      "trade",     "offer",     "discount",  "coupon",    "card",      "cash",
      "desk",      "counter",   "room",      "door",      "open",      "closed",
      "weekend",   "morning",   "afternoon", "evening",   "today",     "yesterday",
      "friend",    "family",    "wife",      "husband",   "son",       "daughter",
      "keyboard",  "mouse",     "monitor",   "printer",   "router",    "wifi",
      "signal",    "network",
  };
  return kWords;
}

namespace {

struct Sampler {
  std::mt19937_64 rng;

  double normal(double mean, double sd) {
    std::normal_distribution<double> dist(mean, sd);
    return dist(rng);
  }

  bool bernoulli(double p) {
    std::bernoulli_distribution dist(std::clamp(p, 0.0, 1.0));
    return dist(rng);
  }

  /// Rounded normal draw rejected below `lo` and capped at `cap`.
  std::int64_t truncated_count(const FieldStats& s, std::int64_t lo) {
    auto cap = static_cast<std::int64_t>(std::llround(s.max));
    if (s.std <= 0.0) return std::clamp<std::int64_t>(std::llround(s.mean), lo, std::max(lo, cap));
    for (int attempt = 0; attempt < 10000; ++attempt) {
      auto v = static_cast<std::int64_t>(std::llround(normal(s.mean, s.std)));
      if (v >= lo) return std::min(v, std::max(lo, cap));
    }
    return lo;
  }

  double truncated_real(const FieldStats& s) {
    if (s.std <= 0.0) return std::clamp(s.mean, 0.0, std::max(0.0, s.max));
    for (int attempt = 0; attempt < 10000; ++attempt) {
      double v = normal(s.mean, s.std);
      if (v >= 0.0) return std::min(v, s.max);
    }
    return 0.0;
  }

  std::array<std::int64_t, 5> multinomial(std::int64_t n, std::array<double, 5> probs) {
    std::array<std::int64_t, 5> out{};
    double remaining_p = 1.0;
    std::int64_t remaining_n = n;
    for (std::size_t i = 0; i < 4 && remaining_n > 0; ++i) {
      double p = remaining_p > 0.0 ? std::clamp(probs[i] / remaining_p, 0.0, 1.0) : 0.0;
      std::binomial_distribution<std::int64_t> dist(remaining_n, p);
      out[i] = dist(rng);
      remaining_n -= out[i];
      remaining_p -= probs[i];
    }
    out[4] = remaining_n;
    return out;
  }
};

UserProfileRecord synthesize_profile(Sampler& s, const ProfileStats& stats, Label label,
                                     std::string user_id) {
  auto f = [&](ProfileField field) -> const FieldStats& { return stats.at(label, field); };
  UserProfileRecord u;
  u.user_id = std::move(user_id);
  u.has_profile_description = s.bernoulli(f(ProfileField::ProfileDescription).mean);
  u.bookmark_lists = s.truncated_count(f(ProfileField::BookmarkLists), 0);
  u.lists = s.truncated_count(f(ProfileField::Lists), 0);
  u.review_updates = s.truncated_count(f(ProfileField::ReviewUpdates), 0);
  u.friends_mean_friends = s.truncated_real(f(ProfileField::FriendsFriends));
  u.friends_mean_reviews = s.truncated_real(f(ProfileField::FriendsReviews));
  u.has_photo = s.bernoulli(f(ProfileField::HasPhoto).mean);
  u.followers = s.truncated_count(f(ProfileField::Followers), 0);
  u.friends = s.truncated_count(f(ProfileField::Friends), 0);
  u.votes_cool = s.truncated_count(f(ProfileField::VotesCool), 0);
  u.votes_useful = s.truncated_count(f(ProfileField::VotesUseful), 0);
  u.votes_funny = s.truncated_count(f(ProfileField::VotesFunny), 0);

  // Share means are averaged over every reviewer, including those without
  // rated reviews, so their total is the fraction of reviewers with ratings.
  std::array<double, 5> shares{};
  double share_total = 0.0;
  constexpr std::array<ProfileField, 5> kShares = {ProfileField::Share5, ProfileField::Share4,
                                                   ProfileField::Share3, ProfileField::Share2,
                                                   ProfileField::Share1};
  for (std::size_t i = 0; i < 5; ++i) {
    shares[i] = std::max(0.0, f(kShares[i]).mean);
    share_total += shares[i];
  }
  if (share_total > 0.0 && s.bernoulli(std::min(1.0, share_total))) {
    for (auto& p : shares) p /= share_total;
    u.review_count = s.truncated_count(f(ProfileField::ReviewCount), 1);
    u.rating_hist = s.multinomial(u.review_count, shares);
  }
  u.photos = s.truncated_count(f(ProfileField::Photos), 0);
  u.tips = s.truncated_count(f(ProfileField::Tips), 0);
  return u;
}

std::string synthesize_text(Sampler& s, std::discrete_distribution<std::size_t>& pick) {
  auto vocab = filler_vocabulary();
  std::uniform_int_distribution<int> length(15, 45);
  int n = length(s.rng);
  std::string text;
  for (int i = 0; i < n; ++i) {
    if (i > 0) text += ' ';
    text += vocab[pick(s.rng)];
  }
  text += '.';
  return text;
}

}  // namespace

Dataset synthesize_dataset(std::uint64_t seed, std::span<const CitySize> sizes,
                           const ProfileStats& stats) {
  for (const auto& size : sizes) {
    if (size.trustful < 0 || size.fake < 0)
      throw std::invalid_argument("synthesize_dataset: negative size for " +
                                  std::string(to_string(size.city)));
  }
  for (const auto& cls : stats.fields) {
    for (const auto& fs : cls) {
      if (fs.std < 0.0) throw std::invalid_argument("synthesize_dataset: negative std");
    }
  }

  auto vocab = filler_vocabulary();
  std::vector<double> zipf(vocab.size());
  for (std::size_t i = 0; i < zipf.size(); ++i) zipf[i] = 1.0 / static_cast<double>(i + 1);

  using namespace std::chrono;
  const auto first_day = sys_days{year{2010} / January / 1};
  const auto last_day = sys_days{year{2017} / December / 31};
  const auto span_days = (last_day - first_day).count();

  std::vector<ReviewRecord> reviews;
  std::vector<UserProfileRecord> profiles;
  for (const auto& size : sizes) {
    for (Label label : {Label::Trustful, Label::Fake}) {
      auto n = label == Label::Trustful ? size.trustful : size.fake;
      // One stream per (city, class) so other cells' sizes never shift it.
      Sampler s{std::mt19937_64(mix_seed(seed, static_cast<std::uint64_t>(size.city) * 2 +
                                                   class_index(label)))};
      std::discrete_distribution<std::size_t> pick(zipf.begin(), zipf.end());
      std::uniform_int_distribution<long> day(0, span_days);
      std::uniform_int_distribution<int> business(0, 99);
      const char tag = label == Label::Trustful ? 'T' : 'F';
      for (std::int64_t i = 0; i < n; ++i) {
        auto user_id = fmt::format("u-{}-{}-{:06d}", to_string(size.city), tag, i);
        auto profile = synthesize_profile(s, stats, label, user_id);

        ReviewRecord r;
        r.review_id = fmt::format("r-{}-{}-{:06d}", to_string(size.city), tag, i);
        r.business_id = fmt::format("b-{}-{:03d}", to_string(size.city), business(s.rng));
        r.user_id = user_id;
        r.city = size.city;
        r.label = label;
        r.date = year_month_day{first_day + days{day(s.rng)}};
        if (profile.review_count > 0) {
          std::discrete_distribution<int> star(profile.rating_hist.begin(),
                                               profile.rating_hist.end());
          r.stars = 5 - star(s.rng);
        } else {
          r.stars = std::uniform_int_distribution<int>(1, 5)(s.rng);
        }
        r.text = synthesize_text(s, pick);

        reviews.push_back(std::move(r));
        profiles.push_back(std::move(profile));
      }
    }
  }
  return Dataset(std::move(reviews), std::move(profiles), Provenance::Synthetic);
}

}  // namespace f3
