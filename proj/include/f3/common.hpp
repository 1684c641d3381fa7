#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace f3 {

/// Class label. The numeric value is the class index used by every learner.
enum class Label : int { Trustful = 0, Fake = 1 };

enum class City : int { NewYork = 0, LosAngeles = 1, Miami = 2, SanFrancisco = 3 };

inline constexpr std::array<City, 4> kAllCities = {City::NewYork, City::LosAngeles,
                                                   City::Miami, City::SanFrancisco};

std::string_view to_string(Label label);
std::string_view to_string(City city);
std::optional<Label> parse_label(std::string_view text);
std::optional<City> parse_city(std::string_view text);

inline int class_index(Label label) { return static_cast<int>(label); }
inline Label label_from_index(int index) { return index == 0 ? Label::Trustful : Label::Fake; }

/// Base of every library error that is not a plain argument error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Deterministic 64-bit mixer (splitmix64 finalizer). Used to derive
/// independent seed streams from structured coordinates.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ (b + 0x632be59bd9b4e019ULL));
}

}  // namespace f3
