#include "f3/common.hpp"

namespace f3 {

std::string_view to_string(Label label) {
  return label == Label::Fake ? "Fake" : "Trustful";
}

std::string_view to_string(City city) {
  switch (city) {
    case City::NewYork: return "NewYork";
    case City::LosAngeles: return "LosAngeles";
    case City::Miami: return "Miami";
    case City::SanFrancisco: return "SanFrancisco";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "Trustful") return Label::Trustful;
  if (text == "Fake") return Label::Fake;
  return std::nullopt;
}

std::optional<City> parse_city(std::string_view text) {
  for (City c : kAllCities) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace f3
