#include "prkg/value.hpp"

#include <charconv>
#include <cmath>
#include <regex>

#include "prkg/error.hpp"

namespace prkg {

void check_value(const std::string& key, const PropertyValue& value) {
  if (key.empty()) throw Error(Errc::invalid_argument, "empty property key");
  if (const auto* d = std::get_if<double>(&value); d && !std::isfinite(*d)) {
    throw Error(Errc::invalid_argument, "property '" + key + "' must be a finite decimal");
  }
  if (const auto* list = std::get_if<TextList>(&value)) {
    for (const auto& item : *list) {
      if (item.empty())
        throw Error(Errc::invalid_argument, "property '" + key + "' has an empty list element");
    }
  }
}

void check_properties(const PropertyMap& properties) {
  for (const auto& [key, value] : properties) check_value(key, value);
}

std::string render_decimal(double value) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof buf, value);
  std::string out(buf, result.ptr);
  if (out.find_first_of(".eE") == std::string::npos && std::isfinite(value)) out += ".0";
  return out;
}

std::string render_text(const PropertyValue& value) {
  struct Visitor {
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return render_decimal(d); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const PartialDate& d) const { return d.to_string(); }
    std::string operator()(const TextList& list) const {
      std::string out;
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) out += ",";
        out += list[i];
      }
      return out;
    }
  };
  return std::visit(Visitor{}, value);
}

PropertyValue parse_cli_value(const std::string& text) {
  static const std::regex integer_re(R"(-?[0-9]+)");
  static const std::regex decimal_re(R"(-?[0-9]+\.[0-9]+([eE][-+]?[0-9]+)?)");

  if (text == "true") return true;
  if (text == "false") return false;
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    return text.substr(1, text.size() - 2);
  }
  if (text.rfind("date:", 0) == 0) return PartialDate::parse(text.substr(5));
  if (text.size() >= 2 && text.front() == '[' && text.back() == ']') {
    TextList items;
    std::string inner = text.substr(1, text.size() - 2);
    std::size_t pos = 0;
    while (!inner.empty()) {
      auto comma = inner.find(',', pos);
      items.push_back(inner.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return items;
  }
  if (std::regex_match(text, integer_re)) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc()) return v;
  }
  if (std::regex_match(text, decimal_re)) return std::stod(text);
  return text;
}

const std::string* as_text(const PropertyValue& value) { return std::get_if<std::string>(&value); }

}  // namespace prkg
