#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace nlkpp {

using Json = nlohmann::ordered_json;

/// Shortest text that round-trips: 17 significant digits, '.' decimal point.
std::string format_double(double v);

/// Minimal RFC-4180 writer: quotes fields containing separators or quotes.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& fields);
  void row(const std::vector<double>& values);
  std::string str() const { return text_; }
  void save(const std::filesystem::path& path) const;

 private:
  static std::string quote(const std::string& s);
  std::size_t columns_;
  std::string text_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

/// JSON cannot hold inf/nan; those become strings.
Json json_number(double v);

}  // namespace nlkpp
