#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace yardsale {

/// Comma-separated table with a header row, '.' decimals and UTF-8 text.
/// Doubles are written in shortest round-trip form so identical results
/// always produce identical bytes.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

  /// Dimension error when the row width differs from the header.
  void add_row(std::vector<std::string> row);
  void append(const CsvTable& other);

  /// Index error for unknown names.
  std::size_t column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  static CsvTable read(std::istream& in);
  static CsvTable load(const std::filesystem::path& path);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string format_number(double value);
std::string format_number(std::uint64_t value);

}  // namespace yardsale
