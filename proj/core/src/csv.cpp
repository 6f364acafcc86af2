#include "yardsale/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "yardsale/error.hpp"

namespace yardsale {

namespace {

bool needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

void write_cell(std::ostream& out, const std::string& s) {
  if (!needs_quotes(s)) {
    out << s;
    return;
  }
  out << '"';
  for (const char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out << ',';
    write_cell(out, cells[k]);
  }
  out << '\n';
}

// One logical record; quoted cells may span lines.
bool read_record(std::istream& in, std::vector<std::string>& cells) {
  cells.clear();
  std::string cell;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  if (!any) return false;
  cells.push_back(std::move(cell));
  return true;
}

}  // namespace

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size())
    throw Error(ErrorKind::Dimension, "csv row has " + std::to_string(row.size()) + " cells, header has " +
                                          std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

void CsvTable::append(const CsvTable& other) {
  if (header_.empty() && rows_.empty()) header_ = other.header_;
  if (other.header_ != header_) throw Error(ErrorKind::Dimension, "csv headers differ");
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t k = 0; k < header_.size(); ++k)
    if (header_[k] == name) return k;
  throw Error(ErrorKind::Index, "csv has no column '" + std::string(name) + "'");
}

const std::string& CsvTable::cell(std::size_t row, std::string_view name) const {
  if (row >= rows_.size()) throw Error(ErrorKind::Index, "csv row out of range");
  return rows_[row][column(name)];
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const std::string& s = cell(row, name);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::InvalidParameter, "csv cell '" + s + "' is not a number");
  return value;
}

void CsvTable::write(std::ostream& out) const {
  write_line(out, header_);
  for (const auto& row : rows_) write_line(out, row);
}

void CsvTable::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  write(out);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write to " + path.string() + " failed");
}

CsvTable CsvTable::read(std::istream& in) {
  std::vector<std::string> cells;
  if (!read_record(in, cells)) throw Error(ErrorKind::Io, "csv input is empty");
  CsvTable table(cells);
  while (read_record(in, cells)) {
    if (cells.size() == 1 && cells[0].empty()) continue;
    table.add_row(cells);
  }
  return table;
}

CsvTable CsvTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read(in);
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_number(std::uint64_t value) { return std::to_string(value); }

}  // namespace yardsale
