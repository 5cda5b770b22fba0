#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace flowcast {

// Shortest round-trip decimal formatting; "nan"/"inf" pass through as
// literals. Used for every CSV artifact so reruns are byte-identical.
std::string fmt_double(double v);

std::vector<std::string> split_csv_line(std::string_view line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const; // -1 if absent
};

// Reads a whole CSV file (first line is the header). Throws on I/O failure.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header)
      : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  // Writes header + rows; throws std::runtime_error if the file cannot
  // be opened.
  void write(const std::string& path) const;
  std::string to_string() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

} // namespace flowcast
