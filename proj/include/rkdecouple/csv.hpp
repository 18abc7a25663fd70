#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rkdecouple {

/// 17 significant digits, '.' decimal separator regardless of locale.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws DomainError when the row width differs from the header.
  void add_row(std::vector<std::string> row);
  void write(std::ostream& os) const;
  std::string str() const;
};

/// Splits one CSV line on commas; no quoting support (our tables never need it).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace rkdecouple
