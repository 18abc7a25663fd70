#include "rkdecouple/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "rkdecouple/errors.hpp"

namespace rkdecouple {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  for (char& ch : s)
    if (ch == ',') ch = '.';
  return s;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size())
    throw DomainError("csv row has " + std::to_string(row.size()) + " fields, header has " +
                      std::to_string(header.size()));
  rows.push_back(std::move(row));
}

void CsvTable::write(std::ostream& os) const {
  auto line = [&os](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << fields[i];
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::string CsvTable::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace rkdecouple
