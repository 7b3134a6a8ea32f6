#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trajmc::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name, -1 if absent.
  int column(const std::string& name) const;
};

/// Reads a comma-separated file with a header row. Blank lines and lines
/// starting with '#' are skipped.
Table read(const std::string& path);
Table parse(std::istream& in);

/// Formats doubles with round-trip precision.
std::string format(double v);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace trajmc::csv
