#pragma once

// Numeric CSV input: one observation per line, comma-separated columns, an
// optional single header line recognised by a non-numeric first token.

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsncp {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NumericTable {
  std::vector<std::string> header;           // empty without a header line
  std::vector<std::vector<double>> columns;  // columns[c][t]
  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t cols() const noexcept { return columns.size(); }
};

NumericTable read_numeric_table(std::istream& in);
/// Throws InputError when the file cannot be opened or parsed.
NumericTable read_numeric_table(const std::string& path);

}  // namespace lsncp
