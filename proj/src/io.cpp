#include "lsncp/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lsncp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(trim(f));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE && std::isfinite(out);
}

}  // namespace

NumericTable read_numeric_table(std::istream& in) {
  NumericTable t;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto fields = split(body);
    if (first) {
      first = false;
      double probe = 0.0;
      if (!parse_double(fields.front(), probe)) {
        t.header = fields;
        continue;
      }
    }
    if (t.columns.empty()) {
      if (!t.header.empty() && t.header.size() != fields.size()) {
        throw InputError("line " + std::to_string(line_no) + ": " + std::to_string(fields.size()) +
                         " fields but the header has " + std::to_string(t.header.size()));
      }
      t.columns.resize(fields.size());
    }
    if (fields.size() != t.columns.size()) {
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.columns.size()) +
                       " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw InputError("line " + std::to_string(line_no) + ": '" + fields[c] + "' is not a finite number");
      }
      t.columns[c].push_back(v);
    }
  }
  if (t.columns.empty()) throw InputError("no observations in input");
  return t;
}

NumericTable read_numeric_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "': " + std::strerror(errno));
  try {
    return read_numeric_table(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace lsncp
