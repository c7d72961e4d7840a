// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_CLI_CSV_HPP
#define POLLING_CLI_CSV_HPP

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace polling::csv {

/// Shortest round-trippable-enough rendering with 15 significant digits.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  Writer& row(const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) os_ << ',';
      os_ << cells[c];
    }
    os_ << '\n';
    return *this;
  }

  Writer& comment(std::string_view text) {
    os_ << "# " << text << '\n';
    return *this;
  }

 private:
  std::ostream& os_;
};

}  // namespace polling::csv

#endif  // POLLING_CLI_CSV_HPP
