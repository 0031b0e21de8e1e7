#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <system_error>

namespace nhring::csv {

// Shortest decimal text that parses back to the same double.
inline std::string number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

inline void write_field(std::ostream& os, double x) { os << number(x); }
inline void write_field(std::ostream& os, int x) { os << x; }
inline void write_field(std::ostream& os, long x) { os << x; }
inline void write_field(std::ostream& os, const std::string& s) { os << s; }
inline void write_field(std::ostream& os, const char* s) { os << s; }

template <class First, class... Rest>
void row(std::ostream& os, const First& first, const Rest&... rest) {
  write_field(os, first);
  ((os << ',', write_field(os, rest)), ...);
  os << '\n';
}

}  // namespace nhring::csv
