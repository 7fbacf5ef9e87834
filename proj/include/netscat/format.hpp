#ifndef NETSCAT_FORMAT_HPP
#define NETSCAT_FORMAT_HPP

#include <charconv>
#include <string>

namespace netscat {

// Shortest round-trip decimal representation; locale independent so CSV
// artifacts are byte-stable.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace netscat

#endif  // NETSCAT_FORMAT_HPP
