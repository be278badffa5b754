#include "gbd/text.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gbd {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string format_vec(const Vec& v, char sep) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v(i));
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view token) {
  double x = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), x);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  return x;
}

}  // namespace gbd
