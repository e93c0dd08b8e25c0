#include "txhist/format.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>

#include "txhist/core.hpp"

namespace txhist {

std::string format_double(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw ContractViolation("format_double: to_chars failed");
  return std::string(buf, p);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw InputError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace txhist
