#ifndef TXHIST_FORMAT_HPP
#define TXHIST_FORMAT_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace txhist {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Strict full-string parse; throws InputError on trailing garbage.
double parse_double(std::string_view text);

/// 64-bit FNV-1a, stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t value);

}  // namespace txhist

#endif  // TXHIST_FORMAT_HPP
