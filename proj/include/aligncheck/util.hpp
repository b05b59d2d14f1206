#pragma once

#include <cstdint>
#include <string>

namespace aligncheck::util {

// Shortest decimal representation that parses back to the same double.
// Used where write -> parse -> write must be a fixed point.
std::string format_double_shortest(double v);

// %.9g with a round-trip through strtod so repeated serialization of the
// already-rounded value is byte-stable.
std::string format_sig9(double v);
double round_sig9(double v);

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::string fnv1a64_hex(const std::string& bytes);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

std::string iso8601_utc_now();

}  // namespace aligncheck::util
