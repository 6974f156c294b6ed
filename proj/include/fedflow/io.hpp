#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedflow {

// IEEE-754 bit pattern as 16 lowercase hex chars (big-endian). Every double
// encodes to the same width, which keeps serialized linear models fixed-size.
std::string double_to_hex(double v);
double double_from_hex(std::string_view hex);

std::string doubles_to_hex(std::span<const double> values);
std::vector<double> doubles_from_hex(std::string_view hex);

std::string u64_to_hex(uint64_t v);
uint64_t u64_from_hex(std::string_view hex);

// Shortest decimal form that round-trips (std::to_chars).
std::string format_double(double v);
double parse_double(std::string_view text, bool& ok);

uint64_t fnv1a64(std::string_view bytes);
std::string file_digest_hex(const std::filesystem::path& p);

std::string read_file(const std::filesystem::path& p);
// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& p, std::string_view content);

}  // namespace fedflow
