#include "fedflow/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedflow/errors.hpp"

namespace fedflow {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw DataError("invalid hex digit in serialized value");
}
}  // namespace

std::string u64_to_hex(uint64_t v) {
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = kHexDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

uint64_t u64_from_hex(std::string_view hex) {
  if (hex.size() != 16) throw DataError("hex value must be 16 chars");
  uint64_t v = 0;
  for (char c : hex) v = (v << 4) | static_cast<uint64_t>(hex_value(c));
  return v;
}

std::string double_to_hex(double v) { return u64_to_hex(std::bit_cast<uint64_t>(v)); }

double double_from_hex(std::string_view hex) { return std::bit_cast<double>(u64_from_hex(hex)); }

std::string doubles_to_hex(std::span<const double> values) {
  std::string out;
  out.reserve(values.size() * 16);
  for (double v : values) out += double_to_hex(v);
  return out;
}

std::vector<double> doubles_from_hex(std::string_view hex) {
  if (hex.size() % 16 != 0) throw DataError("hex vector length must be a multiple of 16");
  std::vector<double> out;
  out.reserve(hex.size() / 16);
  for (size_t i = 0; i < hex.size(); i += 16) out.push_back(double_from_hex(hex.substr(i, 16)));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

double parse_double(std::string_view text, bool& ok) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  ok = ec == std::errc() && ptr == text.data() + text.size();
  return v;
}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string file_digest_hex(const std::filesystem::path& p) {
  return u64_to_hex(fnv1a64(read_file(p)));
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& p, std::string_view content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::filesystem::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

}  // namespace fedflow
