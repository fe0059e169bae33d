#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hsd::text {

struct TomlValue {
    bool is_bool = false;
    bool boolean = false;
    double number = 0.0;
    std::string units;
    std::string source;
};

/// Reads the TOML subset used by parameter files: [section] headers and
/// `key = scalar` or `key = { value = ..., units = "...", source = "..." }`.
/// Keys come back dotted with their section, in file order.
std::vector<std::pair<std::string, TomlValue>> parse_toml(std::istream& in);

/// Shortest round-trip decimal for v.
std::string format_number(double v);

std::vector<std::string> split_csv_line(std::string_view line);

/// Writes to `path.tmp` then renames over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

}  // namespace hsd::text
