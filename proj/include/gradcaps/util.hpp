#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gradcaps {

// Shortest round-trip decimal form of a double (via std::to_chars).
std::string fmt_double(double v);

std::string read_file(const std::string& path);            // throws ConfigError
void write_file_atomic(const std::string& path, const std::string& content);

uint64_t fnv1a64(const std::string& text);
std::string to_hex(uint64_t v);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

}  // namespace gradcaps
