#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tcl {

// Shortest decimal form that parses back to the exact same double. Every CSV
// we write goes through this so files round-trip losslessly.
std::string fmt_double(double v);

double parse_double(std::string_view s);         // throws invalid_argument on junk
long long parse_int(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// FNV-1a 64 as a hex string; used for config content hashes
std::string content_hash_hex(std::string_view s);

}  // namespace tcl
