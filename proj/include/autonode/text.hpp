#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace autonode::text {

// ASCII lower-casing; non-ASCII bytes pass through untouched.
std::string fold(std::string_view s);

std::string trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace autonode::text
