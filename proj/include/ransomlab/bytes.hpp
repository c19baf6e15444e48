#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ransomlab {

using Bytes = std::vector<std::uint8_t>;

Bytes bytes_of(std::string_view text);
std::string text_of(std::span<const std::uint8_t> data);

// Lowercase hex, no separators.
std::string to_hex(std::span<const std::uint8_t> data);

// Accepts upper or lower case; throws Error("malformed hex...") on odd length
// or non-hex digits.
Bytes from_hex(std::string_view hex);

std::string base64_encode(std::span<const std::uint8_t> data);
Bytes base64_decode(std::string_view text);

} // namespace ransomlab
