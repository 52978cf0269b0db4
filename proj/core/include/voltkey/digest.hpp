#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace voltkey {

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data);

// Packs a 0/1 bit vector into bytes, first bit in the MSB; the tail byte is
// zero-padded.
std::vector<uint8_t> pack_bits(std::span<const uint8_t> bits);

std::string to_hex(std::span<const uint8_t> bytes);
std::vector<uint8_t> from_hex(const std::string& hex);

}  // namespace voltkey
