#pragma once

#include <array>
#include <cstdint>

#include "ransomlab/bytes.hpp"

namespace ransomlab {

// RC4 keystream generator state: the 256-byte permutation plus the two
// generator indices. A freshly scheduled state always has i = j = 0.
struct Rc4State {
    std::array<std::uint8_t, 256> s{};
    std::uint8_t i = 0;
    std::uint8_t j = 0;
};

// Key-scheduling algorithm. Throws Error("empty key") on an empty key.
Rc4State rc4_ksa(std::span<const std::uint8_t> key);

// XORs data with the keystream starting from `state`. The caller's state is
// not modified; encrypt and decrypt are the same operation.
Bytes rc4_apply(const Rc4State& state, std::span<const std::uint8_t> data);

} // namespace ransomlab
