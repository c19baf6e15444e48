#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "ransomlab/bytes.hpp"

namespace ransomlab {

// 32 bytes of uniform randomness; drives both the AES-256 data key and the
// HMAC key of the session envelope.
struct SessionKey {
    std::array<std::uint8_t, 32> key_bytes{};

    bool operator==(const SessionKey&) const = default;
};

SessionKey random_session_key();

struct RsaKeyPair {
    std::string public_pem;
    std::string private_pem;
    int modulus_bits = 2048;
};

// bits must be one of 2048, 3072, 4096; anything else throws
// Error("unsupported bit size").
RsaKeyPair generate_rsa_keypair(int bits = 2048);

// Re-derives the public half from a private PEM.
std::string public_pem_from_private(const std::string& private_pem);

// Modulus size in bytes of the key in the given PEM (public or private).
std::size_t rsa_modulus_size(const std::string& pem);

// RSA-OAEP key wrapping. Output length equals the modulus size (256 bytes for
// a 2048-bit key); the padding is randomized so two wraps of the same key
// differ. unwrap throws Error("envelope open failure") on a wrong key or a
// corrupted blob.
Bytes wrap_session_key(const SessionKey& sk, const std::string& public_pem);
SessionKey unwrap_session_key(std::span<const std::uint8_t> blob,
                              const std::string& private_pem);

// Session envelope: AES-256-CBC with a random 16-byte IV prefix and PKCS#7
// padding, authenticated with HMAC-SHA256 over IV || ciphertext so that any
// tampering is rejected, not just padding damage.
//
// Layout: IV(16) || CBC body || tag(32).
//
// Errors: too short to hold the layout -> "malformed ciphertext"; tag or
// padding failure -> "envelope open failure".
Bytes aes_encrypt(const SessionKey& sk, std::span<const std::uint8_t> plaintext);
Bytes aes_decrypt(const SessionKey& sk, std::span<const std::uint8_t> ciphertext);

} // namespace ransomlab
