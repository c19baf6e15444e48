#pragma once

#include <cstdint>
#include <string>

#include "ransomlab/bytes.hpp"

namespace ransomlab::cryptowall {

// CryptoWall's C&C weakness: the URL path of the request doubles as the RC4
// key, with its bytes sorted ascending before scheduling.
struct CwPathKey {
    std::string raw_path; // leading "/" already stripped
    Bytes sorted_key;     // bytes of raw_path, ascending
};

// Strips one leading "/" and sorts. Throws Error("empty key path") when
// nothing is left.
CwPathKey derive_rc4_key(std::string_view url_path);

// The brace-wrapped, pipe-delimited record a CryptoWall C&C returns. Field
// names are ours; the wire format is {build_id|payment_domain|victim_id|
// country|public_key_pem}.
struct CwServerMessage {
    std::uint64_t build_id = 0;
    std::string payment_domain;
    std::string victim_id;
    std::string country; // 2-letter code
    std::string public_key_pem;

    bool operator==(const CwServerMessage&) const = default;
};

CwServerMessage parse_server_message(std::string_view text);
std::string serialize_server_message(const CwServerMessage& msg);

// Request body: one lowercase parameter name, "=", lowercase hex of the
// RC4-encrypted plaintext. Matches the fingerprint grammar ^[a-z]=[a-z0-9]+$.
std::string encode_request(const CwPathKey& key, std::span<const std::uint8_t> plaintext,
                           char param_name = 'u');

// Inverse of encode_request. A body that does not have the single-parameter
// shape is "not a cryptowall body"; a value that is not even-length hex is
// "malformed hex".
Bytes decode_request(const CwPathKey& key, std::string_view body);

// Response body: bare lowercase hex of the RC4-encrypted serialized message.
// The response keystream starts fresh from the key schedule, independent of
// the request keystream.
std::string encode_response(const CwPathKey& key, const CwServerMessage& msg);
CwServerMessage decode_response(const CwPathKey& key, std::string_view hex_body);

} // namespace ransomlab::cryptowall
