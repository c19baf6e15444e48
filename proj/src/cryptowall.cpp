#include "ransomlab/cryptowall.hpp"

#include <algorithm>
#include <charconv>

#include "ransomlab/error.hpp"
#include "ransomlab/rc4.hpp"

namespace ransomlab::cryptowall {

namespace {

bool is_lower_alpha(char c) { return c >= 'a' && c <= 'z'; }
bool is_lower_alnum(char c) { return is_lower_alpha(c) || (c >= '0' && c <= '9'); }
bool is_lower_hex(char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); }

// The Figure-6 grammar: one lowercase letter, "=", one or more of [a-z0-9],
// matched against the whole body.
bool has_request_shape(std::string_view body)
{
    if (body.size() < 3 || !is_lower_alpha(body[0]) || body[1] != '=')
        return false;
    return std::all_of(body.begin() + 2, body.end(), is_lower_alnum);
}

void check_message_field(std::string_view name, std::string_view value)
{
    if (value.find_first_of("|{}") != std::string_view::npos)
        throw Error("malformed server message: " + std::string(name) +
                    " contains a delimiter character");
}

} // namespace

CwPathKey derive_rc4_key(std::string_view url_path)
{
    std::string_view path = url_path;
    if (!path.empty() && path.front() == '/')
        path.remove_prefix(1);
    if (path.empty())
        throw Error("empty key path");

    CwPathKey key;
    key.raw_path = std::string(path);
    key.sorted_key = bytes_of(path);
    std::sort(key.sorted_key.begin(), key.sorted_key.end());
    return key;
}

CwServerMessage parse_server_message(std::string_view text)
{
    if (text.size() < 2 || text.front() != '{' || text.back() != '}')
        throw Error("malformed server message: missing braces");
    std::string_view inner = text.substr(1, text.size() - 2);

    std::string_view fields[5];
    std::size_t count = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= inner.size(); ++i) {
        if (i == inner.size() || inner[i] == '|') {
            if (count == 5)
                throw Error("malformed server message: expected 5 fields");
            fields[count++] = inner.substr(start, i - start);
            start = i + 1;
        }
    }
    if (count != 5)
        throw Error("malformed server message: expected 5 fields");

    CwServerMessage msg;
    auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(),
                                   msg.build_id);
    if (ec != std::errc() || p != fields[0].data() + fields[0].size())
        throw Error("malformed server message: build id is not a decimal integer");
    msg.payment_domain = std::string(fields[1]);
    msg.victim_id = std::string(fields[2]);
    if (fields[3].size() != 2)
        throw Error("malformed server message: country code must be 2 letters");
    msg.country = std::string(fields[3]);
    msg.public_key_pem = std::string(fields[4]);
    return msg;
}

std::string serialize_server_message(const CwServerMessage& msg)
{
    check_message_field("payment_domain", msg.payment_domain);
    check_message_field("victim_id", msg.victim_id);
    check_message_field("country", msg.country);
    check_message_field("public_key_pem", msg.public_key_pem);
    if (msg.country.size() != 2)
        throw Error("malformed server message: country code must be 2 letters");

    std::string out = "{";
    out += std::to_string(msg.build_id);
    out += '|';
    out += msg.payment_domain;
    out += '|';
    out += msg.victim_id;
    out += '|';
    out += msg.country;
    out += '|';
    out += msg.public_key_pem;
    out += '}';
    return out;
}

std::string encode_request(const CwPathKey& key, std::span<const std::uint8_t> plaintext,
                           char param_name)
{
    if (!is_lower_alpha(param_name))
        throw Error("invalid parameter name: expected a single letter a-z");
    if (plaintext.empty())
        throw Error("empty plaintext");

    std::string body;
    body.push_back(param_name);
    body.push_back('=');
    body += to_hex(rc4_apply(rc4_ksa(key.sorted_key), plaintext));
    return body;
}

Bytes decode_request(const CwPathKey& key, std::string_view body)
{
    if (!has_request_shape(body))
        throw Error("not a cryptowall body");
    std::string_view value = body.substr(2);
    if (value.size() % 2 != 0 || !std::all_of(value.begin(), value.end(), is_lower_hex))
        throw Error("malformed hex: request value is not even-length lowercase hex");
    return rc4_apply(rc4_ksa(key.sorted_key), from_hex(value));
}

std::string encode_response(const CwPathKey& key, const CwServerMessage& msg)
{
    Bytes plaintext = bytes_of(serialize_server_message(msg));
    return to_hex(rc4_apply(rc4_ksa(key.sorted_key), plaintext));
}

CwServerMessage decode_response(const CwPathKey& key, std::string_view hex_body)
{
    Bytes ct = from_hex(hex_body); // throws "malformed hex" on bad input
    Bytes pt = rc4_apply(rc4_ksa(key.sorted_key), ct);
    return parse_server_message(text_of(pt));
}

} // namespace ransomlab::cryptowall
