#include "ransomlab/detect.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "ransomlab/cryptolocker.hpp"
#include "ransomlab/cryptowall.hpp"
#include "ransomlab/error.hpp"

namespace ransomlab::detect {

namespace {

bool is_lower_alpha(char c) { return c >= 'a' && c <= 'z'; }
bool is_lower_alnum(char c) { return is_lower_alpha(c) || (c >= '0' && c <= '9'); }

// CryptoLocker hello heuristic: layout prefix + one RSA-2048 block.
constexpr std::size_t kMinHelloLen = 258;

std::vector<std::string> tokenize_lower(std::string_view line)
{
    std::vector<std::string> tokens;
    std::string current;
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) {
                tokens.push_back(current);
                current.clear();
            }
        } else {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!current.empty())
        tokens.push_back(current);
    return tokens;
}

bool has_token(const std::vector<std::string>& tokens, std::string_view want)
{
    return std::any_of(tokens.begin(), tokens.end(),
                       [&](const std::string& t) { return t == want; });
}

// "vssadmin" also matches "vssadmin.exe", "c:\windows\system32\vssadmin.exe".
bool has_program(const std::vector<std::string>& tokens, std::string_view name)
{
    for (const std::string& t : tokens) {
        std::string_view base = t;
        if (auto slash = base.find_last_of("/\\"); slash != std::string_view::npos)
            base.remove_prefix(slash + 1);
        if (base == name || base == std::string(name) + ".exe")
            return true;
    }
    return false;
}

// An assignment of 1 in any of the spellings reg.exe / .reg files / plain
// "DisableSR = 1" use.
bool assigns_one(const std::vector<std::string>& tokens, std::size_t after)
{
    for (std::size_t i = after; i < tokens.size(); ++i) {
        const std::string& t = tokens[i];
        if (t == "1" || t == "0x1" || t == "0x00000001" || t == "dword:00000001")
            return true;
        if (t.size() > 1 && (t.back() == '1') &&
            (t.find("=1") != std::string::npos || t.find(":1") != std::string::npos))
            return true;
    }
    return false;
}

} // namespace

bool match_cryptowall_body(std::string_view body)
{
    if (body.size() < 3 || !is_lower_alpha(body[0]) || body[1] != '=')
        return false;
    return std::all_of(body.begin() + 2, body.end(), is_lower_alnum);
}

std::optional<Bytes> decrypt_capture(const HttpTransaction& txn)
{
    std::string body = text_of(txn.body);
    if (!match_cryptowall_body(body))
        return std::nullopt;
    try {
        auto key = cryptowall::derive_rc4_key(txn.path);
        return cryptowall::decode_request(key, body);
    } catch (const Error&) {
        return std::nullopt; // empty path, odd hex, non-hex value
    }
}

std::vector<DetectionHit> classify(const HttpTransaction& txn)
{
    std::vector<DetectionHit> hits;
    if (txn.method != "POST")
        return hits;

    std::string body = text_of(txn.body);
    if (match_cryptowall_body(body)) {
        DetectionHit hit{Family::cryptowall, Confidence::weak,
                         "POST body matches the single-parameter RC4 hex grammar",
                         std::nullopt};
        if (auto plain = decrypt_capture(txn)) {
            bool structured = false;
            try {
                cryptowall::parse_server_message(text_of(*plain));
                structured = true;
            } catch (const Error&) {
            }
            if (structured) {
                hit.confidence = Confidence::strong;
                hit.reason = "path-derived RC4 key decrypts the body to a C&C server message";
                hit.decrypted = std::move(plain);
            }
        }
        hits.push_back(std::move(hit));
        return hits;
    }

    if (txn.body.size() >= kMinHelloLen) {
        std::uint16_t prefix = static_cast<std::uint16_t>((txn.body[0] << 8) | txn.body[1]);
        if (prefix == cryptolocker::kHelloLayoutVersion) {
            hits.push_back({Family::cryptolocker, Confidence::weak,
                            "binary POST body large enough for a hello and carrying its layout prefix",
                            std::nullopt});
        }
    }
    return hits;
}

const FamilyProfile& family_profile(Family f)
{
    // Communication (protocol, domain storage) and payment data per family.
    static const std::array<FamilyProfile, 6> profiles = {{
        {Family::dirty_decrypt, Protocol::http, DomainSource::dga,
         {"PaySafeCard", "MoneyPak", "other pre-paid methods"},
         "100", "USD", "", false},
        {Family::cryptolocker, Protocol::http, DomainSource::both,
         {"Bitcoin", "MoneyPak", "UKash", "CashU"},
         "300", "USD", "started with 4 options, narrowed to Bitcoin", false},
        {Family::cryptowall, Protocol::http_then_tor, DomainSource::hardcoded,
         {"Bitcoin", "pre-paid cards (early variants)"},
         "500", "USD", "increased to 1000 USD if not paid within the time frame", false},
        {Family::critroni, Protocol::tor, DomainSource::hardcoded,
         {"Bitcoin"},
         "0.5", "USD", "", true},
        {Family::torrentlocker, Protocol::https, DomainSource::hardcoded,
         {"Bitcoin"},
         "0.8", "BTC", "", false},
        {Family::cryptographic_locker, Protocol::http, DomainSource::dynamic_dns,
         {"Bitcoin"},
         "0.2-0.5", "BTC", "", false},
    }};

    for (const FamilyProfile& p : profiles)
        if (p.family == f)
            return p;
    throw Error("unknown family");
}

std::string_view tamper_kind_name(TamperKind k)
{
    switch (k) {
    case TamperKind::shadow_copy_deletion: return "shadow-copy-deletion";
    case TamperKind::recovery_disabled: return "recovery-disabled";
    case TamperKind::boot_status_tampering: return "boot-status-tampering";
    case TamperKind::system_restore_disabled: return "system-restore-disabled";
    }
    return "?";
}

std::vector<TamperHit> detect_recovery_tampering(const std::vector<std::string>& command_lines)
{
    std::vector<TamperHit> hits;
    for (std::size_t i = 0; i < command_lines.size(); ++i) {
        const std::string& line = command_lines[i];
        auto tokens = tokenize_lower(line);
        if (tokens.empty())
            continue;

        if (has_program(tokens, "vssadmin") && has_token(tokens, "delete") &&
            has_token(tokens, "shadows"))
            hits.push_back({i, TamperKind::shadow_copy_deletion, line});

        if (has_program(tokens, "bcdedit") && has_token(tokens, "recoveryenabled") &&
            has_token(tokens, "no"))
            hits.push_back({i, TamperKind::recovery_disabled, line});

        if (has_program(tokens, "bcdedit") && has_token(tokens, "bootstatuspolicy") &&
            has_token(tokens, "ignoreallfailures"))
            hits.push_back({i, TamperKind::boot_status_tampering, line});

        for (std::size_t t = 0; t < tokens.size(); ++t) {
            if (tokens[t].find("disablesr") == std::string::npos)
                continue;
            // value may live in the same token ("disablesr=1") or a later one
            if (assigns_one(tokens, t)) {
                hits.push_back({i, TamperKind::system_restore_disabled, line});
                break;
            }
        }
    }
    return hits;
}

} // namespace ransomlab::detect
