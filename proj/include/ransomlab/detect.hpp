#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ransomlab/bytes.hpp"
#include "ransomlab/family.hpp"

namespace ransomlab::detect {

// One observed HTTP request, already parsed out of whatever capture produced
// it. Header order is preserved.
struct HttpTransaction {
    std::string method;
    std::string host;
    std::string path; // begins "/"
    std::vector<std::pair<std::string, std::string>> headers;
    Bytes body;
};

// Whole-body match of the CryptoWall POST fingerprint: one lowercase letter,
// "=", one or more of [a-z0-9]. Anchored on purpose; unanchored matching over
// benign form posts would be useless as a detector.
bool match_cryptowall_body(std::string_view body);

// RC4-decrypts the body value using the sorted URL path as the key. Absent
// when the body does not have the fingerprint shape or the value is not hex.
std::optional<Bytes> decrypt_capture(const HttpTransaction& txn);

enum class Confidence { weak, strong };

struct DetectionHit {
    Family family;
    Confidence confidence;
    std::string reason;
    std::optional<Bytes> decrypted; // always set on strong hits
};

// Fingerprints a transaction. CryptoWall: weak on POST + body grammar, strong
// when the decrypted payload parses as a C&C server message. CryptoLocker:
// weak on a POST whose binary body is large enough to hold a hello and starts
// with the layout prefix.
std::vector<DetectionHit> classify(const HttpTransaction& txn);

enum class Protocol { http, https, tor, http_then_tor };
enum class DomainSource { dga, hardcoded, both, dynamic_dns };

// Static per-family communication and payment profile.
struct FamilyProfile {
    Family family;
    Protocol protocol;
    DomainSource domain_source;
    std::vector<std::string> payment_options;
    std::string price_amount;
    std::string price_currency;
    std::string price_note; // e.g. late-payment escalation
    bool encrypt_before_c2;
};

const FamilyProfile& family_profile(Family f);

enum class TamperKind {
    shadow_copy_deletion,   // vssadmin ... delete shadows
    recovery_disabled,      // bcdedit ... recoveryenabled no
    boot_status_tampering,  // bcdedit ... bootstatuspolicy ignoreallfailures
    system_restore_disabled // DisableSR set to 1
};

std::string_view tamper_kind_name(TamperKind k);

struct TamperHit {
    std::size_t line_index; // 0-based position in the input list
    TamperKind kind;
    std::string command;
};

// Flags recovery-tampering command lines; matching is case-insensitive and
// tolerant of extra whitespace. Read-only commands never hit.
std::vector<TamperHit> detect_recovery_tampering(const std::vector<std::string>& command_lines);

} // namespace ransomlab::detect
