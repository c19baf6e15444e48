#pragma once

#include <string>
#include <string_view>

namespace ransomlab {

// The six families covered by the toolkit, in first-sighting order.
enum class Family {
    dirty_decrypt,
    cryptolocker,
    cryptowall,
    critroni,
    torrentlocker,
    cryptographic_locker,
};

inline constexpr Family kAllFamilies[] = {
    Family::dirty_decrypt,  Family::cryptolocker, Family::cryptowall,
    Family::critroni,       Family::torrentlocker, Family::cryptographic_locker,
};

// Stable identifier used in data files, logs, and CLI flags ("cryptowall").
std::string_view family_key(Family f);

// Human-readable name ("CryptoWall / CryptoDefense").
std::string_view family_name(Family f);

// Accepts keys, display names, and common aliases (cryptodefense, ctb_locker,
// dirtydecrypt, ...), case-insensitively. Throws Error("unknown family...").
Family parse_family(std::string_view text);

} // namespace ransomlab
