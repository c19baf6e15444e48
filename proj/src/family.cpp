#include "ransomlab/family.hpp"

#include <algorithm>
#include <cctype>

#include "ransomlab/error.hpp"

namespace ransomlab {

std::string_view family_key(Family f)
{
    switch (f) {
    case Family::dirty_decrypt: return "dirty_decrypt";
    case Family::cryptolocker: return "cryptolocker";
    case Family::cryptowall: return "cryptowall";
    case Family::critroni: return "critroni";
    case Family::torrentlocker: return "torrentlocker";
    case Family::cryptographic_locker: return "cryptographic_locker";
    }
    return "?";
}

std::string_view family_name(Family f)
{
    switch (f) {
    case Family::dirty_decrypt: return "Dirty Decrypt";
    case Family::cryptolocker: return "CryptoLocker";
    case Family::cryptowall: return "CryptoWall / CryptoDefense";
    case Family::critroni: return "Critroni / CTB Locker";
    case Family::torrentlocker: return "TorrentLocker";
    case Family::cryptographic_locker: return "Cryptographic Locker";
    }
    return "?";
}

Family parse_family(std::string_view text)
{
    std::string t;
    t.reserve(text.size());
    for (char c : text) {
        if (c == ' ' || c == '-' || c == '_' || c == '/')
            continue;
        t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }

    if (t == "dirtydecrypt") return Family::dirty_decrypt;
    if (t == "cryptolocker" || t == "cl") return Family::cryptolocker;
    if (t == "cryptowall" || t == "cryptodefense" || t == "cryptowallcryptodefense")
        return Family::cryptowall;
    if (t == "critroni" || t == "ctblocker" || t == "critronictblocker")
        return Family::critroni;
    if (t == "torrentlocker") return Family::torrentlocker;
    if (t == "cryptographiclocker") return Family::cryptographic_locker;

    throw Error("unknown family: " + std::string(text));
}

} // namespace ransomlab
